#pragma once

#include <cmath>
#include <random>

#include "oedsel/numerics.hpp"

namespace oedsel::test {

/// Random symmetric positive-definite matrix A A^T + ridge * I.
inline Matrix random_spd(Index dim, std::mt19937_64& rng, double ridge = 0.1) {
  std::normal_distribution<double> normal;
  Matrix a(dim, dim);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
  return a * a.transpose() + ridge * Matrix::Identity(dim, dim);
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
  return a;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double rel_diff(const Matrix& a, const Matrix& b) {
  return max_abs(a - b) / std::max(max_abs(b), 1e-300);
}

}  // namespace oedsel::test
