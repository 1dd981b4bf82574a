#pragma once

// Dense symmetric-matrix utilities: submatrix selection, Schur complements,
// sample covariances and log-determinants. All index arguments are original
// candidate indices.

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "oedsel/design.hpp"
#include "oedsel/errors.hpp"
#include "oedsel/types.hpp"

namespace oedsel {

/// Symmetric matrix with finite entries. Symmetry is enforced on construction
/// by averaging with the transpose.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw ConfigError("SymMatrix needs a square matrix, got " + std::to_string(m_.rows()) + "x" +
                        std::to_string(m_.cols()));
    }
    if (!m_.allFinite()) throw NumericalError("SymMatrix has non-finite entries");
    symmetrize();
  }

  static SymMatrix zero(Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }
  static SymMatrix identity(Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }
  static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

  Index dim() const noexcept { return static_cast<Index>(m_.rows()); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }
  double trace() const { return m_.trace(); }

 private:
  void symmetrize() { m_ = (0.5 * (m_ + m_.transpose())).eval(); }

  Matrix m_;
};

namespace detail {

inline void check_indices(std::span<const Index> idx, Index dim, const char* what) {
  for (Index i : idx) {
    if (i >= dim) {
      throw IndexError(std::string(what) + " index " + std::to_string(i) + " out of range for dim " +
                       std::to_string(dim));
    }
  }
}

inline void check_distinct(std::span<const Index> idx, Index dim) {
  std::vector<bool> seen(dim, false);
  for (Index i : idx) {
    if (seen[i]) throw IndexError("index " + std::to_string(i) + " repeated");
    seen[i] = true;
  }
}

inline std::uint64_t cholesky_mults(std::uint64_t k) { return k * (k + 1) * (k + 2) / 6; }
inline std::uint64_t trsv_mults(std::uint64_t k) { return k * (k + 1) / 2; }

}  // namespace detail

/// Rows `rows` and columns `cols` of `m`, i.e. P_rows^T m P_cols.
inline Matrix select_submatrix(const Matrix& m, std::span<const Index> rows, std::span<const Index> cols) {
  detail::check_indices(rows, static_cast<Index>(m.rows()), "row");
  detail::check_indices(cols, static_cast<Index>(m.cols()), "column");
  Matrix out(rows.size(), cols.size());
  for (Index r = 0; r < rows.size(); ++r)
    for (Index c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  return out;
}

inline Matrix select_submatrix(const SymMatrix& m, std::span<const Index> rows, std::span<const Index> cols) {
  return select_submatrix(m.matrix(), rows, cols);
}

/// Principal submatrix on `idx`, kept symmetric.
inline SymMatrix principal_submatrix(const SymMatrix& m, std::span<const Index> idx) {
  return SymMatrix(select_submatrix(m.matrix(), idx, idx));
}

inline Vector select_entries(const Vector& v, std::span<const Index> idx) {
  detail::check_indices(idx, static_cast<Index>(v.size()), "entry");
  Vector out(idx.size());
  for (Index p = 0; p < idx.size(); ++p) out(p) = v(idx[p]);
  return out;
}

/// Cholesky factorization of a conditioning block. On failure a jitter of
/// 1e-10 * mean(diag) is added once; a second failure raises
/// DegenerateBlockError naming `labels`.
inline Eigen::LLT<Matrix> factor_with_jitter(const Matrix& block, std::span<const Index> labels,
                                             OpCounters* ops = nullptr) {
  const auto k = static_cast<std::uint64_t>(block.rows());
  auto count = [&] {
    if (!ops) return;
    ops->factorizations += 1;
    ops->mults += detail::cholesky_mults(k);
    ops->inversion_mults += detail::cholesky_mults(k);
  };
  auto fail = [&]() -> DegenerateBlockError { return {std::vector<Index>(labels.begin(), labels.end())}; };

  if (!block.allFinite()) throw fail();
  count();
  Eigen::LLT<Matrix> llt(block);
  if (llt.info() == Eigen::Success) return llt;

  const double lambda = 1e-10 * block.diagonal().mean();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw fail();
  Matrix jittered = block;
  jittered.diagonal().array() += lambda;
  count();
  llt.compute(jittered);
  if (llt.info() != Eigen::Success) throw fail();
  return llt;
}

/// Conditional covariance after observing a subset of coordinates.
struct ConditionalCovariance {
  SymMatrix cov;       ///< S_{B,B} - S_{B,A} S_{A,A}^{-1} S_{A,B}
  IndexMap surviving;  ///< B, the original indices of cov's rows/cols
};

/// Schur complement of `s` conditioned on the coordinates `conditioned_on`.
inline ConditionalCovariance schur_complement(const SymMatrix& s, std::span<const Index> conditioned_on,
                                              OpCounters* ops = nullptr) {
  const Index n = s.dim();
  detail::check_indices(conditioned_on, n, "conditioning");
  detail::check_distinct(conditioned_on, n);

  IndexMap rest = IndexMap::complement_of(conditioned_on, n);
  const auto& keep = rest.surviving();
  if (conditioned_on.empty()) return {s, std::move(rest)};

  Matrix s_aa = select_submatrix(s.matrix(), conditioned_on, conditioned_on);
  Matrix s_ab = select_submatrix(s.matrix(), conditioned_on, keep);
  Matrix s_bb = select_submatrix(s.matrix(), keep, keep);

  auto llt = factor_with_jitter(s_aa, conditioned_on, ops);
  // W = L^{-1} S_{A,B}; S_{B,A} S_{A,A}^{-1} S_{A,B} = W^T W.
  Matrix w = llt.matrixL().solve(s_ab);
  s_bb.noalias() -= w.transpose() * w;

  if (ops) {
    const std::uint64_t k = conditioned_on.size();
    const std::uint64_t r = keep.size();
    const std::uint64_t solve = r * detail::trsv_mults(k);
    ops->inversion_mults += solve;
    ops->mults += solve + k * r * (r + 1) / 2;
  }
  return {SymMatrix(std::move(s_bb)), std::move(rest)};
}

/// Unbiased (1/(M-1)) sample covariance of the rows of `samples` (M x n).
inline SymMatrix sample_covariance(const Matrix& samples) {
  const auto m = samples.rows();
  if (m < 2) throw InsufficientSamplesError("sample_covariance needs at least 2 samples, got " + std::to_string(m));
  Matrix centered = samples.rowwise() - samples.colwise().mean();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(m - 1);
  return SymMatrix(std::move(cov));
}

/// log det of a positive-definite matrix via Cholesky.
inline double logdet_psd(const Matrix& m, OpCounters* ops = nullptr) {
  Eigen::LLT<Matrix> llt(m);
  if (ops) {
    const auto k = static_cast<std::uint64_t>(m.rows());
    ops->factorizations += 1;
    ops->mults += detail::cholesky_mults(k);
    ops->inversion_mults += detail::cholesky_mults(k);
  }
  if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("log-determinant of a non positive-definite matrix");
  const Matrix& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) throw NotPositiveDefiniteError("log-determinant of a non positive-definite matrix");
    acc += std::log(l(i, i));
  }
  return 2.0 * acc;
}

inline double logdet_psd(const SymMatrix& m, OpCounters* ops = nullptr) { return logdet_psd(m.matrix(), ops); }

/// Inverse of a positive-definite matrix.
inline SymMatrix spd_inverse(const SymMatrix& m) {
  Eigen::LLT<Matrix> llt(m.matrix());
  if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("inverse of a non positive-definite matrix");
  return SymMatrix(llt.solve(Matrix::Identity(m.dim(), m.dim())));
}

/// Lower Cholesky factor; throws NotPositiveDefiniteError on failure.
inline Matrix cholesky_lower(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("Cholesky factorization failed");
  return llt.matrixL();
}

}  // namespace oedsel
