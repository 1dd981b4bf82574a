#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace oedsel {

using Index = std::size_t;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Work counters used to check the cost accounting of the selectors.
///
/// `mults` is the total number of scalar multiplications performed by dense
/// linear algebra. `inversion_mults` is the subset spent in factorizations
/// and triangular solves, i.e. the part that grows with the size of the
/// conditioning set.
struct OpCounters {
  std::uint64_t mults = 0;
  std::uint64_t inversion_mults = 0;
  std::uint64_t factorizations = 0;
  std::uint64_t model_evals = 0;
  std::uint64_t mi_evals = 0;

  OpCounters& operator+=(const OpCounters& o) {
    mults += o.mults;
    inversion_mults += o.inversion_mults;
    factorizations += o.factorizations;
    model_evals += o.model_evals;
    mi_evals += o.mi_evals;
    return *this;
  }

  friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

}  // namespace oedsel
