#pragma once

// Operation-count scaling over a grid of (n, k).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oedsel/selectors.hpp"

namespace oedsel {

struct BenchRow {
  Index n = 0;
  Index k = 0;
  std::uint64_t lsig_inversion_mults = 0;  ///< Cholesky + triangular solves of the conditioning steps
  std::uint64_t lsig_mults = 0;            ///< all counted multiplies
  double lsig_ratio = 0.0;                 ///< lsig_inversion_mults / (n k^3)
  std::uint64_t gauss_inversion_mults = 0;  ///< direct log-det evaluation
  double gauss_ratio = 0.0;                 ///< gauss_inversion_mults / (n k^4)
  std::uint64_t nmc_mi_evals = 0;
  std::uint64_t nmc_expected = 0;  ///< k(2n - k + 1) / 2
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double lsig_spread = 0.0;   ///< max / min of lsig_ratio
  double gauss_spread = 0.0;  ///< max / min of gauss_ratio
  double tolerance = 2.0;
  bool lsig_pass() const noexcept { return lsig_spread <= tolerance; }
  bool nmc_pass() const noexcept {
    return std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.nmc_mi_evals == r.nmc_expected; });
  }
  bool passed() const noexcept { return lsig_pass() && nmc_pass(); }
};

inline BenchReport run_bench(const std::vector<Index>& ns, const std::vector<Index>& ks, double tolerance = 2.0) {
  if (ns.empty() || ks.empty()) throw ConfigError("bench grid is empty");
  BenchReport rep;
  rep.tolerance = tolerance;
  for (Index n : ns) {
    LinearGaussianKernels kern;
    kern.n = n;
    kern.d = n;
    const LinearGaussianModel model(LinearGaussianParams::from_kernels(kern));
    const auto q = model.exact_posterior_quantities();
    for (Index k : ks) {
      if (k < 1 || k > n) throw ConfigError("bench needs 1 <= k <= n");
      BenchRow row;
      row.n = n;
      row.k = k;
      const SelectorReport lsig = select_lsig(q.score_matrix, q.marginal_cov, k);
      row.lsig_inversion_mults = lsig.ops.inversion_mults;
      row.lsig_mults = lsig.ops.mults;
      row.lsig_ratio = static_cast<double>(row.lsig_inversion_mults) / (static_cast<double>(n) * std::pow(k, 3));
      const SelectorReport gauss =
          select_gauss_greedy(q.marginal_cov, model.params().noise_cov, k, GaussGreedyMode::direct);
      row.gauss_inversion_mults = gauss.ops.inversion_mults;
      row.gauss_ratio = static_cast<double>(row.gauss_inversion_mults) / (static_cast<double>(n) * std::pow(k, 4));
      const SelectorReport nmc = select_nmc_greedy(model, k, NmcOptions{2, 2, derive_seed(0, "bench", n), false});
      row.nmc_mi_evals = nmc.ops.mi_evals;
      row.nmc_expected = static_cast<std::uint64_t>(k) * (2 * n - k + 1) / 2;
      rep.rows.push_back(row);
    }
  }
  auto spread = [&](auto field) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& r : rep.rows) {
      lo = std::min(lo, field(r));
      hi = std::max(hi, field(r));
    }
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  };
  rep.lsig_spread = spread([](const BenchRow& r) { return r.lsig_ratio; });
  rep.gauss_spread = spread([](const BenchRow& r) { return r.gauss_ratio; });
  return rep;
}

}  // namespace oedsel
