#pragma once

// Greedy and baseline strategies that pick k of n candidate observations.
// Ties are always broken toward the lowest original index.

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "oedsel/mi.hpp"
#include "oedsel/models.hpp"
#include "oedsel/numerics.hpp"
#include "oedsel/score.hpp"

namespace oedsel {

struct SelectionStep {
  Index index = 0;        ///< original candidate index chosen at this step
  double criterion = 0.0;  ///< value of the selection criterion for the chosen index
  double wall_ms = 0.0;    ///< elapsed time since the selector started
  OpCounters ops;          ///< cumulative counters after this step
};

struct SelectorReport {
  std::string selector;
  Design design;
  std::vector<SelectionStep> per_step;
  OpCounters ops;  ///< totals, including setup (score matrix, covariances)
};

namespace detail {

class StepClock {
 public:
  StepClock() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void check_k(Index k, Index n) {
  if (k < 1 || k > n) {
    throw ConfigError("need 1 <= k <= n, got k=" + std::to_string(k) + ", n=" + std::to_string(n));
  }
}

/// Position of the largest value; the first one wins ties. NaN values never win.
inline Index argmax_first(const std::vector<double>& v) {
  Index best = v.size();
  double best_value = -std::numeric_limits<double>::infinity();
  for (Index p = 0; p < v.size(); ++p) {
    if (v[p] > best_value || (best == v.size() && v[p] == best_value)) {
      best = p;
      best_value = v[p];
    }
  }
  if (best == v.size()) throw NumericalError("no candidate has a finite selection criterion");
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LSIG

/// Greedy selection by the largest diagonal entry of F S, where F is
/// restricted to the surviving candidates and S is the covariance
/// conditioned on the already selected ones.
inline SelectorReport select_lsig(const SymMatrix& score, const SymMatrix& cov, Index k, OpCounters setup = {}) {
  const Index n = score.dim();
  if (cov.dim() != n) throw ConfigError("score matrix and covariance have different dimensions");
  detail::check_k(k, n);
  detail::StepClock clock;

  SelectorReport report{"lsig", Design(n), {}, setup};
  IndexMap map = IndexMap::identity(n);
  Matrix f = score.matrix();
  Matrix s = cov.matrix();
  std::vector<double> diag;

  for (Index step = 0; step < k; ++step) {
    const Index r = map.size();
    diag.assign(r, 0.0);
    for (Index p = 0; p < r; ++p) diag[p] = f.row(p).dot(s.col(p));
    report.ops.mults += static_cast<std::uint64_t>(r) * r;

    Index pos = 0;
    try {
      pos = detail::argmax_first(diag);
    } catch (const NumericalError& e) {
      throw SelectionError(e.what(), report.design.indices());
    }
    const Index chosen = map.original(pos);
    report.design.push_back(chosen);
    map.remove(chosen);

    if (step + 1 < k) {
      f = select_submatrix(score, map.surviving(), map.surviving());
      try {
        s = schur_complement(cov, report.design.indices(), &report.ops).cov.matrix();
      } catch (const DegenerateBlockError& e) {
        throw SelectionError(std::string("lsig: ") + e.what(), report.design.indices());
      }
    }
    report.per_step.push_back({chosen, diag[pos], clock.elapsed_ms(), report.ops});
  }
  return report;
}

/// LSIG on joint samples: F from the estimated posterior scores, S the
/// sample covariance of y.
template <ObservationModel Model>
SelectorReport select_lsig(const Model& model, const JointSampleSet& samples, Index k) {
  detail::check_k(k, model.n());
  detail::StepClock clock;
  OpCounters setup;
  ScoreMatrix f = build_score_matrix(model, samples, &setup);
  SymMatrix s = sample_covariance(samples.y);
  const double setup_ms = clock.elapsed_ms();
  SelectorReport report = select_lsig(f.f, s, k, setup);
  for (auto& st : report.per_step) st.wall_ms += setup_ms;
  return report;
}

// ---------------------------------------------------------------------------
// Gaussian approximation

enum class GaussGreedyMode {
  incremental,  ///< rank-one determinant updates, direct recheck every 10 steps
  direct,       ///< full log-determinants for every candidate
};

/// Standard greedy on the Gaussian information
///   log det Sigma_{A+i} - log det Sigma_{A+i | X},
/// given marginal and conditional covariances of Y.
inline SelectorReport select_gauss_greedy(const SymMatrix& marginal, const SymMatrix& conditional, Index k,
                                          GaussGreedyMode mode = GaussGreedyMode::incremental,
                                          OpCounters setup = {}) {
  const Index n = marginal.dim();
  if (conditional.dim() != n) throw ConfigError("marginal and conditional covariances differ in size");
  detail::check_k(k, n);
  detail::StepClock clock;
  constexpr Index recheck_every = 10;

  SelectorReport report{"gauss", Design(n), {}, setup};
  IndexMap rest = IndexMap::identity(n);
  const Matrix& sy = marginal.matrix();
  const Matrix& sc = conditional.matrix();
  // Lower Cholesky factors of the selected blocks, grown one row per step.
  Matrix ly(0, 0);
  Matrix lc(0, 0);
  double logdet_y = 0.0;
  double logdet_c = 0.0;

  auto direct_value = [&](Index cand) {
    std::vector<Index> idx = report.design.indices();
    idx.push_back(cand);
    const auto fy = factor_with_jitter(select_submatrix(sy, idx, idx), idx, &report.ops);
    const auto fc = factor_with_jitter(select_submatrix(sc, idx, idx), idx, &report.ops);
    return 2.0 * (Matrix(fy.matrixL()).diagonal().array().log().sum() -
                  Matrix(fc.matrixL()).diagonal().array().log().sum());
  };

  std::vector<double> values;
  std::vector<Vector> vy;
  std::vector<Vector> vc;
  for (Index step = 0; step < k; ++step) {
    const auto& cands = rest.surviving();
    const Index a = report.design.size();
    values.assign(cands.size(), 0.0);
    vy.assign(cands.size(), Vector());
    vc.assign(cands.size(), Vector());
    const bool use_direct = mode == GaussGreedyMode::direct || (step > 0 && step % recheck_every == 0);

    try {
      for (Index p = 0; p < cands.size(); ++p) {
        const Index c = cands[p];
        if (mode == GaussGreedyMode::direct) {
          values[p] = direct_value(c);
          continue;
        }
        Vector by(a);
        Vector bc(a);
        for (Index q = 0; q < a; ++q) {
          by(q) = sy(report.design[q], c);
          bc(q) = sc(report.design[q], c);
        }
        if (a > 0) {
          ly.triangularView<Eigen::Lower>().solveInPlace(by);
          lc.triangularView<Eigen::Lower>().solveInPlace(bc);
        }
        const double var_y = sy(c, c) - by.squaredNorm();
        const double var_c = sc(c, c) - bc.squaredNorm();
        report.ops.mults += 2 * (detail::trsv_mults(a) + a);
        report.ops.inversion_mults += 2 * detail::trsv_mults(a);
        vy[p] = std::move(by);
        vc[p] = std::move(bc);
        if (use_direct || !(var_y > 0.0) || !(var_c > 0.0)) {
          values[p] = direct_value(c);
        } else {
          values[p] = logdet_y + std::log(var_y) - logdet_c - std::log(var_c);
        }
      }
    } catch (const DegenerateBlockError& e) {
      throw SelectionError(std::string("gauss: ") + e.what(), report.design.indices());
    }

    Index pos = 0;
    try {
      pos = detail::argmax_first(values);
    } catch (const NumericalError& e) {
      throw SelectionError(e.what(), report.design.indices());
    }
    const Index chosen = cands[pos];

    if (mode == GaussGreedyMode::direct) {
      report.design.push_back(chosen);
      rest.remove(chosen);
      report.per_step.push_back({chosen, values[pos], clock.elapsed_ms(), report.ops});
      continue;
    }
    // Grow the factors with the chosen candidate.
    const double var_y = sy(chosen, chosen) - vy[pos].squaredNorm();
    const double var_c = sc(chosen, chosen) - vc[pos].squaredNorm();
    report.design.push_back(chosen);
    rest.remove(chosen);
    if (var_y > 0.0 && var_c > 0.0) {
      auto grow = [a](Matrix& l, const Vector& v, double var) {
        Matrix next = Matrix::Zero(a + 1, a + 1);
        next.topLeftCorner(a, a) = l;
        next.block(a, 0, 1, a) = v.transpose();
        next(a, a) = std::sqrt(var);
        l = std::move(next);
      };
      grow(ly, vy[pos], var_y);
      grow(lc, vc[pos], var_c);
    } else {
      const auto& idx = report.design.indices();
      try {
        ly = factor_with_jitter(select_submatrix(sy, idx, idx), idx, &report.ops).matrixL();
        lc = factor_with_jitter(select_submatrix(sc, idx, idx), idx, &report.ops).matrixL();
      } catch (const DegenerateBlockError& e) {
        throw SelectionError(std::string("gauss: ") + e.what(), report.design.indices());
      }
    }
    logdet_y = 2.0 * ly.diagonal().array().log().sum();
    logdet_c = 2.0 * lc.diagonal().array().log().sum();
    report.per_step.push_back({chosen, values[pos], clock.elapsed_ms(), report.ops});
  }
  return report;
}

/// Marginal and conditional (given X) covariances of Y estimated from joint
/// samples; the conditional one is the Schur complement of the joint (x, y)
/// sample covariance on the x block.
struct GaussianMoments {
  SymMatrix marginal;
  SymMatrix conditional;
};

inline GaussianMoments estimate_gaussian_moments(const JointSampleSet& samples, OpCounters* ops = nullptr) {
  const auto d = samples.x.cols();
  const auto n = samples.y.cols();
  Matrix joint(samples.x.rows(), d + n);
  joint << samples.x, samples.y;
  SymMatrix cov = sample_covariance(joint);
  std::vector<Index> xs(d);
  std::iota(xs.begin(), xs.end(), Index{0});
  auto cond = schur_complement(cov, xs, ops);
  SymMatrix marginal(cov.matrix().bottomRightCorner(n, n));
  return {std::move(marginal), std::move(cond.cov)};
}

template <ObservationModel Model>
SelectorReport select_gauss_greedy(const Model& model, const JointSampleSet& samples, Index k,
                                   GaussGreedyMode mode = GaussGreedyMode::incremental) {
  detail::check_k(k, model.n());
  detail::StepClock clock;
  OpCounters setup;
  GaussianMoments mom = estimate_gaussian_moments(samples, &setup);
  const double setup_ms = clock.elapsed_ms();
  SelectorReport report = select_gauss_greedy(mom.marginal, mom.conditional, k, mode, setup);
  for (auto& st : report.per_step) st.wall_ms += setup_ms;
  return report;
}

// ---------------------------------------------------------------------------
// Greedy over a set-function oracle, and NMC-greedy

/// Evaluates the information of a candidate design; `step` is the greedy step.
using DesignOracle = std::function<MIEstimate(const Design&, Index step)>;

/// Standard greedy: at each step pick argmax_i value(A + i). The shared
/// I(X; Y_A) term of the incremental gain does not change the argmax.
inline SelectorReport select_greedy(Index n, Index k, const DesignOracle& oracle, std::string name = "greedy") {
  detail::check_k(k, n);
  detail::StepClock clock;
  SelectorReport report{std::move(name), Design(n), {}, {}};
  IndexMap rest = IndexMap::identity(n);
  std::vector<double> values;
  for (Index step = 0; step < k; ++step) {
    const auto& cands = rest.surviving();
    values.assign(cands.size(), 0.0);
    for (Index p = 0; p < cands.size(); ++p) {
      Design trial = report.design;
      trial.push_back(cands[p]);
      values[p] = oracle(trial, step).value;
      report.ops.mi_evals += 1;
    }
    Index pos = 0;
    try {
      pos = detail::argmax_first(values);
    } catch (const NumericalError& e) {
      throw SelectionError(e.what(), report.design.indices());
    }
    const Index chosen = cands[pos];
    report.design.push_back(chosen);
    rest.remove(chosen);
    report.per_step.push_back({chosen, values[pos], clock.elapsed_ms(), report.ops});
  }
  return report;
}

/// Greedy on nested Monte Carlo MI. All candidates of one step share a seed
/// derived from (opt.seed, step).
template <ObservationModel Model>
SelectorReport select_nmc_greedy(const Model& model, Index k, const NmcOptions& opt) {
  OpCounters evals;
  auto oracle = [&](const Design& design, Index step) {
    NmcOptions o = opt;
    o.seed = derive_seed(opt.seed, "nmc-greedy-step", step);
    return mi_nmc(model, design, o, &evals);
  };
  SelectorReport report;
  try {
    report = select_greedy(model.n(), k, oracle, "nmc");
  } catch (const SelectionError&) {
    throw;
  } catch (const Error& e) {
    throw SelectionError(std::string("nmc: ") + e.what(), {});
  }
  // mi_evals are counted by select_greedy; model evaluations come from the estimator.
  report.ops.model_evals = evals.model_evals;
  std::uint64_t per_eval = evals.mi_evals ? evals.model_evals / evals.mi_evals : 0;
  for (auto& st : report.per_step) st.ops.model_evals = st.ops.mi_evals * per_eval;
  return report;
}

// ---------------------------------------------------------------------------
// Baselines

/// Uniform k-subset without replacement (partial Fisher-Yates); the draw order
/// is the design order.
inline SelectorReport select_random(Index n, Index k, std::uint64_t seed) {
  detail::check_k(k, n);
  detail::StepClock clock;
  Rng rng = make_rng(derive_seed(seed, "random"));
  std::vector<Index> pool(n);
  std::iota(pool.begin(), pool.end(), Index{0});
  SelectorReport report{"random", Design(n), {}, {}};
  for (Index p = 0; p < k; ++p) {
    std::uniform_int_distribution<Index> pick(p, n - 1);
    std::swap(pool[p], pool[pick(rng)]);
    report.design.push_back(pool[p]);
    report.per_step.push_back({pool[p], 0.0, clock.elapsed_ms(), {}});
  }
  return report;
}

inline double binomial_coefficient(Index n, Index k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

/// Exact maximizer of the Gaussian information over all k-subsets
/// (lexicographically first on ties). Refuses when C(n, k) > max_subsets.
inline Design select_exhaustive(const GaussianInformation& info, Index k, double max_subsets = 1e6) {
  const Index n = info.n();
  detail::check_k(k, n);
  const double count = binomial_coefficient(n, k);
  if (count > max_subsets) {
    throw BudgetExceededError("exhaustive search over " + std::to_string(static_cast<long long>(count)) +
                                  " subsets exceeds the budget",
                              count);
  }
  std::vector<Index> comb(k);
  std::iota(comb.begin(), comb.end(), Index{0});
  std::vector<Index> best = comb;
  double best_value = -std::numeric_limits<double>::infinity();
  while (true) {
    const double v = info(comb);
    if (v > best_value) {
      best_value = v;
      best = comb;
    }
    // next combination in lexicographic order
    Index i = k;
    while (i > 0 && comb[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (Index j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  return Design(n, best);
}

inline Design select_exhaustive(const LinearGaussianModel& model, Index k, double max_subsets = 1e6) {
  return select_exhaustive(closed_form_information(model), k, max_subsets);
}

}  // namespace oedsel
