#pragma once

// Seeded multi-trial experiment runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oedsel/harness/config.hpp"
#include "oedsel/selectors.hpp"

namespace oedsel {

struct ResultRow {
  Index trial = 0;
  std::string selector;
  Index k = 0;
  Design design;
  double mi_value = 0.0;
  double mi_stderr = 0.0;
  double wall_time_ms = 0.0;
  OpCounters ops;
};

struct TrialFailure {
  Index trial = 0;
  std::string selector;
  std::string message;
  bool numerical = false;
};

struct SummaryCell {
  std::string selector;
  Index k = 0;
  Index count = 0;   ///< trials contributing
  double mean = 0.0;
  double std_error = 0.0;  ///< standard error of the mean across trials
  Index occupied = 0;    ///< distinct candidates selected at least once
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<TrialFailure> failures;
  bool ok() const noexcept { return failures.empty(); }
};

/// Per-(selector, k) mean, standard error and occupied-cell count, in
/// selector order of first appearance then increasing k.
inline std::vector<SummaryCell> summarize(const std::vector<ResultRow>& rows) {
  std::vector<std::string> order;
  std::map<std::pair<std::string, Index>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.selector) == order.end()) order.push_back(r.selector);
    groups[{r.selector, r.k}].push_back(&r);
  }
  std::vector<SummaryCell> out;
  for (const auto& sel : order) {
    for (const auto& [key, members] : groups) {
      if (key.first != sel) continue;
      SummaryCell c;
      c.selector = sel;
      c.k = key.second;
      c.count = members.size();
      std::set<Index> cells;
      for (const auto* r : members) {
        c.mean += r->mi_value;
        for (Index i : r->design.indices()) cells.insert(i);
      }
      c.mean /= static_cast<double>(c.count);
      if (c.count > 1) {
        double var = 0.0;
        for (const auto* r : members) var += (r->mi_value - c.mean) * (r->mi_value - c.mean);
        var /= static_cast<double>(c.count - 1);
        c.std_error = std::sqrt(var / static_cast<double>(c.count));
      }
      c.occupied = cells.size();
      out.push_back(c);
    }
  }
  return out;
}

inline const SummaryCell* find_cell(const std::vector<SummaryCell>& cells, const std::string& selector, Index k) {
  for (const auto& c : cells)
    if (c.selector == selector && c.k == k) return &c;
  return nullptr;
}

namespace detail {

/// Scores designs with the common evaluation estimator of one trial. Equal
/// designs (as sets) are scored once.
class TrialEvaluator {
 public:
  TrialEvaluator(const AnyModel& model, const ExperimentConfig& cfg, std::uint64_t eval_seed)
      : model_(model), cfg_(cfg), seed_(eval_seed) {
    if (const auto* lg = std::get_if<LinearGaussianModel>(&model_)) info_.emplace(closed_form_information(*lg));
  }

  MIEstimate operator()(const Design& design) {
    const std::string key = Design(design.n(), design.sorted()).to_string();
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    MIEstimate e;
    if (info_) {
      e = mi_closed_form(*info_, design);
    } else {
      const NmcOptions opt{cfg_.eval_inner, cfg_.eval_outer, seed_, cfg_.recycle_inner};
      e = std::visit([&](const auto& m) { return mi_nmc(m, design, opt); }, model_);
    }
    cache_.emplace(key, e);
    return e;
  }

 private:
  const AnyModel& model_;
  const ExperimentConfig& cfg_;
  std::uint64_t seed_;
  std::optional<GaussianInformation> info_;
  std::map<std::string, MIEstimate> cache_;
};

inline SelectorReport run_greedy_selector(const std::string& name, const AnyModel& model, const ExperimentConfig& cfg,
                                          std::uint64_t trial_seed) {
  const Index k = cfg.k_max;
  const auto* lg = std::get_if<LinearGaussianModel>(&model);
  const bool exact = lg != nullptr && cfg.exact_linear_gaussian;
  if (name == "lsig") {
    if (exact) {
      auto q = lg->exact_posterior_quantities();
      return select_lsig(q.score_matrix, q.marginal_cov, k);
    }
    return std::visit(
        [&](const auto& m) {
          auto s = sample_joint(m, cfg.joint_samples, cfg.bank_samples, derive_seed(trial_seed, "lsig"));
          return select_lsig(m, s, k);
        },
        model);
  }
  if (name == "gauss") {
    if (exact) {
      auto q = lg->exact_posterior_quantities();
      return select_gauss_greedy(q.marginal_cov, lg->params().noise_cov, k);
    }
    return std::visit(
        [&](const auto& m) {
          auto s = sample_joint(m, cfg.gauss_sample_count(), 1, derive_seed(trial_seed, "gauss"));
          return select_gauss_greedy(m, s, k);
        },
        model);
  }
  if (name == "nmc") {
    const NmcOptions opt{cfg.nmc_inner, cfg.nmc_outer, derive_seed(trial_seed, "nmc-select"), cfg.recycle_inner};
    return std::visit([&](const auto& m) { return select_nmc_greedy(m, k, opt); }, model);
  }
  throw ConfigError("selector '" + name + "' is not greedy");
}

}  // namespace detail

using ProgressFn = std::function<void(Index trial, const std::string& selector)>;

/// Runs every selector for every trial and scores each design of size
/// 1..k_max with the trial's evaluation estimator. Greedy selectors run once
/// at k_max and their prefixes are scored; random and exhaustive draw one
/// design per k. Errors are recorded per (trial, selector) and the run goes on.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
  cfg.validate();
  const AnyModel model = make_model(cfg.model_params());
  const Index n = cfg.candidate_count();
  ExperimentResult result;

  for (Index t = 0; t < cfg.trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, "trial", t);
    detail::TrialEvaluator evaluate(model, cfg, derive_seed(trial_seed, "eval"));
    for (const auto& name : cfg.selectors) {
      if (progress) progress(t, name);
      std::vector<ResultRow> rows;
      try {
        if (name == "random" || name == "exhaustive") {
          for (Index k = 1; k <= cfg.k_max; ++k) {
            detail::StepClock clock;
            Design d = name == "random" ? select_random(n, k, derive_seed(trial_seed, "random", k)).design
                                        : select_exhaustive(std::get<LinearGaussianModel>(model), k);
            const double ms = clock.elapsed_ms();
            const MIEstimate e = evaluate(d);
            rows.push_back({t, name, k, std::move(d), e.value, e.std_error, ms, {}});
          }
        } else {
          const SelectorReport rep = detail::run_greedy_selector(name, model, cfg, trial_seed);
          for (Index k = 1; k <= cfg.k_max; ++k) {
            Design d = rep.design.prefix(k);
            const MIEstimate e = evaluate(d);
            const auto& step = rep.per_step[k - 1];
            rows.push_back({t, name, k, std::move(d), e.value, e.std_error, step.wall_ms, step.ops});
          }
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        result.failures.push_back({t, name, e.what(), dynamic_cast<const NumericalError*>(&e) != nullptr});
        continue;
      }
      if (cfg.strict)
        for (auto& r : rows) r.wall_time_ms = 0.0;
      result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
  }
  return result;
}

}  // namespace oedsel
