#pragma once

// Experiment configuration, loadable from an INI file:
//
//   [model]     kind, n, d, prior_amplitude, prior_lengthscale, noise_amplitude,
//               noise_lengthscale, forward_lengthscale, population, horizon,
//               observations, log_mean, log_sd, grid_side, extent, decay
//   [selectors] list, k_max
//   [budgets]   joint_samples, bank_samples, gauss_samples, nmc_inner, nmc_outer,
//               eval_inner, eval_outer, recycle_inner
//   [run]       trials, seed, output, desk, strict, exact_linear_gaussian

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "oedsel/models.hpp"

namespace oedsel {

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::linear_gaussian: return "linear_gaussian";
    case ModelKind::epidemic: return "epidemic";
    case ModelKind::spatial_poisson: return "spatial_poisson";
  }
  return "unknown";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "linear_gaussian" || s == "lg") return ModelKind::linear_gaussian;
  if (s == "epidemic") return ModelKind::epidemic;
  if (s == "spatial_poisson" || s == "poisson") return ModelKind::spatial_poisson;
  throw ConfigError("unknown model kind '" + s + "'");
}

inline const std::vector<std::string>& known_selectors() {
  static const std::vector<std::string> names{"lsig", "gauss", "nmc", "random", "exhaustive"};
  return names;
}

inline std::vector<std::string> parse_list(const std::string& s) {
  std::vector<std::string> out;
  boost::split(out, s, boost::is_any_of(",;"));
  for (auto& x : out) boost::trim(x);
  std::erase_if(out, [](const std::string& x) { return x.empty(); });
  return out;
}

struct ExperimentConfig {
  ModelKind model = ModelKind::linear_gaussian;
  LinearGaussianKernels linear_gaussian;
  EpidemicParams epidemic;
  SpatialPoissonParams spatial_poisson;

  std::vector<std::string> selectors{"lsig", "gauss", "nmc", "random"};
  Index k_max = 10;
  Index trials = 10;

  Index joint_samples = 1000;  ///< M
  Index bank_samples = 1000;   ///< m
  Index gauss_samples = 0;     ///< joint samples for the Gaussian approximation; 0 means M + m
  Index nmc_inner = 10000;     ///< NMC-greedy selection budgets
  Index nmc_outer = 1000;
  Index eval_inner = 10000;  ///< evaluation budgets
  Index eval_outer = 1000;
  bool recycle_inner = false;

  std::uint64_t seed = 42;
  std::string output = "results.csv";
  /// Wall times are written as 0 so repeated runs are byte-identical.
  bool strict = false;
  /// Linear-Gaussian only: selectors use exact covariances and score matrix.
  bool exact_linear_gaussian = true;

  /// Desk-scale budgets for CI runs.
  void apply_desk() {
    eval_inner = 2000;
    eval_outer = 200;
    nmc_inner = 2000;
    nmc_outer = 200;
  }

  Index candidate_count() const {
    switch (model) {
      case ModelKind::linear_gaussian: return linear_gaussian.n;
      case ModelKind::epidemic: return epidemic.n;
      case ModelKind::spatial_poisson: return spatial_poisson.side * spatial_poisson.side;
    }
    return 0;
  }

  Index gauss_sample_count() const { return gauss_samples > 0 ? gauss_samples : joint_samples + bank_samples; }

  ModelParams model_params() const {
    switch (model) {
      case ModelKind::linear_gaussian: return LinearGaussianParams::from_kernels(linear_gaussian);
      case ModelKind::epidemic: return epidemic;
      case ModelKind::spatial_poisson: return spatial_poisson;
    }
    throw ConfigError("unknown model kind");
  }

  void validate() const {
    const Index n = candidate_count();
    if (n < 1) throw ConfigError("model has no candidate observations");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (k_max < 1 || k_max > n) {
      throw ConfigError("k_max must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k_max));
    }
    if (selectors.empty()) throw ConfigError("no selectors configured");
    for (const auto& s : selectors) {
      if (std::find(known_selectors().begin(), known_selectors().end(), s) == known_selectors().end()) {
        throw ConfigError("unknown selector '" + s + "'");
      }
      if (s == "exhaustive" && model != ModelKind::linear_gaussian) {
        throw ConfigError("exhaustive selection needs the linear_gaussian model");
      }
    }
    if (joint_samples < 2) throw ConfigError("joint_samples must be >= 2");
    if (bank_samples < 1) throw ConfigError("bank_samples must be >= 1");
    if (gauss_sample_count() < 2) throw ConfigError("gauss_samples must be >= 2");
    if (nmc_inner < 2 || nmc_outer < 2) throw ConfigError("nmc_inner and nmc_outer must be >= 2");
    if (eval_inner < 2 || eval_outer < 2) throw ConfigError("eval_inner and eval_outer must be >= 2");
    if (output.empty()) throw ConfigError("output path is empty");
  }
};

namespace detail {

template <typename T>
void read_key(const boost::property_tree::ptree& pt, const std::string& key, T& field) {
  if (auto v = pt.get_optional<std::string>(key)) {
    try {
      if constexpr (std::is_same_v<T, bool>) {
        std::string s = boost::to_lower_copy(boost::trim_copy(*v));
        if (s == "true" || s == "1" || s == "yes" || s == "on") field = true;
        else if (s == "false" || s == "0" || s == "no" || s == "off") field = false;
        else throw ConfigError("bad boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        field = boost::trim_copy(*v);
      } else {
        field = pt.get<T>(key);
      }
    } catch (const std::exception&) {
      throw ConfigError("invalid value '" + *v + "' for key " + key);
    }
  }
}

}  // namespace detail

/// Applies the keys present in `pt` on top of `cfg`.
inline void apply_config(const boost::property_tree::ptree& pt, ExperimentConfig& cfg) {
  using detail::read_key;
  static const std::vector<std::string> known{
      "model.kind", "model.n", "model.d", "model.prior_amplitude", "model.prior_lengthscale",
      "model.noise_amplitude", "model.noise_lengthscale", "model.forward_lengthscale", "model.population",
      "model.horizon", "model.observations", "model.log_mean", "model.log_sd", "model.grid_side",
      "model.extent", "model.decay", "selectors.list", "selectors.k_max", "budgets.joint_samples",
      "budgets.bank_samples", "budgets.gauss_samples", "budgets.nmc_inner", "budgets.nmc_outer",
      "budgets.eval_inner", "budgets.eval_outer", "budgets.recycle_inner", "run.trials", "run.seed",
      "run.output", "run.desk", "run.strict", "run.exact_linear_gaussian"};
  for (const auto& [section, body] : pt) {
    if (body.empty()) throw ConfigError("key '" + section + "' is outside any section");
    for (const auto& [key, _] : body) {
      const std::string full = section + "." + key;
      if (std::find(known.begin(), known.end(), full) == known.end()) throw ConfigError("unknown key " + full);
    }
  }

  std::string kind;
  read_key(pt, "model.kind", kind);
  if (!kind.empty()) cfg.model = parse_model_kind(kind);
  Index n = 0;
  read_key(pt, "model.n", n);
  if (n > 0) {
    cfg.linear_gaussian.n = n;
    cfg.epidemic.n = n;
  }
  read_key(pt, "model.observations", cfg.epidemic.n);
  read_key(pt, "model.d", cfg.linear_gaussian.d);
  read_key(pt, "model.prior_amplitude", cfg.linear_gaussian.prior_amplitude);
  read_key(pt, "model.prior_lengthscale", cfg.linear_gaussian.prior_lengthscale);
  read_key(pt, "model.noise_amplitude", cfg.linear_gaussian.noise_amplitude);
  read_key(pt, "model.noise_lengthscale", cfg.linear_gaussian.noise_lengthscale);
  read_key(pt, "model.forward_lengthscale", cfg.linear_gaussian.forward_lengthscale);
  read_key(pt, "model.population", cfg.epidemic.population);
  read_key(pt, "model.horizon", cfg.epidemic.horizon);
  read_key(pt, "model.log_mean", cfg.epidemic.log_mean);
  read_key(pt, "model.log_sd", cfg.epidemic.log_sd);
  read_key(pt, "model.grid_side", cfg.spatial_poisson.side);
  read_key(pt, "model.extent", cfg.spatial_poisson.extent);
  read_key(pt, "model.decay", cfg.spatial_poisson.decay);

  std::string list;
  read_key(pt, "selectors.list", list);
  if (!list.empty()) cfg.selectors = parse_list(list);
  read_key(pt, "selectors.k_max", cfg.k_max);

  bool desk = false;
  read_key(pt, "run.desk", desk);
  if (desk) cfg.apply_desk();
  read_key(pt, "budgets.joint_samples", cfg.joint_samples);
  read_key(pt, "budgets.bank_samples", cfg.bank_samples);
  read_key(pt, "budgets.gauss_samples", cfg.gauss_samples);
  read_key(pt, "budgets.nmc_inner", cfg.nmc_inner);
  read_key(pt, "budgets.nmc_outer", cfg.nmc_outer);
  read_key(pt, "budgets.eval_inner", cfg.eval_inner);
  read_key(pt, "budgets.eval_outer", cfg.eval_outer);
  read_key(pt, "budgets.recycle_inner", cfg.recycle_inner);

  read_key(pt, "run.trials", cfg.trials);
  read_key(pt, "run.seed", cfg.seed);
  read_key(pt, "run.output", cfg.output);
  read_key(pt, "run.strict", cfg.strict);
  read_key(pt, "run.exact_linear_gaussian", cfg.exact_linear_gaussian);
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config " + path + ": " + e.message());
  }
  apply_config(pt, base);
  return base;
}

}  // namespace oedsel
