// oedsel command-line interface.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oedsel/harness/bench.hpp"
#include "oedsel/harness/config.hpp"
#include "oedsel/harness/experiment.hpp"
#include "oedsel/harness/gradcheck.hpp"
#include "oedsel/harness/results.hpp"

namespace {

using namespace oedsel;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitCheckFailed = 3;

/// Options shared by every subcommand that builds a model. Unset options
/// leave the config (file or defaults) untouched.
struct ModelOptions {
  std::string config;
  std::optional<std::string> model;
  std::optional<Index> n;
  std::optional<Index> d;
  std::optional<double> noise_amplitude;
  std::optional<Index> grid_side;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "INI configuration file")->check(CLI::ExistingFile);
    app->add_option("--model", model, "linear_gaussian | epidemic | spatial_poisson");
    app->add_option("--n", n, "candidate count (linear_gaussian, epidemic)");
    app->add_option("--d", d, "parameter dimension (linear_gaussian)");
    app->add_option("--noise-amplitude", noise_amplitude, "noise kernel amplitude (linear_gaussian)");
    app->add_option("--grid-side", grid_side, "cells per side (spatial_poisson)");
  }

  ExperimentConfig load() const {
    ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_config(config);
    apply(cfg);
    return cfg;
  }

  void apply(ExperimentConfig& cfg) const {
    if (model) cfg.model = parse_model_kind(*model);
    if (n) {
      cfg.linear_gaussian.n = *n;
      cfg.epidemic.n = *n;
    }
    if (d) cfg.linear_gaussian.d = *d;
    if (noise_amplitude) cfg.linear_gaussian.noise_amplitude = *noise_amplitude;
    if (grid_side) cfg.spatial_poisson.side = *grid_side;
  }
};

struct RunOptions {
  ModelOptions model;
  std::optional<std::string> selectors;
  std::optional<Index> k;
  std::optional<Index> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<Index> joint_samples;
  std::optional<Index> bank_samples;
  std::optional<Index> gauss_samples;
  std::optional<Index> nmc_inner;
  std::optional<Index> nmc_outer;
  std::optional<Index> eval_inner;
  std::optional<Index> eval_outer;
  bool desk = false;
  bool strict = false;
  bool sampled = false;
  bool recycle = false;
  bool quiet = false;
};

void print_summary(const std::vector<SummaryCell>& cells, std::FILE* f) {
  std::fprintf(f, "%-12s %4s %7s %14s %12s %9s\n", "selector", "k", "trials", "mean_mi", "stderr", "occupied");
  for (const auto& c : cells) {
    std::fprintf(f, "%-12s %4zu %7zu %14.6f %12.6f %9zu\n", c.selector.c_str(), c.k, c.count, c.mean, c.std_error,
                 c.occupied);
  }
}

int cmd_run(const RunOptions& o) {
  ExperimentConfig cfg = o.model.load();
  if (o.desk) cfg.apply_desk();
  if (o.selectors) cfg.selectors = parse_list(*o.selectors);
  if (o.k) cfg.k_max = *o.k;
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output = *o.out;
  if (o.joint_samples) cfg.joint_samples = *o.joint_samples;
  if (o.bank_samples) cfg.bank_samples = *o.bank_samples;
  if (o.gauss_samples) cfg.gauss_samples = *o.gauss_samples;
  if (o.nmc_inner) cfg.nmc_inner = *o.nmc_inner;
  if (o.nmc_outer) cfg.nmc_outer = *o.nmc_outer;
  if (o.eval_inner) cfg.eval_inner = *o.eval_inner;
  if (o.eval_outer) cfg.eval_outer = *o.eval_outer;
  if (o.strict) cfg.strict = true;
  if (o.sampled) cfg.exact_linear_gaussian = false;
  if (o.recycle) cfg.recycle_inner = true;
  cfg.validate();

  ProgressFn progress;
  if (!o.quiet) {
    progress = [&](Index t, const std::string& s) {
      std::fprintf(stderr, "trial %zu/%zu: %s\n", t + 1, cfg.trials, s.c_str());
    };
  }
  const ExperimentResult res = run_experiment(cfg, progress);
  const auto json = emit_results(res.rows, cfg.output, res.failures);
  print_summary(summarize(res.rows), stdout);
  std::fprintf(stdout, "wrote %s and %s\n", cfg.output.c_str(), json.string().c_str());
  for (const auto& f : res.failures) {
    std::fprintf(stderr, "trial %zu, %s failed: %s\n", f.trial, f.selector.c_str(), f.message.c_str());
  }
  if (!res.ok()) {
    const bool numerical = std::any_of(res.failures.begin(), res.failures.end(), [](auto& f) { return f.numerical; });
    return numerical ? kExitNumerical : kExitConfig;
  }
  return kExitOk;
}

int cmd_evaluate(const ModelOptions& mo, const std::string& design_text, const std::string& estimator, Index inner,
                 Index outer, std::uint64_t seed) {
  ExperimentConfig cfg = mo.load();
  const AnyModel model = make_model(cfg.model_params());
  const Index n = cfg.candidate_count();
  const Design design = Design::parse(design_text, n);
  const auto* lg = std::get_if<LinearGaussianModel>(&model);
  MIEstimate e;
  if (estimator == "closed_form" || (estimator == "auto" && lg)) {
    if (!lg) throw ConfigError("closed-form MI needs the linear_gaussian model");
    e = mi_closed_form(*lg, design);
  } else if (estimator == "nmc" || estimator == "auto") {
    const NmcOptions opt{inner, outer, seed, false};
    e = std::visit([&](const auto& m) { return mi_nmc(m, design, opt); }, model);
  } else {
    throw ConfigError("unknown estimator '" + estimator + "'");
  }
  nlohmann::json j{{"model", to_string(cfg.model)},
                   {"design", design.to_string()},
                   {"estimator", std::string(to_string(e.estimator))},
                   {"mi", e.value},
                   {"stderr", e.std_error}};
  if (e.estimator == Estimator::nmc) {
    j["inner"] = e.inner;
    j["outer"] = e.outer;
    j["seed"] = seed;
  }
  std::cout << j.dump() << "\n";
  return kExitOk;
}

int cmd_check_gradients(const ModelOptions& mo, const GradientCheckOptions& opt) {
  ExperimentConfig cfg = mo.load();
  const AnyModel model = make_model(cfg.model_params());
  const GradientCheckReport r = check_gradients(model, opt);
  std::printf("model=%s points=%zu compared=%zu max_rel_err=%.3e tolerance=%.1e worst_point=%zu worst_coord=%zu %s\n",
              to_string(cfg.model).c_str(), r.points, r.compared, r.max_rel_error, r.tolerance, r.worst_point,
              r.worst_coordinate, r.passed() ? "PASS" : "FAIL");
  return r.passed() ? kExitOk : kExitCheckFailed;
}

std::vector<Index> parse_grid_values(const std::string& text) {
  std::vector<Index> out;
  for (const auto& tok : parse_list(text)) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw ConfigError("bad grid value '" + tok + "'");
    }
  }
  return out;
}

int cmd_bench(const std::vector<std::string>& grid, double tolerance) {
  std::vector<Index> ns{20, 40, 80};
  std::vector<Index> ks{2, 4, 8};
  for (const auto& g : grid) {
    const auto eq = g.find('=');
    if (eq == std::string::npos) throw ConfigError("grid entries look like n=20,40,80 or k=2,4,8");
    const std::string key = g.substr(0, eq);
    if (key == "n") ns = parse_grid_values(g.substr(eq + 1));
    else if (key == "k") ks = parse_grid_values(g.substr(eq + 1));
    else throw ConfigError("unknown grid axis '" + key + "'");
  }
  const BenchReport rep = run_bench(ns, ks, tolerance);
  std::printf("%5s %3s %16s %14s %12s %16s %12s %8s %8s\n", "n", "k", "lsig_inv_mults", "lsig_mults",
              "lsig/(nk^3)", "gauss_inv_mults", "gauss/(nk^4)", "nmc_mi", "expected");
  for (const auto& r : rep.rows) {
    std::printf("%5zu %3zu %16llu %14llu %12.5f %16llu %12.5f %8llu %8llu\n", r.n, r.k,
                static_cast<unsigned long long>(r.lsig_inversion_mults), static_cast<unsigned long long>(r.lsig_mults),
                r.lsig_ratio, static_cast<unsigned long long>(r.gauss_inversion_mults), r.gauss_ratio,
                static_cast<unsigned long long>(r.nmc_mi_evals), static_cast<unsigned long long>(r.nmc_expected));
  }
  std::printf("lsig nk^3 spread (max/min) = %.4f, tolerance %.2f: %s\n", rep.lsig_spread, rep.tolerance,
              rep.lsig_pass() ? "PASS" : "FAIL");
  std::printf("gauss nk^4 spread (max/min) = %.4f (reported only)\n", rep.gauss_spread);
  std::printf("nmc-greedy MI evaluations = k(2n-k+1)/2: %s\n", rep.nmc_pass() ? "PASS" : "FAIL");
  return rep.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy Bayesian experimental design: LSIG, Gaussian approximation and nested Monte Carlo"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run a seeded multi-trial selection experiment");
  run.model.attach(run_cmd);
  run_cmd->add_option("--selector", run.selectors, "comma-separated: lsig,gauss,nmc,random,exhaustive");
  run_cmd->add_option("--k", run.k, "largest design size");
  run_cmd->add_option("--trials", run.trials, "number of trials");
  run_cmd->add_option("--seed", run.seed, "master seed");
  run_cmd->add_option("--out", run.out, "CSV output path (summary JSON is written next to it)");
  run_cmd->add_option("--joint-samples", run.joint_samples, "M, joint samples for the score matrix");
  run_cmd->add_option("--bank-samples", run.bank_samples, "m, prior bank size");
  run_cmd->add_option("--gauss-samples", run.gauss_samples, "joint samples for the Gaussian approximation");
  run_cmd->add_option("--nmc-inner", run.nmc_inner, "NMC-greedy inner samples");
  run_cmd->add_option("--nmc-outer", run.nmc_outer, "NMC-greedy outer samples");
  run_cmd->add_option("--eval-inner", run.eval_inner, "evaluation inner samples");
  run_cmd->add_option("--eval-outer", run.eval_outer, "evaluation outer samples");
  run_cmd->add_flag("--desk", run.desk, "desk-scale budgets (2000 inner, 200 outer)");
  run_cmd->add_flag("--strict", run.strict, "write zero wall times for byte-identical output");
  run_cmd->add_flag("--sampled", run.sampled, "linear_gaussian: use sampled instead of exact matrices");
  run_cmd->add_flag("--recycle-inner", run.recycle, "share one inner NMC bank across outer samples");
  run_cmd->add_flag("--quiet", run.quiet, "no progress output");

  ModelOptions eval_model;
  std::string design_text;
  std::string estimator = "auto";
  Index eval_inner = 10000;
  Index eval_outer = 1000;
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "estimate the mutual information of one design");
  eval_model.attach(eval_cmd);
  eval_cmd->add_option("--design", design_text, "semicolon-separated indices, e.g. 3;7;12")->required();
  eval_cmd->add_option("--estimator", estimator, "auto | closed_form | nmc");
  eval_cmd->add_option("--nmc-inner", eval_inner, "inner samples");
  eval_cmd->add_option("--nmc-outer", eval_outer, "outer samples");
  eval_cmd->add_option("--seed", eval_seed, "estimator seed");

  ModelOptions grad_model;
  GradientCheckOptions grad_opt;
  auto* grad_cmd = app.add_subcommand("check-gradients", "compare analytic and finite-difference gradients");
  grad_model.attach(grad_cmd);
  grad_cmd->add_option("--points", grad_opt.points, "joint samples to check");
  grad_cmd->add_option("--seed", grad_opt.seed, "sampling seed");
  grad_cmd->add_option("--tolerance", grad_opt.tolerance, "relative error threshold");
  grad_cmd->add_option("--inject-fault", grad_opt.inject_fault, "debug: scale the analytic gradient by 1 + value")
      ->group("");

  std::vector<std::string> grid;
  double bench_tol = 2.0;
  auto* bench_cmd = app.add_subcommand("bench", "operation-count scaling report");
  bench_cmd->add_option("--grid", grid, "axes, e.g. --grid n=20,40,80 k=2,4,8")->expected(0, 2);
  bench_cmd->add_option("--tolerance", bench_tol, "allowed max/min spread of count/(n k^3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*eval_cmd) return cmd_evaluate(eval_model, design_text, estimator, eval_inner, eval_outer, eval_seed);
    if (*grad_cmd) return cmd_check_gradients(grad_model, grad_opt);
    if (*bench_cmd) return cmd_bench(grid, bench_tol);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const IndexError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
