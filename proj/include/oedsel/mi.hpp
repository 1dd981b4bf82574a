#pragma once

// Mutual-information estimators: closed form for Gaussian quantities and
// nested Monte Carlo for arbitrary observation models.

#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "oedsel/models.hpp"
#include "oedsel/numerics.hpp"

namespace oedsel {

enum class Estimator { closed_form, nmc };

inline std::string_view to_string(Estimator e) { return e == Estimator::closed_form ? "closed_form" : "nmc"; }

struct MIEstimate {
  double value = 0.0;      ///< nats
  double std_error = 0.0;  ///< nats, 0 for closed form
  Estimator estimator = Estimator::closed_form;
  Index inner = 0;  ///< M_in, nmc only
  Index outer = 0;  ///< M_out, nmc only
};

/// log((1/n) sum exp(v_i)) with max subtraction. Throws when every entry is -inf.
inline double log_mean_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!(mx > -std::numeric_limits<double>::infinity())) {
    throw DegenerateMixtureError("all inner likelihoods are zero");
  }
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc / static_cast<double>(v.size()));
}

/// Gaussian information 0.5 * (log det A_{S,S} - log det B_{S,S}) over index
/// subsets S, for a marginal covariance A and a conditional covariance B.
/// With A = Sigma_Y and B = Sigma_eps this is the exact linear-Gaussian MI.
class GaussianInformation {
 public:
  GaussianInformation(SymMatrix marginal, SymMatrix conditional)
      : marginal_(std::move(marginal)), conditional_(std::move(conditional)) {
    if (marginal_.dim() != conditional_.dim()) throw ConfigError("covariance dimensions differ");
  }

  Index n() const noexcept { return marginal_.dim(); }
  const SymMatrix& marginal() const noexcept { return marginal_; }
  const SymMatrix& conditional() const noexcept { return conditional_; }

  double operator()(std::span<const Index> subset, OpCounters* ops = nullptr) const {
    if (subset.empty()) return 0.0;
    detail::check_indices(subset, n(), "design");
    detail::check_distinct(subset, n());
    return 0.5 * (logdet_psd(select_submatrix(marginal_, subset, subset), ops) -
                  logdet_psd(select_submatrix(conditional_, subset, subset), ops));
  }

 private:
  SymMatrix marginal_;
  SymMatrix conditional_;
};

inline GaussianInformation closed_form_information(const LinearGaussianModel& model) {
  return {model.exact_posterior_quantities().marginal_cov, model.params().noise_cov};
}

/// Exact I(X; Y_A) = 0.5 log det(Sigma_{Y_A} Sigma_{eps_A}^{-1}) for the linear-Gaussian model.
inline MIEstimate mi_closed_form(const LinearGaussianModel& model, const Design& design) {
  if (design.n() != model.n()) throw ConfigError("design candidate count does not match the model");
  return {closed_form_information(model)(design.indices()), 0.0, Estimator::closed_form, 0, 0};
}

inline MIEstimate mi_closed_form(const GaussianInformation& info, const Design& design) {
  return {info(design.indices()), 0.0, Estimator::closed_form, 0, 0};
}

struct NmcOptions {
  Index inner = 10000;
  Index outer = 1000;
  std::uint64_t seed = 0;
  /// Share one bank of inner prior draws across all outer samples.
  bool recycle_inner = false;
};

/// Nested Monte Carlo estimate of I(X; Y_A):
///   (1/M_out) sum_j [ log pi(y_A^j | x^j) - log (1/M_in) sum_i pi(y_A^j | x~^i) ].
/// Outer draws come from one stream and the inner draws of outer sample j from
/// their own stream, so estimates with different M_in share outer samples.
template <ObservationModel Model>
MIEstimate mi_nmc(const Model& model, const Design& design, const NmcOptions& opt, OpCounters* ops = nullptr) {
  if (opt.inner < 2 || opt.outer < 2) throw ConfigError("nested Monte Carlo needs M_in >= 2 and M_out >= 2");
  if (design.n() != model.n()) throw ConfigError("design candidate count does not match the model");
  MIEstimate est{0.0, 0.0, Estimator::nmc, opt.inner, opt.outer};
  if (design.empty()) return est;

  const auto lik = model.restrict(design);
  Matrix shared;
  if (opt.recycle_inner) {
    Rng rng = make_rng(derive_seed(opt.seed, "nmc-inner-shared"));
    shared.resize(lik.latent_dim(), opt.inner);
    Vector latent;
    for (Index i = 0; i < opt.inner; ++i) {
      lik.sample_latent(rng, latent);
      shared.col(i) = latent;
    }
  }

  Rng outer_rng = make_rng(derive_seed(opt.seed, "nmc-outer"));
  std::vector<double> terms(opt.outer);
  std::vector<double> inner_ll(opt.inner);
  Vector latent;
  Vector inner_latent;
  Vector y;
  for (Index j = 0; j < opt.outer; ++j) {
    lik.sample_latent(outer_rng, latent);
    lik.sample_observation(latent, outer_rng, y);
    const double own = lik.loglik_kernel(y, latent);
    if (opt.recycle_inner) {
      for (Index i = 0; i < opt.inner; ++i) inner_ll[i] = lik.loglik_kernel(y, shared.col(i));
    } else {
      Rng inner_rng = make_rng(derive_seed(opt.seed, "nmc-inner", j));
      for (Index i = 0; i < opt.inner; ++i) {
        lik.sample_latent(inner_rng, inner_latent);
        inner_ll[i] = lik.loglik_kernel(y, inner_latent);
      }
    }
    terms[j] = own - log_mean_exp(inner_ll);
  }

  double mean = 0.0;
  for (double t : terms) mean += t;
  mean /= static_cast<double>(opt.outer);
  double var = 0.0;
  for (double t : terms) var += (t - mean) * (t - mean);
  var /= static_cast<double>(opt.outer - 1);

  est.value = mean;
  est.std_error = std::sqrt(var / static_cast<double>(opt.outer));
  if (ops) {
    ops->mi_evals += 1;
    ops->model_evals += static_cast<std::uint64_t>(opt.outer) * (1 + opt.inner);
  }
  return est;
}

}  // namespace oedsel
