#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "oedsel/design.hpp"
#include "oedsel/errors.hpp"
#include "oedsel/numerics.hpp"
#include "oedsel/rng.hpp"
#include "oedsel/types.hpp"

namespace oedsel {

/// Likelihood of the observations on a fixed design, parametrized by the
/// smallest latent quantity the observations depend on. Used by the nested
/// Monte Carlo estimator.
///
/// `loglik_kernel` is the log-likelihood up to an additive term that depends
/// on y only; such terms cancel in every MI contrast.
template <typename R>
concept RestrictedLikelihood = requires(const R& r, Rng& rng, Vector& out, const Vector& v) {
  { r.size() } -> std::convertible_to<Index>;
  { r.latent_dim() } -> std::convertible_to<Index>;
  r.sample_latent(rng, out);
  r.sample_observation(v, rng, out);
  { r.loglik_kernel(v, v) } -> std::convertible_to<double>;
  { r.loglik(v, v) } -> std::convertible_to<double>;
};

/// A Bayesian observation model: prior on X in R^d, likelihood of Y in R^n
/// with gradients with respect to y.
template <typename M>
concept ObservationModel = requires(const M& m, Rng& rng, const Vector& v, const Matrix& bank,
                                    const Design& design) {
  { m.name() } -> std::convertible_to<std::string_view>;
  { m.n() } -> std::convertible_to<Index>;
  { m.d() } -> std::convertible_to<Index>;
  { m.sample_prior(rng) } -> std::same_as<Vector>;
  { m.sample_observation(v, rng) } -> std::same_as<Vector>;
  { m.loglik(v, v) } -> std::same_as<double>;
  { m.loglik(v, v, design) } -> std::same_as<double>;
  { m.loglik_relaxed(v, v) } -> std::same_as<double>;
  { m.grad_y_loglik(v, v) } -> std::same_as<Vector>;
  { m.grad_y_lik(v, v) } -> std::same_as<Vector>;
  { m.bank_score(m.make_bank(bank), v) } -> std::same_as<Vector>;
  { m.restrict(design) } -> RestrictedLikelihood;
};

/// Paired joint draws plus an independent prior bank for score estimation.
struct JointSampleSet {
  Matrix x;           ///< M x d prior draws
  Matrix y;           ///< M x n observations, row j drawn given x row j
  Matrix prior_bank;  ///< m x d prior draws, independent of (x, y)
  std::uint64_t seed = 0;

  Index size() const noexcept { return static_cast<Index>(x.rows()); }
  Index bank_size() const noexcept { return static_cast<Index>(prior_bank.rows()); }
};

template <ObservationModel Model>
JointSampleSet sample_joint(const Model& model, Index joint_count, Index bank_count, std::uint64_t seed) {
  if (joint_count < 2) throw ConfigError("sample_joint needs M >= 2");
  if (bank_count < 1) throw ConfigError("sample_joint needs m >= 1");
  JointSampleSet s;
  s.seed = seed;
  s.x.resize(joint_count, model.d());
  s.y.resize(joint_count, model.n());
  s.prior_bank.resize(bank_count, model.d());

  Rng joint = make_rng(derive_seed(seed, "joint"));
  for (Index j = 0; j < joint_count; ++j) {
    Vector x = model.sample_prior(joint);
    s.y.row(j) = model.sample_observation(x, joint).transpose();
    s.x.row(j) = x.transpose();
  }
  Rng bank = make_rng(derive_seed(seed, "bank"));
  for (Index j = 0; j < bank_count; ++j) s.prior_bank.row(j) = model.sample_prior(bank).transpose();
  return s;
}

/// Equispaced grid z_i = i/(dim-1) on [0, 1] (a single point at 0 when dim = 1).
inline Vector unit_grid(Index dim) {
  Vector z(dim);
  for (Index i = 0; i < dim; ++i) z(i) = dim > 1 ? static_cast<double>(i) / static_cast<double>(dim - 1) : 0.0;
  return z;
}

/// Exponential kernel a * exp(-|u_i - v_j| / l).
inline Matrix exponential_kernel(const Vector& u, const Vector& v, double amplitude, double lengthscale) {
  if (!(amplitude > 0.0) || !(lengthscale > 0.0)) {
    throw ConfigError("exponential kernel needs amplitude > 0 and lengthscale > 0");
  }
  Matrix k(u.size(), v.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    for (Eigen::Index j = 0; j < v.size(); ++j) k(i, j) = amplitude * std::exp(-std::abs(u(i) - v(j)) / lengthscale);
  return k;
}

namespace detail {

/// y * log(p) with the convention 0 * log(0) = 0.
inline double xlogy(double y, double logp) { return y == 0.0 ? 0.0 : y * logp; }

/// Numerically stable softmax in place; returns log(sum(exp(v))).
/// Throws DegenerateMixtureError when every entry is -inf.
inline double softmax_inplace(Eigen::Ref<Vector> v) {
  const double mx = v.maxCoeff();
  if (!(mx > -std::numeric_limits<double>::infinity())) {
    throw DegenerateMixtureError("every prior-bank component assigns zero likelihood to y");
  }
  v = (v.array() - mx).exp();
  const double sum = v.sum();
  v /= sum;
  return mx + std::log(sum);
}

inline void check_dims(const Vector& v, Index expected, const char* what) {
  if (static_cast<Index>(v.size()) != expected) {
    throw DomainError(std::string(what) + " has dimension " + std::to_string(v.size()) + ", expected " +
                      std::to_string(expected));
  }
}

}  // namespace detail

}  // namespace oedsel
