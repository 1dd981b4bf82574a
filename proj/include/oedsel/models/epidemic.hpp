#pragma once

#include <cmath>
#include <limits>
#include <string_view>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "oedsel/models/model.hpp"

namespace oedsel {

/// Infection counts in a population of N, observed at t_i = i*T/n, i = 1..n.
/// y_i | x ~ Binomial(N, 1 - exp(-x t_i)), log x ~ N(mu, sigma^2).
struct EpidemicParams {
  int population = 100;
  double horizon = 5.0;
  Index n = 50;
  double log_mean = 0.0;
  double log_sd = 0.25;
};

namespace detail {

/// log p and log(1 - p) for p = 1 - exp(-x t).
inline void infection_logs(double x, double t, double& log_p, double& log_q) {
  log_q = -x * t;
  log_p = std::log(-std::expm1(log_q));
}

inline double binomial_coord_kernel(double y, double population, double log_p, double log_q) {
  return xlogy(y, log_p) + xlogy(population - y, log_q);
}

}  // namespace detail

class EpidemicRestricted {
 public:
  EpidemicRestricted(std::vector<double> times, const EpidemicParams& p)
      : times_(std::move(times)), population_(p.population), log_mean_(p.log_mean), log_sd_(p.log_sd) {}

  Index size() const noexcept { return times_.size(); }
  Index latent_dim() const noexcept { return 1; }

  void sample_latent(Rng& rng, Vector& out) const {
    std::normal_distribution<double> normal(log_mean_, log_sd_);
    out.resize(1);
    out(0) = std::exp(normal(rng));
  }

  void sample_observation(const Vector& latent, Rng& rng, Vector& out) const {
    out.resize(size());
    for (Index i = 0; i < size(); ++i) {
      std::binomial_distribution<int> binom(population_, -std::expm1(-latent(0) * times_[i]));
      out(i) = binom(rng);
    }
  }

  double loglik_kernel(const Vector& y, const Vector& latent) const {
    double acc = 0.0;
    double lp = 0.0;
    double lq = 0.0;
    for (Index i = 0; i < size(); ++i) {
      detail::infection_logs(latent(0), times_[i], lp, lq);
      acc += detail::binomial_coord_kernel(y(i), population_, lp, lq);
    }
    return acc;
  }

  double loglik(const Vector& y, const Vector& latent) const {
    const double n = population_;
    double c = 0.0;
    for (Index i = 0; i < size(); ++i) c += std::lgamma(n + 1) - std::lgamma(y(i) + 1) - std::lgamma(n - y(i) + 1);
    return c + loglik_kernel(y, latent);
  }

 private:
  std::vector<double> times_;
  int population_;
  double log_mean_;
  double log_sd_;
};

class EpidemicModel {
 public:
  struct Bank {
    Matrix log_p;  ///< n x m
    Matrix log_q;  ///< n x m, log(1 - p)
  };

  explicit EpidemicModel(EpidemicParams params) : p_(params) {
    if (p_.population < 1) throw ConfigError("epidemic needs population N >= 1");
    if (!(p_.horizon > 0.0)) throw ConfigError("epidemic needs horizon T_end > 0");
    if (p_.n < 1) throw ConfigError("epidemic needs n >= 1");
    if (!(p_.log_sd > 0.0)) throw ConfigError("epidemic needs log_sd > 0");
    times_.resize(p_.n);
    for (Index i = 0; i < p_.n; ++i) times_[i] = static_cast<double>(i + 1) * p_.horizon / static_cast<double>(p_.n);
  }

  std::string_view name() const noexcept { return "epidemic"; }
  Index n() const noexcept { return p_.n; }
  Index d() const noexcept { return 1; }
  const EpidemicParams& params() const noexcept { return p_; }
  const std::vector<double>& times() const noexcept { return times_; }

  /// Infection probability p_i = 1 - exp(-x t_i).
  double infection_probability(Index i, double x) const { return -std::expm1(-x * times_.at(i)); }

  Vector sample_prior(Rng& rng) const {
    std::normal_distribution<double> normal(p_.log_mean, p_.log_sd);
    Vector x(1);
    x(0) = std::exp(normal(rng));
    return x;
  }

  Vector sample_observation(const Vector& x, Rng& rng) const {
    check_x(x);
    Vector y(n());
    for (Index i = 0; i < n(); ++i) {
      std::binomial_distribution<int> binom(p_.population, infection_probability(i, x(0)));
      y(i) = binom(rng);
    }
    return y;
  }

  /// Log binomial mass of coordinate i in its continuous (gamma-function) extension.
  double coord_loglik(Index i, double y, double x) const {
    const double n = p_.population;
    double lp = 0.0;
    double lq = 0.0;
    detail::infection_logs(x, times_[i], lp, lq);
    return std::lgamma(n + 1) - std::lgamma(y + 1) - std::lgamma(n - y + 1) +
           detail::binomial_coord_kernel(y, n, lp, lq);
  }

  double loglik(const Vector& y, const Vector& x) const {
    check(y, x);
    return loglik_relaxed(y, x);
  }

  double loglik(const Vector& y_sub, const Vector& x, const Design& design) const {
    check_x(x);
    detail::check_dims(y_sub, design.size(), "y restricted to design");
    double acc = 0.0;
    for (Index p = 0; p < design.size(); ++p) {
      check_count(y_sub(p));
      acc += coord_loglik(design[p], y_sub(p), x(0));
    }
    return acc;
  }

  /// loglik_relaxed(y + s e_i) - loglik_relaxed(y), with the gamma-function
  /// differences taken as ratios so small s does not cancel.
  double loglik_relaxed_increment(Index i, double yi, double s, const Vector& x) const {
    const double n = p_.population;
    double lp = 0.0;
    double lq = 0.0;
    detail::infection_logs(x(0), times_[i], lp, lq);
    return std::log(boost::math::tgamma_delta_ratio(yi + 1, s)) +
           std::log(boost::math::tgamma_delta_ratio(n - yi + 1, -s)) + s * (lp - lq);
  }

  double loglik_relaxed(const Vector& y, const Vector& x) const {
    double acc = 0.0;
    for (Index i = 0; i < n(); ++i) acc += coord_loglik(i, y(i), x(0));
    return acc;
  }

  /// d/dy_i log pi = Psi(N - y_i + 1) - Psi(y_i + 1) + log p_i - log(1 - p_i).
  Vector grad_y_loglik(const Vector& y, const Vector& x) const {
    check(y, x);
    Vector g(n());
    for (Index i = 0; i < n(); ++i) {
      double lp = 0.0;
      double lq = 0.0;
      detail::infection_logs(x(0), times_[i], lp, lq);
      g(i) = digamma_gap(y(i)) + lp - lq;
    }
    return g;
  }

  /// d/dy_i pi = -pi_i (-Psi(N - y_i + 1) + Psi(y_i + 1) - log p_i + log(1 - p_i)) * prod_{j != i} pi_j.
  Vector grad_y_lik(const Vector& y, const Vector& x) const {
    check(y, x);
    Vector coord(n());
    for (Index i = 0; i < n(); ++i) coord(i) = coord_loglik(i, y(i), x(0));
    const double total = coord.sum();
    Vector g(n());
    for (Index i = 0; i < n(); ++i) {
      double lp = 0.0;
      double lq = 0.0;
      detail::infection_logs(x(0), times_[i], lp, lq);
      const double d_pi_i = -std::exp(coord(i)) * (-digamma_gap(y(i)) - lp + lq);
      g(i) = d_pi_i * std::exp(total - coord(i));
    }
    return g;
  }

  Bank make_bank(const Matrix& prior_bank) const {
    if (prior_bank.cols() != 1) throw DomainError("epidemic prior bank must have one column");
    const auto m = prior_bank.rows();
    Bank b{Matrix(n(), m), Matrix(n(), m)};
    for (Eigen::Index j = 0; j < m; ++j)
      for (Index i = 0; i < n(); ++i) detail::infection_logs(prior_bank(j, 0), times_[i], b.log_p(i, j), b.log_q(i, j));
    return b;
  }

  Vector bank_score(const Bank& bank, const Vector& y) const {
    detail::check_dims(y, n(), "y");
    const auto m = bank.log_p.cols();
    const double pop = p_.population;
    Vector logw(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      double acc = 0.0;
      for (Index i = 0; i < n(); ++i) acc += detail::binomial_coord_kernel(y(i), pop, bank.log_p(i, j), bank.log_q(i, j));
      logw(j) = acc;
    }
    detail::softmax_inplace(logw);
    Vector s(n());
    for (Index i = 0; i < n(); ++i) {
      double logit = 0.0;
      for (Eigen::Index j = 0; j < m; ++j)
        if (logw(j) > 0.0) logit += logw(j) * (bank.log_p(i, j) - bank.log_q(i, j));
      s(i) = digamma_gap(y(i)) + logit;
    }
    return s;
  }

  EpidemicRestricted restrict(const Design& design) const {
    std::vector<double> t;
    t.reserve(design.size());
    for (Index i : design) t.push_back(times_.at(i));
    return {std::move(t), p_};
  }

 private:
  double digamma_gap(double y) const {
    const double n = p_.population;
    return boost::math::digamma(n - y + 1) - boost::math::digamma(y + 1);
  }

  void check_x(const Vector& x) const {
    detail::check_dims(x, 1, "x");
    if (!(x(0) >= 0.0)) throw DomainError("epidemic infection rate must be >= 0");
  }

  void check_count(double y) const {
    if (!std::isfinite(y) || y < 0.0 || y > p_.population) {
      throw DomainError("epidemic count " + std::to_string(y) + " outside [0, N]");
    }
  }

  void check(const Vector& y, const Vector& x) const {
    check_x(x);
    detail::check_dims(y, n(), "y");
    for (Index i = 0; i < n(); ++i) check_count(y(i));
  }

  EpidemicParams p_;
  std::vector<double> times_;
};

}  // namespace oedsel
