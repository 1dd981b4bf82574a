#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "oedsel/models/model.hpp"

namespace oedsel {

/// Event counts on a side x side grid of equal cells partitioning [0, L]^2.
/// y_i | x ~ Poisson(b_i x_i) with exposure b_i = D_i / |c_i| (cell area over
/// distance of the cell centre to the origin); log x ~ N(0, Sigma) with
/// Sigma_ij = exp(-decay * |c_i - c_j|).
struct SpatialPoissonParams {
  Index side = 5;
  double extent = 5.0;
  double decay = 2.0;
};

class SpatialPoissonRestricted {
 public:
  SpatialPoissonRestricted(Vector log_exposure, Vector exposure, const Matrix& prior_block)
      : log_b_(std::move(log_exposure)), b_(std::move(exposure)), chol_(cholesky_lower(prior_block)) {}

  Index size() const noexcept { return static_cast<Index>(b_.size()); }
  Index latent_dim() const noexcept { return size(); }

  /// Latent is log x_A.
  void sample_latent(Rng& rng, Vector& out) const {
    std::normal_distribution<double> normal;
    Vector z(size());
    for (auto& v : z) v = normal(rng);
    out = chol_ * z;
  }

  void sample_observation(const Vector& latent, Rng& rng, Vector& out) const {
    out.resize(size());
    for (Index i = 0; i < size(); ++i) {
      std::poisson_distribution<int> pois(b_(i) * std::exp(latent(i)));
      out(i) = pois(rng);
    }
  }

  double loglik_kernel(const Vector& y, const Vector& latent) const {
    double acc = 0.0;
    for (Index i = 0; i < size(); ++i) acc += y(i) * (log_b_(i) + latent(i)) - b_(i) * std::exp(latent(i));
    return acc;
  }

  double loglik(const Vector& y, const Vector& latent) const {
    double c = 0.0;
    for (Index i = 0; i < size(); ++i) c -= std::lgamma(y(i) + 1);
    return c + loglik_kernel(y, latent);
  }

 private:
  Vector log_b_;
  Vector b_;
  Matrix chol_;
};

class SpatialPoissonModel {
 public:
  struct Bank {
    Matrix log_rate;  ///< n x m, log(b_i x_i^j)
    Matrix rate;      ///< n x m, b_i x_i^j
  };

  explicit SpatialPoissonModel(SpatialPoissonParams params) : p_(params) {
    if (p_.side < 1) throw ConfigError("spatial_poisson needs side >= 1");
    if (!(p_.extent > 0.0)) throw ConfigError("spatial_poisson needs extent > 0");
    if (!(p_.decay > 0.0)) throw ConfigError("spatial_poisson needs decay > 0");
    const Index cells = p_.side * p_.side;
    const double h = p_.extent / static_cast<double>(p_.side);
    centers_.resize(cells, 2);
    exposure_.resize(cells);
    for (Index r = 0; r < p_.side; ++r) {
      for (Index c = 0; c < p_.side; ++c) {
        const Index i = r * p_.side + c;
        centers_(i, 0) = (static_cast<double>(c) + 0.5) * h;
        centers_(i, 1) = (static_cast<double>(r) + 0.5) * h;
        exposure_(i) = h * h / centers_.row(i).norm();
      }
    }
    Matrix cov(cells, cells);
    for (Index i = 0; i < cells; ++i)
      for (Index j = 0; j < cells; ++j) cov(i, j) = std::exp(-p_.decay * (centers_.row(i) - centers_.row(j)).norm());
    prior_cov_ = SymMatrix(std::move(cov));
    Eigen::LLT<Matrix> llt(prior_cov_.matrix());
    if (llt.info() != Eigen::Success) throw ConfigError("spatial_poisson prior covariance is not positive definite");
    prior_chol_ = llt.matrixL();
    log_exposure_ = exposure_.array().log();
  }

  std::string_view name() const noexcept { return "spatial_poisson"; }
  Index n() const noexcept { return static_cast<Index>(exposure_.size()); }
  Index d() const noexcept { return n(); }
  const SpatialPoissonParams& params() const noexcept { return p_; }
  const Vector& exposure() const noexcept { return exposure_; }
  const Matrix& centers() const noexcept { return centers_; }
  const SymMatrix& prior_cov() const noexcept { return prior_cov_; }

  Vector sample_prior(Rng& rng) const {
    std::normal_distribution<double> normal;
    Vector z(n());
    for (auto& v : z) v = normal(rng);
    return (prior_chol_ * z).array().exp();
  }

  Vector sample_observation(const Vector& x, Rng& rng) const {
    check_x(x);
    Vector y(n());
    for (Index i = 0; i < n(); ++i) {
      const double rate = exposure_(i) * x(i);
      if (rate > 0.0) {
        std::poisson_distribution<int> pois(rate);
        y(i) = pois(rng);
      } else {
        y(i) = 0.0;
      }
    }
    return y;
  }

  /// Log Poisson mass of cell i in its continuous (gamma-function) extension.
  double coord_loglik(Index i, double y, double x) const {
    const double rate = exposure_(i) * x;
    return detail::xlogy(y, std::log(rate)) - rate - std::lgamma(y + 1);
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
      acc += coord_loglik(design[p], y_sub(p), x(design[p]));
    }
    return acc;
  }

  /// loglik_relaxed(y + s e_i) - loglik_relaxed(y), with the gamma-function
  /// difference taken as a ratio so small s does not cancel.
  double loglik_relaxed_increment(Index i, double yi, double s, const Vector& x) const {
    return s * std::log(exposure_(i) * x(i)) + std::log(boost::math::tgamma_delta_ratio(yi + 1, s));
  }

  double loglik_relaxed(const Vector& y, const Vector& x) const {
    double acc = 0.0;
    for (Index i = 0; i < n(); ++i) acc += coord_loglik(i, y(i), x(i));
    return acc;
  }

  /// d/dy_i log pi = log(b_i x_i) - Psi(y_i + 1).
  Vector grad_y_loglik(const Vector& y, const Vector& x) const {
    check(y, x);
    Vector g(n());
    for (Index i = 0; i < n(); ++i) g(i) = std::log(exposure_(i) * x(i)) - boost::math::digamma(y(i) + 1);
    return g;
  }

  /// d/dy_i pi = exp(-b_i x_i) (b_i x_i)^y_i (log(b_i x_i) - Psi(y_i + 1)) / y_i! * prod_{j != i} pi_j.
  Vector grad_y_lik(const Vector& y, const Vector& x) const {
    check(y, x);
    Vector coord(n());
    for (Index i = 0; i < n(); ++i) coord(i) = coord_loglik(i, y(i), x(i));
    const double total = coord.sum();
    Vector g(n());
    for (Index i = 0; i < n(); ++i) {
      const double rate = exposure_(i) * x(i);
      const double d_pi_i = std::exp(-rate + detail::xlogy(y(i), std::log(rate)) - std::lgamma(y(i) + 1)) *
                            (std::log(rate) - boost::math::digamma(y(i) + 1));
      g(i) = d_pi_i * std::exp(total - coord(i));
    }
    return g;
  }

  Bank make_bank(const Matrix& prior_bank) const {
    if (prior_bank.cols() != static_cast<Eigen::Index>(d())) throw DomainError("prior bank must have d columns");
    Bank b;
    b.rate = (prior_bank.transpose().array().colwise() * exposure_.array()).matrix();
    b.log_rate = b.rate.array().log().matrix();
    return b;
  }

  Vector bank_score(const Bank& bank, const Vector& y) const {
    detail::check_dims(y, n(), "y");
    const auto m = bank.rate.cols();
    Vector logw(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      double acc = 0.0;
      for (Index i = 0; i < n(); ++i) acc += detail::xlogy(y(i), bank.log_rate(i, j)) - bank.rate(i, j);
      logw(j) = acc;
    }
    detail::softmax_inplace(logw);
    Vector s(n());
    for (Index i = 0; i < n(); ++i) {
      double mean_log_rate = 0.0;
      for (Eigen::Index j = 0; j < m; ++j)
        if (logw(j) > 0.0) mean_log_rate += logw(j) * bank.log_rate(i, j);
      s(i) = mean_log_rate - boost::math::digamma(y(i) + 1);
    }
    return s;
  }

  SpatialPoissonRestricted restrict(const Design& design) const {
    const auto& idx = design.indices();
    return {select_entries(log_exposure_, idx), select_entries(exposure_, idx),
            select_submatrix(prior_cov_, idx, idx)};
  }

 private:
  void check_x(const Vector& x) const {
    detail::check_dims(x, d(), "x");
    for (Index i = 0; i < d(); ++i)
      if (!(x(i) >= 0.0) || !std::isfinite(x(i))) throw DomainError("spatial_poisson intensity must be finite and >= 0");
  }

  void check_count(double y) const {
    if (!std::isfinite(y) || y < 0.0) throw DomainError("spatial_poisson count " + std::to_string(y) + " is negative");
  }

  void check(const Vector& y, const Vector& x) const {
    check_x(x);
    detail::check_dims(y, n(), "y");
    for (Index i = 0; i < n(); ++i) check_count(y(i));
  }

  SpatialPoissonParams p_;
  Matrix centers_;
  Vector exposure_;
  Vector log_exposure_;
  SymMatrix prior_cov_;
  Matrix prior_chol_;
};

}  // namespace oedsel
