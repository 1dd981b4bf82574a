#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

#include "oedsel/models/model.hpp"

namespace oedsel {

/// Kernel settings for the default linear-Gaussian construction. A zero
/// lengthscale means "use the default" (1/d, 1/n and 1/max(n, d)).
struct LinearGaussianKernels {
  Index n = 50;
  Index d = 50;
  double prior_amplitude = 1.0;
  double prior_lengthscale = 0.0;
  double noise_amplitude = 0.01;
  double noise_lengthscale = 0.0;
  double forward_lengthscale = 0.0;
};

/// Y = G X + eps, X ~ N(0, prior_cov), eps ~ N(0, noise_cov). G is n x d.
struct LinearGaussianParams {
  Matrix forward;
  SymMatrix prior_cov;
  SymMatrix noise_cov;

  /// Exponential-kernel construction: prior and noise covariances use
  /// a*exp(-|z_i - z_j|/l) on unit grids, and G_ij = exp(-|u_i - v_j|/l_G)
  /// with u an n-grid and v a d-grid on [0, 1].
  static LinearGaussianParams from_kernels(const LinearGaussianKernels& k) {
    if (k.n < 1 || k.d < 1) throw ConfigError("linear_gaussian needs n >= 1 and d >= 1");
    const double lx = k.prior_lengthscale > 0 ? k.prior_lengthscale : 1.0 / static_cast<double>(k.d);
    const double le = k.noise_lengthscale > 0 ? k.noise_lengthscale : 1.0 / static_cast<double>(k.n);
    const double lg = k.forward_lengthscale > 0 ? k.forward_lengthscale
                                                : 1.0 / static_cast<double>(std::max(k.n, k.d));
    const Vector zx = unit_grid(k.d);
    const Vector zy = unit_grid(k.n);
    return {exponential_kernel(zy, zx, 1.0, lg), SymMatrix(exponential_kernel(zx, zx, k.prior_amplitude, lx)),
            SymMatrix(exponential_kernel(zy, zy, k.noise_amplitude, le))};
  }
};

/// Closed-form second moments of the linear-Gaussian model.
struct LinearGaussianExact {
  SymMatrix marginal_cov;   ///< Sigma_Y = G Sigma_X G^T + Sigma_eps
  SymMatrix posterior_cov;  ///< Sigma_{X|Y} = (Sigma_X^{-1} + G^T Sigma_eps^{-1} G)^{-1}
  SymMatrix score_matrix;   ///< E[grad_y log pi(x|y) grad_y log pi(x|y)^T] = Sigma_eps^{-1} - Sigma_Y^{-1}
};

class LinearGaussianRestricted {
 public:
  LinearGaussianRestricted(const Matrix& forward_rows, const Matrix& noise_block, const Matrix& prior_chol)
      : forward_(forward_rows), prior_chol_(prior_chol), noise_chol_(cholesky_lower(noise_block)) {
    log_norm_ = -0.5 * static_cast<double>(forward_.rows()) * std::log(2.0 * std::numbers::pi) -
                noise_chol_.diagonal().array().log().sum();
  }

  Index size() const noexcept { return static_cast<Index>(forward_.rows()); }
  Index latent_dim() const noexcept { return static_cast<Index>(forward_.cols()); }

  void sample_latent(Rng& rng, Vector& out) const {
    std::normal_distribution<double> normal;
    Vector z(latent_dim());
    for (auto& v : z) v = normal(rng);
    out = prior_chol_ * z;
  }

  void sample_observation(const Vector& latent, Rng& rng, Vector& out) const {
    std::normal_distribution<double> normal;
    Vector z(size());
    for (auto& v : z) v = normal(rng);
    out = forward_ * latent + noise_chol_ * z;
  }

  double loglik_kernel(const Vector& y, const Vector& latent) const {
    Vector r = y - forward_ * latent;
    noise_chol_.triangularView<Eigen::Lower>().solveInPlace(r);
    return -0.5 * r.squaredNorm();
  }

  double loglik(const Vector& y, const Vector& latent) const { return log_norm_ + loglik_kernel(y, latent); }

 private:
  Matrix forward_;
  Matrix prior_chol_;
  Matrix noise_chol_;
  double log_norm_ = 0.0;
};

class LinearGaussianModel {
 public:
  /// Precomputed bank: whitened means L^{-1} G x^j and raw means G x^j (columns).
  struct Bank {
    Matrix whitened;
    Matrix means;
    Vector half_sq_norms;  ///< 0.5 * |whitened column|^2
  };

  explicit LinearGaussianModel(LinearGaussianParams params) : p_(std::move(params)) {
    const auto n = p_.forward.rows();
    const auto d = p_.forward.cols();
    if (n < 1 || d < 1) throw ConfigError("linear_gaussian needs n >= 1 and d >= 1");
    if (p_.prior_cov.dim() != static_cast<Index>(d)) throw ConfigError("prior covariance must be d x d");
    if (p_.noise_cov.dim() != static_cast<Index>(n)) throw ConfigError("noise covariance must be n x n");
    Eigen::LLT<Matrix> px(p_.prior_cov.matrix());
    Eigen::LLT<Matrix> pe(p_.noise_cov.matrix());
    if (px.info() != Eigen::Success) throw ConfigError("prior covariance is not positive definite");
    if (pe.info() != Eigen::Success) throw ConfigError("noise covariance is not positive definite");
    prior_chol_ = px.matrixL();
    noise_chol_ = pe.matrixL();
    log_norm_ = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) -
                noise_chol_.diagonal().array().log().sum();
  }

  std::string_view name() const noexcept { return "linear_gaussian"; }
  Index n() const noexcept { return static_cast<Index>(p_.forward.rows()); }
  Index d() const noexcept { return static_cast<Index>(p_.forward.cols()); }
  const LinearGaussianParams& params() const noexcept { return p_; }

  Vector sample_prior(Rng& rng) const { return prior_chol_ * standard_normal(d(), rng); }

  Vector sample_observation(const Vector& x, Rng& rng) const {
    detail::check_dims(x, d(), "x");
    return p_.forward * x + noise_chol_ * standard_normal(n(), rng);
  }

  double loglik(const Vector& y, const Vector& x) const {
    check(y, x);
    return log_norm_ - 0.5 * whitened_residual(y, x).squaredNorm();
  }

  /// Log density of y_A (ordered like `design`) under the marginal N(G_A x, Sigma_eps[A,A]).
  double loglik(const Vector& y_sub, const Vector& x, const Design& design) const {
    detail::check_dims(x, d(), "x");
    detail::check_dims(y_sub, design.size(), "y restricted to design");
    if (design.empty()) return 0.0;
    return restrict(design).loglik(y_sub, x);
  }

  double loglik_relaxed(const Vector& y, const Vector& x) const { return loglik(y, x); }

  Vector grad_y_loglik(const Vector& y, const Vector& x) const {
    check(y, x);
    Vector z = whitened_residual(y, x);
    noise_chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
    return -z;
  }

  Vector grad_y_lik(const Vector& y, const Vector& x) const { return std::exp(loglik(y, x)) * grad_y_loglik(y, x); }

  Bank make_bank(const Matrix& prior_bank) const {
    if (prior_bank.cols() != static_cast<Eigen::Index>(d())) throw DomainError("prior bank must have d columns");
    Bank b;
    b.means = p_.forward * prior_bank.transpose();
    b.whitened = noise_chol_.triangularView<Eigen::Lower>().solve(b.means);
    b.half_sq_norms = 0.5 * b.whitened.colwise().squaredNorm().transpose();
    return b;
  }

  /// Mixture estimate of grad log pi_Y(y) over the bank.
  Vector bank_score(const Bank& bank, const Vector& y) const {
    detail::check_dims(y, n(), "y");
    Vector zy = noise_chol_.triangularView<Eigen::Lower>().solve(y);
    // -0.5 |w_j - z|^2 up to the j-independent term -0.5 |z|^2.
    Vector logw = bank.whitened.transpose() * zy - bank.half_sq_norms;
    detail::softmax_inplace(logw);
    Vector r = y - bank.means * logw;
    noise_chol_.triangularView<Eigen::Lower>().solveInPlace(r);
    noise_chol_.transpose().triangularView<Eigen::Upper>().solveInPlace(r);
    return -r;
  }

  LinearGaussianRestricted restrict(const Design& design) const {
    const auto& idx = design.indices();
    Matrix rows(idx.size(), d());
    for (Index p = 0; p < idx.size(); ++p) rows.row(p) = p_.forward.row(idx[p]);
    return {rows, select_submatrix(p_.noise_cov, idx, idx), prior_chol_};
  }

  LinearGaussianExact exact_posterior_quantities() const {
    const Matrix& g = p_.forward;
    SymMatrix sigma_y(g * p_.prior_cov.matrix() * g.transpose() + p_.noise_cov.matrix());
    SymMatrix noise_inv = spd_inverse(p_.noise_cov);
    SymMatrix precision(spd_inverse(p_.prior_cov).matrix() + g.transpose() * noise_inv.matrix() * g);
    SymMatrix posterior = spd_inverse(precision);
    SymMatrix score(noise_inv.matrix() - spd_inverse(sigma_y).matrix());
    return {std::move(sigma_y), std::move(posterior), std::move(score)};
  }

 private:
  static Vector standard_normal(Index dim, Rng& rng) {
    std::normal_distribution<double> normal;
    Vector z(dim);
    for (auto& v : z) v = normal(rng);
    return z;
  }

  void check(const Vector& y, const Vector& x) const {
    detail::check_dims(y, n(), "y");
    detail::check_dims(x, d(), "x");
    if (!y.allFinite() || !x.allFinite()) throw DomainError("linear_gaussian needs finite y and x");
  }

  Vector whitened_residual(const Vector& y, const Vector& x) const {
    Vector r = y - p_.forward * x;
    noise_chol_.triangularView<Eigen::Lower>().solveInPlace(r);
    return r;
  }

  LinearGaussianParams p_;
  Matrix prior_chol_;
  Matrix noise_chol_;
  double log_norm_ = 0.0;
};

/// Closed-form quantities; any other model type raises UnsupportedModelError.
inline LinearGaussianExact exact_posterior_quantities(const LinearGaussianModel& m) {
  return m.exact_posterior_quantities();
}

template <typename Model>
LinearGaussianExact exact_posterior_quantities(const Model& m) {
  throw UnsupportedModelError(std::string("closed-form posterior quantities need a linear_gaussian model, got ") +
                              std::string(m.name()));
}

}  // namespace oedsel
