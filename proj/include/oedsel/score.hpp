#pragma once

// Monte Carlo estimate of the posterior score grad_y log pi(x|y) and of
// F = E[grad_y log pi(x|y) grad_y log pi(x|y)^T].
//
// grad_y log pi(x|y) = grad_y log pi(y|x) - grad_y log pi_Y(y), where the
// marginal score is estimated from a prior bank {x^j} as a mixture:
//   grad log pi_Y(y) ~ sum_j w_j grad_y log pi(y|x^j),  w = softmax_j log pi(y|x^j).
// This is the ratio sum_j grad pi(y|x^j) / sum_j pi(y|x^j) rewritten so that
// it never leaves the log domain.

#include <cmath>
#include <cstdint>
#include <limits>

#include "oedsel/models/model.hpp"
#include "oedsel/numerics.hpp"

namespace oedsel {

struct ScoreMatrix {
  SymMatrix f;
  Index joint_samples = 0;
  Index bank_samples = 0;
};

/// Mixture score over the bank, softmax form, using only the model's
/// loglik and grad_y_loglik.
template <ObservationModel Model>
Vector mixture_score_softmax(const Model& model, const Vector& y, const Matrix& prior_bank) {
  const auto m = prior_bank.rows();
  Vector logw(m);
  for (Eigen::Index j = 0; j < m; ++j) logw(j) = model.loglik(y, prior_bank.row(j).transpose());
  detail::softmax_inplace(logw);
  Vector s = Vector::Zero(model.n());
  for (Eigen::Index j = 0; j < m; ++j)
    if (logw(j) > 0.0) s += logw(j) * model.grad_y_loglik(y, prior_bank.row(j).transpose());
  return s;
}

/// Mixture score in the literal ratio form sum_j grad pi(y|x^j) / sum_j pi(y|x^j).
/// Underflows for sharply peaked likelihoods; kept as a cross-check.
template <ObservationModel Model>
Vector mixture_score_ratio(const Model& model, const Vector& y, const Matrix& prior_bank) {
  double density = 0.0;
  Vector grad = Vector::Zero(model.n());
  for (Eigen::Index j = 0; j < prior_bank.rows(); ++j) {
    const Vector xj = prior_bank.row(j).transpose();
    density += std::exp(model.loglik(y, xj));
    grad += model.grad_y_lik(y, xj);
  }
  if (!(density > 0.0)) throw DegenerateMixtureError("mixture density underflowed to zero");
  return grad / density;
}

/// Estimated grad_y log pi(x|y) using a prepared bank.
template <ObservationModel Model, typename Bank>
Vector grad_log_posterior_hat(const Model& model, const Vector& x, const Vector& y, const Bank& bank) {
  return model.grad_y_loglik(y, x) - model.bank_score(bank, y);
}

template <ObservationModel Model>
Vector grad_log_posterior_hat(const Model& model, const Vector& x, const Vector& y, const Matrix& prior_bank) {
  if (prior_bank.rows() < 1) throw ConfigError("score estimation needs a prior bank of size m >= 1");
  return grad_log_posterior_hat(model, x, y, model.make_bank(prior_bank));
}

/// Second moment (1/M) sum_i v_i v_i^T of the rows of `scores` (M x n).
inline ScoreMatrix score_outer_mean(const Matrix& scores, Index bank_samples = 0) {
  if (scores.rows() < 1) throw InsufficientSamplesError("score matrix needs at least one sample");
  Matrix f = (scores.transpose() * scores) / static_cast<double>(scores.rows());
  return {SymMatrix(std::move(f)), static_cast<Index>(scores.rows()), bank_samples};
}

/// F = (1/M) sum_i F^i F^i^T with F^i the estimated posterior score at the
/// i-th joint sample. The same prior bank is reused for every sample.
template <ObservationModel Model>
ScoreMatrix build_score_matrix(const Model& model, const JointSampleSet& samples, OpCounters* ops = nullptr) {
  const Index count = samples.size();
  const Index m = samples.bank_size();
  if (count < 1) throw InsufficientSamplesError("score matrix needs at least one joint sample");
  if (m < 1) throw ConfigError("score estimation needs a prior bank of size m >= 1");
  const auto bank = model.make_bank(samples.prior_bank);
  Matrix scores(count, model.n());
  for (Index i = 0; i < count; ++i) {
    const Vector x = samples.x.row(i).transpose();
    const Vector y = samples.y.row(i).transpose();
    try {
      scores.row(i) = grad_log_posterior_hat(model, x, y, bank).transpose();
    } catch (const DegenerateMixtureError& e) {
      throw DegenerateMixtureError(std::string(e.what()) + " (joint sample " + std::to_string(i) + ")",
                                   static_cast<std::int64_t>(i));
    }
  }
  if (ops) {
    // One own-likelihood gradient per sample plus a likelihood and gradient per bank component.
    ops->model_evals += count * (1 + 2 * m);
    const std::uint64_t nn = model.n();
    ops->mults += static_cast<std::uint64_t>(count) * nn * (nn + 1) / 2;
  }
  return score_outer_mean(scores, m);
}

}  // namespace oedsel
