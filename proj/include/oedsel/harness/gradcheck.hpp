#pragma once

// Analytic vs finite-difference gradient comparison.

#include <cmath>
#include <cstdint>

#include "oedsel/models.hpp"

namespace oedsel {

/// Step used for coordinate i: 1e-5 * (1 + |y_i|).
inline double fd_step(double yi) { return 1e-5 * (1.0 + std::abs(yi)); }

/// Fourth-order central difference of the relaxed log-likelihood in y_i.
/// Models that expose an increment in y_i are differenced through it.
template <ObservationModel Model>
double fd_grad_component(const Model& model, Vector y, const Vector& x, Index i) {
  const double h = fd_step(y(i));
  const double y0 = y(i);
  auto f = [&](double shift) {
    if constexpr (requires { model.loglik_relaxed_increment(i, y0, shift, x); }) {
      return model.loglik_relaxed_increment(i, y0, shift, x);
    } else {
      y(i) = y0 + shift;
      return model.loglik_relaxed(y, x);
    }
  };
  const double v = (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
  return v;
}

struct GradientCheckReport {
  Index points = 0;
  Index compared = 0;          ///< coordinates with |gradient| above the floor
  double max_rel_error = 0.0;
  Index worst_point = 0;
  Index worst_coordinate = 0;
  double tolerance = 1e-5;
  bool passed() const noexcept { return max_rel_error < tolerance; }
};

struct GradientCheckOptions {
  Index points = 200;
  std::uint64_t seed = 0;
  double tolerance = 1e-5;
  double floor = 1e-8;
  /// Debug fault: scale the analytic gradient by (1 + inject_fault).
  double inject_fault = 0.0;
};

template <ObservationModel Model>
GradientCheckReport check_gradients(const Model& model, const GradientCheckOptions& opt) {
  if (opt.points < 2) throw ConfigError("gradient check needs at least 2 points");
  const JointSampleSet s = sample_joint(model, opt.points, 1, derive_seed(opt.seed, "gradcheck"));
  GradientCheckReport rep;
  rep.points = opt.points;
  rep.tolerance = opt.tolerance;
  for (Index p = 0; p < opt.points; ++p) {
    const Vector x = s.x.row(p).transpose();
    const Vector y = s.y.row(p).transpose();
    const Vector g = model.grad_y_loglik(y, x) * (1.0 + opt.inject_fault);
    for (Index i = 0; i < model.n(); ++i) {
      if (!(std::abs(g(i)) > opt.floor)) continue;
      ++rep.compared;
      const double err = std::abs(g(i) - fd_grad_component(model, y, x, i)) / std::abs(g(i));
      if (!(err <= rep.max_rel_error)) {
        rep.max_rel_error = err;
        rep.worst_point = p;
        rep.worst_coordinate = i;
      }
    }
  }
  return rep;
}

inline GradientCheckReport check_gradients(const AnyModel& model, const GradientCheckOptions& opt) {
  return std::visit([&](const auto& m) { return check_gradients(m, opt); }, model);
}

}  // namespace oedsel
