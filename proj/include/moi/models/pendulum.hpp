#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "moi/integrator.hpp"
#include "moi/system.hpp"

namespace moi::models {

/// Damped, driven pendulum
///   x1' = x2
///   x2' = -c1 sin(x1) - c2 x2 + c3
/// disturbed by a temporary loss of the restoring torque for
/// `disturbance_duration` seconds, starting from the stable equilibrium.
/// The model parameter p is the driving torque c3.
struct PendulumParams {
  double c1 = 2.0;
  double c2 = 0.5;
  double c3 = 1.5;
  double disturbance_duration = 0.8;

  enum class DisturbanceMode { ClosedForm, Trapezoidal };
  DisturbanceMode disturbance = DisturbanceMode::ClosedForm;
  double disturbance_step = 0.02;  // only used by DisturbanceMode::Trapezoidal

  void validate() const {
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw ParamOutOfRange("pendulum requires c1, c2 > 0");
    if (disturbance_duration < 0.0) throw ParamOutOfRange("disturbance duration must be >= 0");
    check_torque(c3);
  }

  void check_torque(double torque) const {
    if (!(torque > 0.0) || !(torque / c1 < 1.0)) {
      throw ParamOutOfRange("pendulum requires 0 < c3 < c1, got c3 = " + std::to_string(torque));
    }
  }

  double sep_angle(double torque) const { return std::asin(torque / c1); }
  double saddle_angle(double torque) const { return std::numbers::pi - std::asin(torque / c1); }
};

/// Jacobian [[0, 1], [-c1 cos(x1), -c2]].
inline Matrix pendulum_jacobian(const PendulumParams& params, const Vector& x) {
  Matrix jac(2, 2);
  jac << 0.0, 1.0, -params.c1 * std::cos(x[0]), -params.c2;
  return jac;
}

/// Closed form of the unstable eigenpair of the Jacobian at the saddle
/// (pi - asin(c3/c1), 0): lambda^2 + c2 lambda - c1 cos(x1u) = 0, eigenvector
/// (1, lambda) normalized with positive first component.
inline std::pair<double, Vector> pendulum_saddle_mode(const PendulumParams& params, double torque) {
  const double k = params.c1 * std::sqrt(1.0 - (torque / params.c1) * (torque / params.c1));
  const double lambda = 0.5 * (-params.c2 + std::sqrt(params.c2 * params.c2 + 4.0 * k));
  Vector v(2);
  v << 1.0, lambda;
  return {lambda, v.normalized()};
}

/// Post-disturbance state: z1' = z2, z2' = -c2 z2 + c3 from (asin(c3/c1), 0)
/// for disturbance_duration seconds, in closed form
///   z2(t) = (c3/c2)(1 - e^{-c2 t})
///   z1(t) = x1s + (c3/c2) t - (c3/c2^2)(1 - e^{-c2 t})
/// or by trapezoidal integration, per `params.disturbance`.
inline Vector pendulum_disturbance_ic(const PendulumParams& params, double torque) {
  params.check_torque(torque);
  const double t = params.disturbance_duration;
  const double c2 = params.c2;
  Vector z(2);
  z << params.sep_angle(torque), 0.0;
  if (params.disturbance == PendulumParams::DisturbanceMode::ClosedForm) {
    const double decay = 1.0 - std::exp(-c2 * t);
    const double rate = torque / c2;
    z[0] += rate * t - rate / c2 * decay;
    z[1] = rate * decay;
    return z;
  }
  ParameterizedSystem faulted;
  faulted.name = "pendulum-disturbance";
  faulted.state_dim = 2;
  faulted.param_dim = 1;
  faulted.field = [c2](const Vector& x, const Vector& p) {
    Vector dx(2);
    dx << x[1], -c2 * x[1] + p[0];
    return dx;
  };
  faulted.jacobian = [c2](const Vector&, const Vector&) {
    Matrix jac(2, 2);
    jac << 0.0, 1.0, 0.0, -c2;
    return jac;
  };
  IntegratorConfig cfg;
  cfg.step = params.disturbance_step;
  cfg.newton_tol = 1e-15;
  return integrate_for(faulted, z, Vector::Constant(1, torque), cfg, t);
}

/// The pendulum as a ParameterizedSystem over p = (c3). The state counts as
/// escaped once the angle has passed a saddle while moving away from the
/// stable equilibrium, after which it cannot return to it.
inline ParameterizedSystem pendulum_system(const PendulumParams& params) {
  params.validate();
  ParameterizedSystem sys;
  sys.name = "pendulum";
  sys.state_dim = 2;
  sys.param_dim = 1;
  sys.state_names = {"x1", "x2"};
  sys.angle_coordinates = {0};
  sys.field = [params](const Vector& x, const Vector& p) {
    params.check_torque(p[0]);
    Vector dx(2);
    dx << x[1], -params.c1 * std::sin(x[0]) - params.c2 * x[1] + p[0];
    return dx;
  };
  sys.jacobian = [params](const Vector& x, const Vector&) { return pendulum_jacobian(params, x); };
  sys.initial_condition = [params](const Vector& p) {
    return pendulum_disturbance_ic(params, p[0]);
  };
  sys.equilibrium_guess = [params](const Vector& p) {
    params.check_torque(p[0]);
    Vector x(2);
    x << params.sep_angle(p[0]), 0.0;
    return x;
  };
  sys.escaped = [params](const Vector& x, const Vector& p) {
    const double right = params.saddle_angle(p[0]);
    const double left = right - 2.0 * std::numbers::pi;
    return (x[0] > right && x[1] >= 0.0) || (x[0] < left && x[1] <= 0.0);
  };
  return sys;
}

}  // namespace moi::models
