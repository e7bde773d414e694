#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "moi/spectral.hpp"
#include "moi/system.hpp"

namespace moi {

/// Fixed-step implicit trapezoidal integration settings.
struct IntegratorConfig {
  double step = 0.02;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  double max_time = 200.0;
  double sep_tol = 1e-6;
  int sep_dwell = 10;
  double divergence_norm = 1e6;
  DistanceMode distance = DistanceMode::Euclidean;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidConfig("step must be positive");
    if (!(newton_tol > 0.0)) throw InvalidConfig("newton_tol must be positive");
    if (newton_max_iter < 1) throw InvalidConfig("newton_max_iter must be at least 1");
    if (!(max_time > 0.0)) throw InvalidConfig("max_time must be positive");
    if (!(sep_tol > 0.0)) throw InvalidConfig("sep_tol must be positive");
    if (sep_dwell < 1) throw InvalidConfig("sep_dwell must be at least 1");
    if (!(divergence_norm > 0.0)) throw InvalidConfig("divergence_norm must be positive");
  }
};

enum class Termination { ConvergedToSEP, MaxTimeReached, Diverged, SolverFailure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ConvergedToSEP: return "ConvergedToSEP";
    case Termination::MaxTimeReached: return "MaxTimeReached";
    case Termination::Diverged: return "Diverged";
    case Termination::SolverFailure: return "SolverFailure";
  }
  return "?";
}

/// States x_0..x_N at uniform spacing `step`, starting from x0(parameter).
struct Trajectory {
  std::vector<Vector> states;
  double step = 0.0;
  Vector parameter;
  std::vector<bool> instability_flags;
  Termination termination = Termination::MaxTimeReached;
  std::string failure;  // error text when termination == SolverFailure

  std::size_t size() const { return states.size(); }
  double duration() const { return states.empty() ? 0.0 : step * double(states.size() - 1); }
};

namespace detail {

// The residual of a step cannot be driven below rounding of its terms, so the
// tolerance is floored there.
inline double residual_floor(const Vector& x, const Vector& y, const Vector& fx, double h) {
  const double scale = std::max({1.0, x.norm(), y.norm(), h * fx.norm()});
  return 16.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace detail

/// One implicit trapezoidal step of length `h`:
///   x+ = x + (h/2) (f(x, p) + f(x+, p)),
/// solved by Newton from the forward-Euler predictor with iteration matrix
/// I - (h/2) df/dx(x+).
inline Vector step_trapezoidal(const ParameterizedSystem& sys, const Vector& x, const Vector& p,
                               const IntegratorConfig& cfg, double h) {
  const Vector fx = eval_field(sys, x, p);
  Vector y = x + h * fx;
  const Index n = sys.state_dim;
  const Matrix identity = Matrix::Identity(n, n);
  double res_norm = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= cfg.newton_max_iter; ++iter) {
    const Vector fy = eval_field(sys, y, p);
    const Vector residual = y - x - 0.5 * h * (fx + fy);
    res_norm = residual.norm();
    if (res_norm <= std::max(cfg.newton_tol, detail::residual_floor(x, y, fx, h))) {
      return y;
    }
    if (iter == cfg.newton_max_iter) break;
    const Matrix iteration = identity - 0.5 * h * eval_jacobian(sys, y, p);
    y -= iteration.partialPivLu().solve(residual);
    if (!detail::all_finite(y)) {
      throw NonFiniteOutput(sys.name + ": Newton iterate became non-finite");
    }
  }
  throw NewtonDivergence("trapezoidal step residual " + std::to_string(res_norm) +
                         " after " + std::to_string(cfg.newton_max_iter) + " iterations");
}

inline Vector step_trapezoidal(const ParameterizedSystem& sys, const Vector& x, const Vector& p,
                               const IntegratorConfig& cfg) {
  return step_trapezoidal(sys, x, p, cfg, cfg.step);
}

/// Integrates over [0, duration] from x with steps of cfg.step; a final
/// shorter step covers any remainder.
inline Vector integrate_for(const ParameterizedSystem& sys, Vector x, const Vector& p,
                            const IntegratorConfig& cfg, double duration) {
  if (duration <= 0.0) return x;
  const double ratio = duration / cfg.step;
  const auto full = static_cast<long>(std::floor(ratio + 1e-9));
  for (long i = 0; i < full; ++i) x = step_trapezoidal(sys, x, p, cfg, cfg.step);
  const double rest = duration - double(full) * cfg.step;
  if (rest > 1e-12 * cfg.step) x = step_trapezoidal(sys, x, p, cfg, rest);
  return x;
}

/// Simulates from x0(p) until the state stays within cfg.sep_tol of `sep` for
/// cfg.sep_dwell consecutive steps, the horizon is reached, the state escapes
/// (norm above cfg.divergence_norm or the system's escape test fires), or a
/// step fails. With `record_flags`, each state's Jacobian is classified with
/// is_unstable(., stability_tol).
inline Trajectory simulate(const ParameterizedSystem& sys, const Vector& p,
                           const IntegratorConfig& cfg, const Vector& sep, bool record_flags,
                           double stability_tol = kDefaultStabilityTol) {
  cfg.validate();
  Trajectory traj;
  traj.step = cfg.step;
  traj.parameter = p;

  const auto max_steps = static_cast<long>(std::ceil(cfg.max_time / cfg.step - 1e-9));
  auto record = [&](const Vector& x) {
    traj.states.push_back(x);
    if (record_flags) {
      traj.instability_flags.push_back(is_unstable(eval_jacobian(sys, x, p), stability_tol));
    }
  };

  Vector x = sys.initial_condition(p);
  if (x.size() != sys.state_dim) throw DimensionMismatch(sys.name + ": bad initial condition");
  record(x);

  int dwell = 0;
  for (long n = 1; n <= max_steps; ++n) {
    try {
      x = step_trapezoidal(sys, x, p, cfg);
    } catch (const NewtonDivergence& e) {
      traj.termination = Termination::SolverFailure;
      traj.failure = e.what();
      return traj;
    } catch (const NonFiniteOutput& e) {
      traj.termination = Termination::SolverFailure;
      traj.failure = e.what();
      return traj;
    }
    record(x);

    if (x.norm() > cfg.divergence_norm || (sys.escaped && sys.escaped(x, p))) {
      traj.termination = Termination::Diverged;
      return traj;
    }
    if (state_distance(sys, x, sep, cfg.distance) < cfg.sep_tol) {
      if (++dwell >= cfg.sep_dwell) {
        traj.termination = Termination::ConvergedToSEP;
        return traj;
      }
    } else {
      dwell = 0;
    }
  }
  traj.termination = Termination::MaxTimeReached;
  return traj;
}

}  // namespace moi
