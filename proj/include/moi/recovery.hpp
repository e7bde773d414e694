#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "moi/integrator.hpp"
#include "moi/spectral.hpp"
#include "moi/system.hpp"

namespace moi {

enum class Verdict { Recovers, FailsToRecover, Undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Recovers: return "Recovers";
    case Verdict::FailsToRecover: return "FailsToRecover";
    case Verdict::Undetermined: return "Undetermined";
  }
  return "?";
}

struct RecoveryVerdict {
  Verdict verdict = Verdict::Undetermined;
  Termination termination = Termination::MaxTimeReached;
  double final_distance = 0.0;
  double elapsed = 0.0;
};

inline Verdict verdict_for(Termination t) {
  switch (t) {
    case Termination::ConvergedToSEP: return Verdict::Recovers;
    case Termination::Diverged: return Verdict::FailsToRecover;
    case Termination::MaxTimeReached:
    case Termination::SolverFailure: return Verdict::Undetermined;
  }
  return Verdict::Undetermined;
}

namespace detail {

inline std::string format_vector(const Vector& v) {
  std::string s = "(";
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s + ")";
}

}  // namespace detail

/// Newton solve of f(x, p) = 0 from `guess`. Steps are minimum-norm solutions,
/// so a rank-deficient Jacobian (invariant directions) is handled. The result
/// must have ||f|| <= tol and a strictly stable Jacobian (modulo invariant
/// directions), otherwise NotStable is raised.
inline Vector find_sep(const ParameterizedSystem& sys, const Vector& p, const Vector& guess,
                       double tol = 1e-12, double stability_tol = kDefaultStabilityTol,
                       int max_iter = 100) {
  // ||f|| cannot go below the rounding level of J x.
  auto residual_floor = [&](const Vector& at) {
    return 16.0 * std::numeric_limits<double>::epsilon() *
           std::max(1.0, eval_jacobian(sys, at, p).norm() * std::max(1.0, at.norm()));
  };
  Vector x = guess;
  Vector fx = eval_field(sys, x, p);
  double res = fx.norm();
  for (int iter = 0; iter < max_iter && res > std::max(tol, residual_floor(x)); ++iter) {
    x -= eval_jacobian(sys, x, p).completeOrthogonalDecomposition().solve(fx);
    fx = eval_field(sys, x, p);
    res = fx.norm();
  }
  if (!(res <= std::max(tol, residual_floor(x)))) {
    throw NewtonDivergence(sys.name + ": equilibrium residual " + std::to_string(res) +
                           " from guess " + detail::format_vector(guess));
  }
  const double abscissa = spectral_abscissa(reduced_jacobian(sys, eval_jacobian(sys, x, p)));
  if (!(abscissa < -stability_tol)) {
    throw NotStable(sys.name + ": equilibrium " + detail::format_vector(x) +
                    " has spectral abscissa " + std::to_string(abscissa));
  }
  return x;
}

/// Runs the disturbed trajectory at p and maps its termination to a verdict.
inline RecoveryVerdict classify_recovery(const ParameterizedSystem& sys, const Vector& p,
                                         const IntegratorConfig& cfg, const Vector& sep) {
  const Trajectory traj = simulate(sys, p, cfg, sep, /*record_flags=*/false);
  RecoveryVerdict out;
  out.termination = traj.termination;
  out.verdict = verdict_for(traj.termination);
  out.final_distance = state_distance(sys, traj.states.back(), sep, cfg.distance);
  out.elapsed = traj.duration();
  return out;
}

/// Fixed point of the trapezoidal map x -> T(x) at step h, by Newton on
/// T(x) - x with the exact map derivative
///   T'(x) = (I - h/2 J(T(x)))^-1 (I + h/2 J(x)).
/// Unlike find_sep no stability requirement is imposed, so saddles are found.
inline Vector find_map_equilibrium(const ParameterizedSystem& sys, const Vector& p,
                                   const IntegratorConfig& cfg, const Vector& guess,
                                   double tol = 1e-13, int max_iter = 100) {
  const Index n = sys.state_dim;
  const Matrix identity = Matrix::Identity(n, n);
  const double h = cfg.step;
  Vector x = guess;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vector tx = step_trapezoidal(sys, x, p, cfg);
    const Vector g = tx - x;
    if (g.norm() <= tol) return x;
    const Matrix lhs = identity - 0.5 * h * eval_jacobian(sys, tx, p);
    const Matrix rhs = identity + 0.5 * h * eval_jacobian(sys, x, p);
    const Matrix map_derivative = lhs.partialPivLu().solve(rhs);
    x -= (map_derivative - identity).completeOrthogonalDecomposition().solve(g);
  }
  const Vector g = step_trapezoidal(sys, x, p, cfg) - x;
  if (g.norm() <= std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() *
                                    std::max(1.0, x.norm()))) {
    return x;
  }
  throw NewtonDivergence(sys.name + ": map fixed point residual " + std::to_string(g.norm()));
}

struct SearchOptions {
  double param_tol = 1e-4;
  double initial_step = 0.1;
  int max_expansions = 20;
  double sep_tol = 1e-12;
  double stability_tol = kDefaultStabilityTol;
};

struct SearchProbe {
  Vector parameter;
  Verdict verdict;
  bool bisection = false;  // false for the classification of p0 and expansion probes
};

struct BoundarySearchResult {
  Vector p_star;        // last parameter classified Recovers
  Vector p_fail;        // paired parameter classified FailsToRecover
  Vector direction;     // unit search direction
  Vector sep;           // stable equilibrium at p_star
  double bracket_width = 0.0;
  int iterations = 0;   // bisection iterations
  std::vector<SearchProbe> history;
};

/// Bracketing search along p0 + s * direction for the first loss of recovery.
/// Expansion probes s = initial_step * 2^k until one fails to recover; then
/// bisection until the bracket is at most param_tol wide. The stable
/// equilibrium is re-solved at every probe, seeded from the last in-region one.
inline BoundarySearchResult ray_boundary_search(const ParameterizedSystem& sys, const Vector& p0,
                                                const Vector& direction,
                                                const IntegratorConfig& cfg,
                                                const SearchOptions& opts,
                                                const Vector& sep_guess) {
  cfg.validate();
  if (direction.size() != sys.param_dim) {
    throw DimensionMismatch("search direction has dimension " + std::to_string(direction.size()));
  }
  if (!(direction.norm() > 0.0)) throw InvalidConfig("search direction must be non-zero");
  if (!(opts.param_tol > 0.0) || !(opts.initial_step > 0.0) || opts.max_expansions < 1) {
    throw InvalidConfig("search tolerances must be positive");
  }
  const Vector dir = direction.normalized();

  BoundarySearchResult result;
  result.direction = dir;

  auto classify = [&](const Vector& p, const Vector& seed, Vector& sep_out) {
    sep_out = find_sep(sys, p, seed, opts.sep_tol, opts.stability_tol);
    return classify_recovery(sys, p, cfg, sep_out).verdict;
  };

  Vector sep_lo;
  const Verdict v0 = classify(p0, sep_guess, sep_lo);
  result.history.push_back({p0, v0, false});
  if (v0 != Verdict::Recovers) {
    throw NotRecovered("starting parameter " + detail::format_vector(p0) + " classified " +
                       to_string(v0));
  }

  double s_lo = 0.0;
  double s_hi = -1.0;
  for (int k = 0; k < opts.max_expansions; ++k) {
    const double s = opts.initial_step * std::ldexp(1.0, k);
    const Vector p = p0 + s * dir;
    Vector sep;
    Verdict v;
    try {
      v = classify(p, sep_lo, sep);
    } catch (const ParamOutOfRange& e) {
      throw NoBracket("left the parameter domain at " + detail::format_vector(p) +
                      " without a crossing (" + e.what() + ")");
    }
    result.history.push_back({p, v, false});
    if (v == Verdict::Undetermined) {
      throw UndeterminedAtBisection("expansion probe " + detail::format_vector(p) +
                                    " is undetermined; consider raising max_time");
    }
    if (v == Verdict::FailsToRecover) {
      s_hi = s;
      break;
    }
    s_lo = s;
    sep_lo = sep;
  }
  if (s_hi < 0.0) {
    throw NoBracket("no failure to recover within " + std::to_string(opts.max_expansions) +
                    " expansions from " + detail::format_vector(p0));
  }

  while (s_hi - s_lo > opts.param_tol) {
    const double s = 0.5 * (s_lo + s_hi);
    if (s <= s_lo || s >= s_hi) break;  // bracket below floating-point resolution
    const Vector p = p0 + s * dir;
    Vector sep;
    const Verdict v = classify(p, sep_lo, sep);
    result.history.push_back({p, v, true});
    ++result.iterations;
    if (v == Verdict::Undetermined) {
      throw UndeterminedAtBisection("probe " + detail::format_vector(p) +
                                    " is undetermined; consider raising max_time");
    }
    if (v == Verdict::Recovers) {
      s_lo = s;
      sep_lo = sep;
    } else {
      s_hi = s;
    }
  }

  result.p_star = p0 + s_lo * dir;
  result.p_fail = p0 + s_hi * dir;
  result.sep = sep_lo;
  result.bracket_width = s_hi - s_lo;
  return result;
}

inline BoundarySearchResult ray_boundary_search(const ParameterizedSystem& sys, const Vector& p0,
                                                const Vector& direction,
                                                const IntegratorConfig& cfg,
                                                const SearchOptions& opts = {}) {
  if (!sys.equilibrium_guess) {
    throw InvalidConfig(sys.name + ": no equilibrium guess available; pass one explicitly");
  }
  return ray_boundary_search(sys, p0, direction, cfg, opts, sys.equilibrium_guess(p0));
}

}  // namespace moi
