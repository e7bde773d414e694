#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moi/errors.hpp"

namespace moi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// A vector field f(x, p) on R^n with parameters p in R^m, together with the
/// disturbance that produces the post-disturbance initial condition x0(p).
///
/// Only `field` and `initial_condition` are required. The remaining hooks are
/// model-level knowledge that the generic machinery uses when present:
///   - `jacobian`: analytic df/dx; central differences are used otherwise.
///   - `equilibrium_guess`: a Newton seed for the stable equilibrium at p.
///   - `escaped`: returns true once a state has provably left the recovery
///     region (e.g. a pendulum that has passed over its saddle). Simulation
///     stops with `Termination::Diverged` when it fires.
///   - `invariant_directions`: orthonormal columns s with f(x + c s, p) =
///     f(x, p) for all c (e.g. a common rotor-angle shift). Distances to
///     equilibria and equilibrium stability are measured modulo these.
///   - `angle_coordinates`: state indices holding angles, used by the
///     wrap-aware distance.
struct ParameterizedSystem {
  using FieldFn = std::function<Vector(const Vector& x, const Vector& p)>;
  using JacobianFn = std::function<Matrix(const Vector& x, const Vector& p)>;
  using InitialConditionFn = std::function<Vector(const Vector& p)>;
  using EscapeFn = std::function<bool(const Vector& x, const Vector& p)>;

  std::string name;
  Index state_dim = 0;
  Index param_dim = 0;
  FieldFn field;
  JacobianFn jacobian;
  InitialConditionFn initial_condition;
  std::vector<std::string> state_names;
  InitialConditionFn equilibrium_guess;
  EscapeFn escaped;
  Matrix invariant_directions;
  std::vector<Index> angle_coordinates;

  bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }
};

namespace detail {

inline void check_dims(const ParameterizedSystem& sys, const Vector& x, const Vector& p) {
  if (x.size() != sys.state_dim) {
    throw DimensionMismatch(sys.name + ": state has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(sys.state_dim));
  }
  if (p.size() != sys.param_dim) {
    throw DimensionMismatch(sys.name + ": parameter has dimension " + std::to_string(p.size()) +
                            ", expected " + std::to_string(sys.param_dim));
  }
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.array().isFinite().all();
}

}  // namespace detail

/// f(x, p), with dimension and finiteness checks.
inline Vector eval_field(const ParameterizedSystem& sys, const Vector& x, const Vector& p) {
  detail::check_dims(sys, x, p);
  Vector dx = sys.field(x, p);
  if (dx.size() != sys.state_dim) {
    throw DimensionMismatch(sys.name + ": field returned dimension " + std::to_string(dx.size()));
  }
  if (!detail::all_finite(dx)) {
    throw NonFiniteOutput(sys.name + ": field produced NaN/Inf");
  }
  return dx;
}

/// Central-difference Jacobian with per-coordinate step max(1e-6, 1e-6 |x_i|).
inline Matrix finite_difference_jacobian(const ParameterizedSystem& sys, const Vector& x,
                                         const Vector& p) {
  detail::check_dims(sys, x, p);
  const Index n = sys.state_dim;
  Matrix jac(n, n);
  Vector xp = x;
  for (Index i = 0; i < n; ++i) {
    const double delta = std::max(1e-6, 1e-6 * std::abs(x[i]));
    xp[i] = x[i] + delta;
    const Vector fp = eval_field(sys, xp, p);
    xp[i] = x[i] - delta;
    const Vector fm = eval_field(sys, xp, p);
    xp[i] = x[i];
    jac.col(i) = (fp - fm) / (2.0 * delta);
  }
  return jac;
}

/// df/dx at (x, p): analytic when supplied, central differences otherwise.
inline Matrix eval_jacobian(const ParameterizedSystem& sys, const Vector& x, const Vector& p) {
  if (!sys.has_analytic_jacobian()) {
    return finite_difference_jacobian(sys, x, p);
  }
  detail::check_dims(sys, x, p);
  Matrix jac = sys.jacobian(x, p);
  if (jac.rows() != sys.state_dim || jac.cols() != sys.state_dim) {
    throw DimensionMismatch(sys.name + ": jacobian has wrong shape");
  }
  if (!detail::all_finite(jac)) {
    throw NonFiniteOutput(sys.name + ": jacobian produced NaN/Inf");
  }
  return jac;
}

/// Largest entrywise excess of |J_analytic - J_fd| over the tolerance
/// max(1e-5, 1e-4 ||J||_F). Non-positive means the two paths agree.
inline double jacobian_consistency_excess(const ParameterizedSystem& sys, const Vector& x,
                                          const Vector& p) {
  const Matrix analytic = eval_jacobian(sys, x, p);
  const Matrix numeric = finite_difference_jacobian(sys, x, p);
  const double tol = std::max(1e-5, 1e-4 * analytic.norm());
  return (analytic - numeric).cwiseAbs().maxCoeff() - tol;
}

/// Jacobian restricted to the complement of the invariant directions. Since
/// J s = 0 for every invariant direction s, the spectrum of J is the spectrum
/// of this matrix plus one zero per direction.
inline Matrix reduced_jacobian(const ParameterizedSystem& sys, const Matrix& jac) {
  const Index k = sys.invariant_directions.cols();
  if (k == 0) return jac;
  const Index n = jac.rows();
  Eigen::HouseholderQR<Matrix> qr(sys.invariant_directions);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix complement = q.rightCols(n - k);
  return complement.transpose() * jac * complement;
}

enum class DistanceMode { Euclidean, WrapAngles };

/// Distance between states, modulo invariant directions. Under WrapAngles the
/// angle coordinates of the difference are first wrapped into (-pi, pi].
inline double state_distance(const ParameterizedSystem& sys, const Vector& x, const Vector& y,
                             DistanceMode mode = DistanceMode::Euclidean) {
  Vector d = x - y;
  if (mode == DistanceMode::WrapAngles) {
    for (Index i : sys.angle_coordinates) {
      d[i] = std::remainder(d[i], 2.0 * std::numbers::pi);
    }
  }
  if (sys.invariant_directions.cols() > 0) {
    const Matrix& s = sys.invariant_directions;
    d -= s * (s.transpose() * d);
  }
  return d.norm();
}

}  // namespace moi
