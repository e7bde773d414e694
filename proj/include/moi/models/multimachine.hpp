#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "moi/integrator.hpp"
#include "moi/recovery.hpp"
#include "moi/system.hpp"

namespace moi::models {

struct GeneratorData {
  double inertia = 0.0;     // M_i (file column H), s^2/rad per unit
  double damping = 0.0;     // D_i
  double mech_power = 0.0;  // P_m,i
  double emf = 0.0;         // |E_i|
};

/// Classical swing model of k machines behind a Kron-reduced network:
///   theta_i' = omega_i
///   M_i omega_i' = Pm_i - sum_j E_i E_j (G_ij cos(theta_ij) + B_ij sin(theta_ij)) - D_i omega_i
/// State order is (omega_1..omega_k, theta_1..theta_k).
struct MultiMachineParams {
  enum class Hook {
    InertiaScale,   // p = (s): M_i = s * M_i
    InertiaVector,  // p = (M_1, ..., M_k)
  };

  std::vector<GeneratorData> generators;
  Matrix conductance;  // pre-fault G
  Matrix susceptance;  // pre-fault B
  Matrix fault_conductance;
  Matrix fault_susceptance;
  bool has_fault = false;
  int fault_generator = 0;  // 1-based, 0 when unspecified
  double fault_duration = 0.2;
  double slip_threshold = std::numbers::pi;  // COI-relative angle excursion marking pole slip
  Hook hook = Hook::InertiaScale;

  Index machines() const { return static_cast<Index>(generators.size()); }

  void validate() const {
    const Index k = machines();
    if (k == 0) throw DataFormatError("network has no generators");
    for (const auto& g : generators) {
      if (!(g.inertia > 0.0)) throw ParamOutOfRange("generator inertia must be positive");
    }
    auto square_k = [k](const Matrix& m) { return m.rows() == k && m.cols() == k; };
    if (!square_k(conductance) || !square_k(susceptance)) {
      throw DataFormatError("admittance matrix dimension does not match generator count");
    }
    if (has_fault && (!square_k(fault_conductance) || !square_k(fault_susceptance))) {
      throw DataFormatError("fault admittance matrix dimension does not match generator count");
    }
    if (fault_duration < 0.0) throw DataFormatError("fault duration must be non-negative");
  }

  Vector nominal_inertia() const {
    Vector m(machines());
    for (Index i = 0; i < machines(); ++i) m[i] = generators[std::size_t(i)].inertia;
    return m;
  }

  Index param_dim() const { return hook == Hook::InertiaScale ? 1 : machines(); }

  Vector nominal_parameter() const {
    return hook == Hook::InertiaScale ? Vector::Ones(1) : nominal_inertia();
  }

  /// Inertia vector M(p) for the configured hook.
  Vector inertia(const Vector& p) const {
    Vector m;
    if (hook == Hook::InertiaScale) {
      if (!(p[0] > 0.0)) {
        throw ParamOutOfRange("inertia scaling factor must be positive, got " +
                              std::to_string(p[0]));
      }
      m = p[0] * nominal_inertia();
    } else {
      m = p;
      if (!(m.array() > 0.0).all()) throw ParamOutOfRange("inertias must be positive");
    }
    return m;
  }

  std::vector<std::string> state_names() const {
    std::vector<std::string> names;
    for (Index i = 1; i <= machines(); ++i) names.push_back("omega" + std::to_string(i));
    for (Index i = 1; i <= machines(); ++i) names.push_back("theta" + std::to_string(i));
    return names;
  }
};

namespace detail {

inline Vector swing_field(const MultiMachineParams& params, const Matrix& g, const Matrix& b,
                          const Vector& inertia, const Vector& x) {
  const Index k = params.machines();
  Vector dx(2 * k);
  for (Index i = 0; i < k; ++i) {
    const auto& gi = params.generators[std::size_t(i)];
    double pe = 0.0;
    for (Index j = 0; j < k; ++j) {
      const double d = x[k + i] - x[k + j];
      pe += gi.emf * params.generators[std::size_t(j)].emf *
            (g(i, j) * std::cos(d) + b(i, j) * std::sin(d));
    }
    dx[i] = (gi.mech_power - pe - gi.damping * x[i]) / inertia[i];
    dx[k + i] = x[i];
  }
  return dx;
}

inline Matrix swing_jacobian(const MultiMachineParams& params, const Matrix& g, const Matrix& b,
                             const Vector& inertia, const Vector& x) {
  const Index k = params.machines();
  Matrix jac = Matrix::Zero(2 * k, 2 * k);
  for (Index i = 0; i < k; ++i) {
    const auto& gi = params.generators[std::size_t(i)];
    jac(i, i) = -gi.damping / inertia[i];
    jac(k + i, i) = 1.0;
    double diag = 0.0;
    for (Index j = 0; j < k; ++j) {
      if (j == i) continue;
      const double d = x[k + i] - x[k + j];
      // d Pe_i / d theta_j
      const double dpe = gi.emf * params.generators[std::size_t(j)].emf *
                         (g(i, j) * std::sin(d) - b(i, j) * std::cos(d));
      jac(i, k + j) = -dpe / inertia[i];
      diag -= dpe;
    }
    jac(i, k + i) = -diag / inertia[i];
  }
  return jac;
}

inline ParameterizedSystem swing_system(const MultiMachineParams& params, const Matrix& g,
                                        const Matrix& b, std::string name) {
  const Index k = params.machines();
  ParameterizedSystem sys;
  sys.name = std::move(name);
  sys.state_dim = 2 * k;
  sys.param_dim = params.param_dim();
  sys.state_names = params.state_names();
  for (Index i = 0; i < k; ++i) sys.angle_coordinates.push_back(k + i);
  sys.invariant_directions = Matrix::Zero(2 * k, 1);
  sys.invariant_directions.block(k, 0, k, 1).setConstant(1.0 / std::sqrt(double(k)));
  sys.field = [params, g, b](const Vector& x, const Vector& p) {
    return swing_field(params, g, b, params.inertia(p), x);
  };
  sys.jacobian = [params, g, b](const Vector& x, const Vector& p) {
    return swing_jacobian(params, g, b, params.inertia(p), x);
  };
  return sys;
}

}  // namespace detail

/// Parses the plain-text network format:
///   GEN <count>
///   G <i> <H> <D> <Pm> <E>            (one per generator, 1-based)
///   Y <i> <j> <G_ij> <B_ij>           (pre-fault reduced admittance)
///   YFAULT                            (optional; following Y lines are fault-on)
///   FAULT <generator> <duration>      (optional)
/// Whitespace-delimited, '#' starts a comment. A Y entry given only for (i, j)
/// is mirrored to (j, i).
inline MultiMachineParams parse_network(std::istream& in, const std::string& source = "<stream>") {
  MultiMachineParams params;
  Index count = -1;
  bool in_fault = false;
  Matrix set_pre, set_fault;  // 1 where explicitly given
  std::vector<bool> seen_gen;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw DataFormatError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  auto index_in_range = [&](long i) {
    if (count < 0) fail("GEN header must come first");
    if (i < 1 || i > count) fail("index " + std::to_string(i) + " out of range");
    return static_cast<Index>(i - 1);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "GEN") {
      if (count >= 0) fail("duplicate GEN header");
      long n = 0;
      if (!(ls >> n) || n < 1) fail("GEN expects a positive count");
      count = n;
      params.generators.assign(std::size_t(n), {});
      seen_gen.assign(std::size_t(n), false);
      params.conductance = params.susceptance = Matrix::Zero(n, n);
      params.fault_conductance = params.fault_susceptance = Matrix::Zero(n, n);
      set_pre = set_fault = Matrix::Zero(n, n);
    } else if (tag == "G") {
      long i = 0;
      GeneratorData g;
      if (!(ls >> i >> g.inertia >> g.damping >> g.mech_power >> g.emf)) {
        fail("G expects: index H D Pm E");
      }
      const Index idx = index_in_range(i);
      if (!(g.inertia > 0.0)) fail("H must be positive");
      params.generators[std::size_t(idx)] = g;
      seen_gen[std::size_t(idx)] = true;
    } else if (tag == "Y") {
      long i = 0, j = 0;
      double gij = 0.0, bij = 0.0;
      if (!(ls >> i >> j >> gij >> bij)) fail("Y expects: i j G B");
      const Index r = index_in_range(i), c = index_in_range(j);
      Matrix& gm = in_fault ? params.fault_conductance : params.conductance;
      Matrix& bm = in_fault ? params.fault_susceptance : params.susceptance;
      Matrix& set = in_fault ? set_fault : set_pre;
      gm(r, c) = gij;
      bm(r, c) = bij;
      set(r, c) = 1.0;
      if (set(c, r) == 0.0) {
        gm(c, r) = gij;
        bm(c, r) = bij;
      }
    } else if (tag == "YFAULT") {
      if (count < 0) fail("GEN header must come first");
      in_fault = true;
      params.has_fault = true;
    } else if (tag == "FAULT") {
      long gen = 0;
      double duration = 0.0;
      if (!(ls >> gen >> duration)) fail("FAULT expects: generator duration");
      index_in_range(gen);
      if (duration < 0.0) fail("fault duration must be non-negative");
      params.fault_generator = static_cast<int>(gen);
      params.fault_duration = duration;
    } else {
      fail("unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }
  if (count < 0) throw DataFormatError(source + ": missing GEN header");
  for (std::size_t i = 0; i < seen_gen.size(); ++i) {
    if (!seen_gen[i]) throw DataFormatError(source + ": generator " + std::to_string(i + 1) +
                                            " has no G record");
  }
  params.validate();
  return params;
}

inline MultiMachineParams load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file " + path);
  return parse_network(in, path);
}

/// Stable pre-fault equilibrium. It does not depend on the inertias.
inline Vector multimachine_prefault_sep(const MultiMachineParams& params) {
  const ParameterizedSystem pre =
      detail::swing_system(params, params.conductance, params.susceptance, "multimachine");
  return find_sep(pre, params.nominal_parameter(), Vector::Zero(pre.state_dim));
}

/// State at fault clearing: the fault-on system integrated from `sep` for the
/// fault duration with the configured integrator.
inline Vector fault_scenario_ic(const MultiMachineParams& params, const Vector& p,
                                const IntegratorConfig& cfg, const Vector& sep) {
  if (!params.has_fault) throw DataFormatError("network has no YFAULT block");
  const ParameterizedSystem faulted = detail::swing_system(
      params, params.fault_conductance, params.fault_susceptance, "multimachine-fault");
  return integrate_for(faulted, sep, p, cfg, params.fault_duration);
}

/// The post-fault system over the configured parameter hook. x0(p) comes from
/// fault_scenario_ic with `ic_cfg`. A state has escaped once some machine's
/// angle, relative to the centre of inertia, moves more than slip_threshold
/// away from its equilibrium value.
inline ParameterizedSystem multimachine_system(const MultiMachineParams& params,
                                               const IntegratorConfig& ic_cfg) {
  params.validate();
  ParameterizedSystem sys =
      detail::swing_system(params, params.conductance, params.susceptance, "multimachine");
  const Vector sep = multimachine_prefault_sep(params);
  const Index k = params.machines();

  sys.equilibrium_guess = [sep](const Vector&) { return sep; };
  sys.initial_condition = [params, ic_cfg, sep](const Vector& p) {
    return fault_scenario_ic(params, p, ic_cfg, sep);
  };
  sys.escaped = [params, sep, k](const Vector& x, const Vector& p) {
    const Vector m = params.inertia(p);
    const Vector dtheta = x.tail(k) - sep.tail(k);
    const double coi = m.dot(dtheta) / m.sum();
    return ((dtheta.array() - coi).abs() > params.slip_threshold).any();
  };
  return sys;
}

}  // namespace moi::models
