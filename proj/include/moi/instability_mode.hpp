#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "moi/integrator.hpp"
#include "moi/recovery.hpp"
#include "moi/spectral.hpp"
#include "moi/system.hpp"

namespace moi {

/// How the sum of the j+1 Jacobians J_0..J_j is normalized.
enum class Normalization {
  PaperLiteral,  // divide by j
  SampleCount,   // divide by j + 1
};

inline const char* to_string(Normalization n) {
  return n == Normalization::PaperLiteral ? "paper" : "samples";
}

struct AveragedJacobian {
  Matrix matrix;
  Matrix jacobian_sum;  // sum_{n=0..j} J_n, before normalization
  long last_unstable_index = 0;
  long samples_total = 0;
  Vector parameter;
  double step = 0.0;
  Normalization normalization = Normalization::PaperLiteral;
};

struct ModeResult {
  double eigenvalue = 0.0;
  Vector eigenvector;
  AveragedJacobian averaged;
  double residual = 0.0;
  int unstable_count = 0;
  // Width of the boundary bracket when the parameter came from a boundary
  // search; the parameter lies at most this far inside the recovery region.
  std::optional<double> boundary_gap;
};

/// Largest n >= 1 with flags[n] set. Index 0 never qualifies.
inline long last_unstable_index(const std::vector<bool>& flags) {
  for (std::size_t n = flags.size(); n-- > 1;) {
    if (flags[n]) return static_cast<long>(n);
  }
  throw NeverUnstable("no state after the initial condition has an unstable Jacobian");
}

/// Averages the Jacobians at states 0..j of a recovered trajectory, where j is
/// the last index with an unstable Jacobian.
inline AveragedJacobian average_jacobian(const ParameterizedSystem& sys, const Trajectory& traj,
                                         Normalization normalization = Normalization::PaperLiteral) {
  if (traj.termination != Termination::ConvergedToSEP) {
    throw NotRecovered(std::string("trajectory terminated with ") + to_string(traj.termination));
  }
  if (traj.instability_flags.size() != traj.states.size()) {
    throw InvalidConfig("trajectory was simulated without instability flags");
  }
  const long j = last_unstable_index(traj.instability_flags);

  AveragedJacobian out;
  out.last_unstable_index = j;
  out.samples_total = static_cast<long>(traj.states.size());
  out.parameter = traj.parameter;
  out.step = traj.step;
  out.normalization = normalization;
  out.jacobian_sum = Matrix::Zero(sys.state_dim, sys.state_dim);
  for (long n = 0; n <= j; ++n) {
    out.jacobian_sum += eval_jacobian(sys, traj.states[static_cast<std::size_t>(n)],
                                      traj.parameter);
  }
  const double denom = normalization == Normalization::PaperLiteral ? double(j) : double(j + 1);
  out.matrix = out.jacobian_sum / denom;
  return out;
}

inline AveragedJacobian average_jacobian(const ParameterizedSystem& sys, const Vector& p,
                                         const IntegratorConfig& cfg, const Vector& sep,
                                         Normalization normalization = Normalization::PaperLiteral,
                                         double stability_tol = kDefaultStabilityTol) {
  const Trajectory traj = simulate(sys, p, cfg, sep, /*record_flags=*/true, stability_tol);
  return average_jacobian(sys, traj, normalization);
}

/// The unique unstable eigenpair of an averaged Jacobian.
inline ModeResult mode_from_average(AveragedJacobian averaged,
                                    double stability_tol = kDefaultStabilityTol) {
  const EigenPair pair = unstable_eigenpair(averaged.matrix, stability_tol);
  ModeResult out;
  out.eigenvalue = pair.value.real();
  out.eigenvector = pair.vector.real();
  out.residual = pair.residual;
  out.unstable_count = stability_verdict(averaged.matrix, stability_tol).unstable_count;
  out.averaged = std::move(averaged);
  return out;
}

/// Mode of instability at p: the unstable eigenpair of the trajectory-averaged
/// Jacobian. Fails with NoUnstableEigenvalue / MultipleUnstableEigenvalues when
/// p is not close enough to the recovery boundary.
inline ModeResult mode_of_instability(const ParameterizedSystem& sys, const Vector& p,
                                      const IntegratorConfig& cfg, const Vector& sep,
                                      Normalization normalization = Normalization::PaperLiteral,
                                      double stability_tol = kDefaultStabilityTol) {
  return mode_from_average(average_jacobian(sys, p, cfg, sep, normalization, stability_tol),
                           stability_tol);
}

// ---------------------------------------------------------------------------
// Step-size sweep

struct SweepRow {
  double h = 0.0;
  Vector p_star;
  double frob_err = std::numeric_limits<double>::quiet_NaN();
  double eig_err = std::numeric_limits<double>::quiet_NaN();
  double vec_err = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // "ok" or the error name
  std::optional<BoundarySearchResult> boundary;
  std::optional<ModeResult> mode;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  SearchOptions search;
  Normalization normalization = Normalization::PaperLiteral;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Runs `count` independent jobs on up to `threads` workers.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& w : workers) w.join();
}

/// For every h: boundary search from p0 along `direction`, then the mode at
/// p*(h). Errors are measured against the row with the smallest h. A failing
/// row records its error name and the sweep continues.
inline SweepTable h_sweep(const ParameterizedSystem& sys, const Vector& p0, const Vector& direction,
                          const std::vector<double>& h_values, const IntegratorConfig& cfg_template,
                          const Vector& sep_guess, const SweepOptions& opts = {}) {
  SweepTable table;
  table.rows.resize(h_values.size());
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    if (!(h_values[i] > 0.0)) throw InvalidConfig("sweep step sizes must be positive");
    table.rows[i].h = h_values[i];
  }

  parallel_for(h_values.size(), opts.threads, [&](std::size_t i) {
    SweepRow& row = table.rows[i];
    IntegratorConfig cfg = cfg_template;
    cfg.step = row.h;
    try {
      BoundarySearchResult b = ray_boundary_search(sys, p0, direction, cfg, opts.search, sep_guess);
      row.p_star = b.p_star;
      ModeResult m = mode_of_instability(sys, b.p_star, cfg, b.sep, opts.normalization,
                                         opts.search.stability_tol);
      m.boundary_gap = b.bracket_width;
      row.boundary = std::move(b);
      row.mode = std::move(m);
      row.status = "ok";
    } catch (const Error& e) {
      row.status = e.name();
    }
  });

  if (table.rows.empty()) return table;
  const auto ref_it = std::min_element(table.rows.begin(), table.rows.end(),
                                       [](const SweepRow& a, const SweepRow& b) { return a.h < b.h; });
  if (!ref_it->mode) return table;
  const ModeResult ref = *ref_it->mode;
  for (SweepRow& row : table.rows) {
    if (!row.mode) continue;
    row.frob_err = (row.mode->averaged.matrix - ref.averaged.matrix).norm();
    row.eig_err = std::abs(row.mode->eigenvalue - ref.eigenvalue);
    row.vec_err = (row.mode->eigenvector - ref.eigenvector).norm();
  }
  return table;
}

}  // namespace moi
