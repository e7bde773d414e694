#pragma once

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "moi/instability_mode.hpp"
#include "moi/models/ieee9_data.hpp"
#include "moi/models/multimachine.hpp"
#include "moi/models/pendulum.hpp"
#include "moi/recovery.hpp"
#include "moi/report.hpp"

namespace moi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysis = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string analysis;
  std::string model = "pendulum";
  std::string model_file;
  std::string p, p0, dir = "1", h;
  double tol = 1e-4;
  double max_time = 200.0;
  double newton_tol = 1e-12;
  double stability_tol = kDefaultStabilityTol;
  std::string normalization = "paper";
  std::string out;
};

/// Configuration problems detected before any analysis runs.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& context) : Error("UsageError", context) {}
};

inline std::vector<double> parse_floats(const std::string& text, const char* flag) {
  std::vector<double> values;
  for (const std::string& item : detail::split(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw UsageError(std::string(flag) + " expects comma-separated numbers");
  return values;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

struct ModelContext {
  ParameterizedSystem system;
};

/// Builds the selected model; `param_dim` picks the multimachine hook.
inline ModelContext build_model(const RunConfig& cfg, Index param_dim, double step,
                                const IntegratorConfig& integ) {
  ModelContext ctx;
  if (cfg.model == "pendulum") {
    if (!cfg.model_file.empty()) throw UsageError("--model-file only applies to multimachine");
    if (param_dim != 1) throw UsageError("pendulum takes a single parameter (c3)");
    ctx.system = models::pendulum_system({});
    return ctx;
  }
  if (cfg.model == "multimachine") {
    models::MultiMachineParams params;
    if (cfg.model_file.empty()) {
      std::istringstream in(models::kIeee9ClassicalNetwork);
      params = models::parse_network(in, "<builtin ieee9>");
    } else {
      params = models::load_network_file(cfg.model_file);
    }
    if (param_dim == 1) {
      params.hook = models::MultiMachineParams::Hook::InertiaScale;
    } else if (param_dim == params.machines()) {
      params.hook = models::MultiMachineParams::Hook::InertiaVector;
    } else {
      throw UsageError("multimachine takes 1 (inertia scale) or " +
                       std::to_string(params.machines()) + " (inertias) parameters");
    }
    IntegratorConfig ic = integ;
    ic.step = step;
    ctx.system = models::multimachine_system(params, ic);
    return ctx;
  }
  throw UsageError("unknown model '" + cfg.model + "'");
}

inline Normalization parse_normalization(const std::string& s) {
  if (s == "paper") return Normalization::PaperLiteral;
  if (s == "samples") return Normalization::SampleCount;
  throw UsageError("--normalization must be paper or samples");
}

inline unsigned threads_from_env() {
  const char* env = std::getenv("MOI_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw UsageError("MOI_THREADS must be a positive integer");
  return static_cast<unsigned>(v);
}

inline std::string vector_text(const Vector& v) {
  std::string s = "[";
  for (Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_sig10(v[i]);
  return s + "]";
}

inline int run_analysis(const RunConfig& cfg, std::ostream& out) {
  const Normalization normalization = parse_normalization(cfg.normalization);
  IntegratorConfig integ;
  integ.max_time = cfg.max_time;
  integ.newton_tol = cfg.newton_tol;
  if (!(cfg.stability_tol >= 0.0)) throw UsageError("--stability-tol must be non-negative");
  if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");

  const bool uses_p = cfg.analysis == "simulate" || cfg.analysis == "mode";
  const std::string& p_text = uses_p ? cfg.p : cfg.p0;
  if (p_text.empty()) throw UsageError(uses_p ? "--p is required" : "--p0 is required");
  const Vector p = to_vector(parse_floats(p_text, uses_p ? "--p" : "--p0"));

  std::vector<double> steps;
  if (!cfg.h.empty()) {
    steps = parse_floats(cfg.h, "--h");
    for (double h : steps) {
      if (!(h > 0.0)) throw UsageError("--h values must be positive");
    }
    if (cfg.analysis != "sweep" && steps.size() != 1) throw UsageError("--h takes one value here");
  } else if (cfg.analysis == "sweep") {
    throw UsageError("--h list is required for sweep");
  } else {
    steps = {cfg.model == "multimachine" ? 1.0 / 60.0 : 0.02};
  }
  integ.step = steps.front();
  integ.validate();
  // Disturbance integration (multimachine) uses the finest requested step.
  const double ic_step = *std::min_element(steps.begin(), steps.end());
  const ModelContext model = build_model(cfg, p.size(), ic_step, integ);
  const ParameterizedSystem& sys = model.system;
  if (!sys.equilibrium_guess) throw UsageError("model has no equilibrium guess");

  if (cfg.analysis == "simulate") {
    const Vector sep = find_sep(sys, p, sys.equilibrium_guess(p), 1e-12, cfg.stability_tol);
    const Trajectory traj = simulate(sys, p, integ, sep, true, cfg.stability_tol);
    if (cfg.out.empty()) {
      out << trajectory_csv(traj, sys.state_names);
    } else {
      detail::write_text(cfg.out, trajectory_csv(traj, sys.state_names));
      out << "termination=" << to_string(traj.termination) << " steps=" << traj.size() - 1
          << " t=" << format_sig10(traj.duration())
          << " verdict=" << to_string(verdict_for(traj.termination)) << "\n";
    }
    return kExitOk;
  }

  if (cfg.analysis == "mode") {
    const Vector sep = find_sep(sys, p, sys.equilibrium_guess(p), 1e-12, cfg.stability_tol);
    const ModeResult result = mode_of_instability(sys, p, integ, sep, normalization, cfg.stability_tol);
    const ordered_json j = mode_json(result, sys.state_names);
    if (cfg.out.empty()) {
      out << j.dump() << "\n";
    } else {
      write_mode_json(result, cfg.out, sys.state_names);
      out << "eigenvalue=" << format_sig10(result.eigenvalue)
          << " eigenvector=" << vector_text(result.eigenvector)
          << " j_index=" << result.averaged.last_unstable_index << "\n";
    }
    return kExitOk;
  }

  const Vector dir = to_vector(parse_floats(cfg.dir, "--dir"));
  if (dir.size() != p.size()) throw UsageError("--dir must have the same length as --p0");
  SearchOptions search;
  search.param_tol = cfg.tol;
  search.stability_tol = cfg.stability_tol;

  if (cfg.analysis == "boundary") {
    const BoundarySearchResult r = ray_boundary_search(sys, p, dir, integ, search);
    if (cfg.out.empty()) {
      out << boundary_json(r).dump() << "\n";
    } else {
      detail::write_text(cfg.out, boundary_json(r).dump(2) + "\n");
      out << "p_star=" << vector_text(r.p_star) << " bracket_width=" << format_sig10(r.bracket_width)
          << " iterations=" << r.iterations << "\n";
    }
    return kExitOk;
  }

  // sweep
  SweepOptions opts;
  opts.search = search;
  opts.normalization = normalization;
  opts.threads = threads_from_env();
  const SweepTable table = h_sweep(sys, p, dir, steps, integ, sys.equilibrium_guess(p), opts);
  if (cfg.out.empty()) {
    out << sweep_csv(table);
  } else {
    write_sweep_csv(table, cfg.out);
    std::size_t ok = 0;
    for (const auto& row : table.rows) ok += row.status == "ok";
    out << "rows=" << table.rows.size() << " ok=" << ok << "\n";
  }
  return kExitOk;
}

/// Entry point shared by the `moi` executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Mode of instability via trajectory-averaged Jacobians", "moi"};
  app.require_subcommand(1, 1);
  // `--h` is the step flag, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--model", cfg.model, "pendulum | multimachine")
        ->check(CLI::IsMember({"pendulum", "multimachine"}));
    sub->add_option("--model-file", cfg.model_file, "multimachine network data file");
    sub->add_option("--p", cfg.p, "parameter (comma-separated)");
    sub->add_option("--p0", cfg.p0, "search start parameter (comma-separated)");
    sub->add_option("--dir", cfg.dir, "search direction (comma-separated)");
    sub->add_option("--h", cfg.h, "time step(s), comma-separated for sweep");
    sub->add_option("--tol", cfg.tol, "boundary bracket tolerance");
    sub->add_option("--max-time", cfg.max_time, "simulation horizon in seconds");
    sub->add_option("--newton-tol", cfg.newton_tol, "trapezoidal Newton residual tolerance");
    sub->add_option("--stability-tol", cfg.stability_tol, "real-part margin for instability");
    sub->add_option("--normalization", cfg.normalization, "paper | samples")
        ->check(CLI::IsMember({"paper", "samples"}));
    sub->add_option("--out", cfg.out, "output path");
  };
  for (const char* name : {"simulate", "boundary", "mode", "sweep"}) {
    add_common(app.add_subcommand(name, std::string(name) + " analysis"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }
  cfg.analysis = app.get_subcommands().front()->get_name();

  try {
    return run_analysis(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataFormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.name() << ": " << e.what() << "\n";
    return kExitAnalysis;
  } catch (const std::exception& e) {
    err << "InternalError: " << e.what() << "\n";
    return kExitAnalysis;
  }
}

}  // namespace moi::cli
