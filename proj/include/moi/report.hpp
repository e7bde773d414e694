#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moi/instability_mode.hpp"
#include "moi/integrator.hpp"
#include "moi/recovery.hpp"

namespace moi {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kSweepCsvHeader = "h,p_star,frob_err,eig_err,vec_err,status";

/// %.10g formatting used by every CSV writer.
inline std::string format_sig10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace detail {

inline std::string join_sig10(const Vector& v, char sep) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_sig10(v[i]);
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace detail

/// One line per row in input order. A multi-dimensional p_star is written as
/// its components joined by ';'.
inline std::string sweep_csv(const SweepTable& table) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const SweepRow& row : table.rows) {
    out += format_sig10(row.h) + "," + detail::join_sig10(row.p_star, ';') + "," +
           format_sig10(row.frob_err) + "," + format_sig10(row.eig_err) + "," +
           format_sig10(row.vec_err) + "," + row.status + "\n";
  }
  return out;
}

inline void write_sweep_csv(const SweepTable& table, const std::string& path) {
  detail::write_text(path, sweep_csv(table));
}

/// Parses the sweep CSV back into rows (boundary and mode details are not
/// part of the format).
inline SweepTable parse_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader) {
    throw DataFormatError("sweep CSV: missing or unexpected header");
  }
  SweepTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != 6) throw DataFormatError("sweep CSV: expected 6 columns in '" + line + "'");
    SweepRow row;
    try {
      row.h = std::stod(cols[0]);
      const auto ps = cols[1].empty() ? std::vector<std::string>{} : detail::split(cols[1], ';');
      row.p_star.resize(static_cast<Index>(ps.size()));
      for (std::size_t i = 0; i < ps.size(); ++i) row.p_star[Index(i)] = std::stod(ps[i]);
      row.frob_err = std::stod(cols[2]);
      row.eig_err = std::stod(cols[3]);
      row.vec_err = std::stod(cols[4]);
    } catch (const std::logic_error&) {
      throw DataFormatError("sweep CSV: bad number in '" + line + "'");
    }
    row.status = cols[5];
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline SweepTable read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_sweep_csv(in);
}

inline ordered_json mode_json(const ModeResult& result,
                              const std::vector<std::string>& state_names = {}) {
  ordered_json j;
  j["eigenvalue"] = result.eigenvalue;
  j["eigenvector"] = std::vector<double>(result.eigenvector.data(),
                                         result.eigenvector.data() + result.eigenvector.size());
  j["j_index"] = result.averaged.last_unstable_index;
  j["h"] = result.averaged.step;
  const Vector& p = result.averaged.parameter;
  j["p"] = std::vector<double>(p.data(), p.data() + p.size());
  j["normalization"] = to_string(result.averaged.normalization);
  j["residual"] = result.residual;
  if (!state_names.empty()) j["state_names"] = state_names;
  return j;
}

inline void write_mode_json(const ModeResult& result, const std::string& path,
                            const std::vector<std::string>& state_names = {}) {
  detail::write_text(path, mode_json(result, state_names).dump(2) + "\n");
}

inline ordered_json boundary_json(const BoundarySearchResult& r) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  ordered_json j;
  j["p_star"] = vec(r.p_star);
  j["p_fail"] = vec(r.p_fail);
  j["direction"] = vec(r.direction);
  j["bracket_width"] = r.bracket_width;
  j["iterations"] = r.iterations;
  ordered_json hist = ordered_json::array();
  for (const auto& probe : r.history) {
    ordered_json e;
    e["p"] = vec(probe.parameter);
    e["verdict"] = to_string(probe.verdict);
    e["bisection"] = probe.bisection;
    hist.push_back(std::move(e));
  }
  j["history"] = std::move(hist);
  return j;
}

/// Columns: t, one per state, and `unstable` when flags were recorded.
inline std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& names) {
  const bool flags = traj.instability_flags.size() == traj.states.size();
  std::string out = "t";
  const Index n = traj.states.empty() ? 0 : traj.states.front().size();
  for (Index i = 0; i < n; ++i) {
    out += "," + (std::size_t(i) < names.size() ? names[std::size_t(i)] : "x" + std::to_string(i + 1));
  }
  if (flags) out += ",unstable";
  out += "\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out += format_sig10(traj.step * double(k));
    for (Index i = 0; i < n; ++i) out += "," + format_sig10(traj.states[k][i]);
    if (flags) out += traj.instability_flags[k] ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

}  // namespace moi
