#pragma once

// Profile CSV and JSON report serialization.
//
// CSV: header x,u,du,f,a,F12,H and one "%.16e" row per grid node (17
// significant digits, so doubles round-trip exactly). JSON numbers use the
// shortest round-trip form; non-finite values become null.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bpswall/diagnostics.hpp"
#include "bpswall/errors.hpp"
#include "bpswall/fields.hpp"
#include "bpswall/profile.hpp"

namespace bpswall::io {

using nlohmann::json;

inline constexpr std::string_view kCsvHeader = "x,u,du,f,a,F12,H";

struct ProfileTable {
  std::vector<double> x, u, du, f, a, F12, H;

  [[nodiscard]] std::size_t size() const { return x.size(); }
};

inline ProfileTable tabulate(const WallProfile& prof) {
  const FieldProfile fp = reconstruct(prof);
  return {prof.x, prof.u, prof.du, fp.f, fp.a, fp.F12, fp.H};
}

inline std::string format_csv(const ProfileTable& t) {
  std::string out(kCsvHeader);
  out += '\n';
  char buf[256];
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e,%.16e,%.16e,%.16e\n", t.x[i], t.u[i], t.du[i], t.f[i],
                  t.a[i], t.F12[i], t.H[i]);
    out += buf;
  }
  return out;
}

inline double parse_number(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
    throw ParseError("not a number: '" + std::string(field) + "'", line);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite value", line);
  return v;
}

/// Parses a profile CSV. Blank lines are skipped; anything else malformed
/// throws ParseError carrying the 1-based line number.
inline ProfileTable parse_csv(std::string_view text) {
  ProfileTable t;
  std::size_t line = 0;
  bool header_seen = false;
  std::vector<double*> row(7);
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view rec = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line;
    if (!rec.empty() && rec.back() == '\r') rec.remove_suffix(1);
    if (rec.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (!header_seen) {
      if (rec != kCsvHeader) throw ParseError("expected header '" + std::string(kCsvHeader) + "'", line);
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = rec.find(',', start);
      fields.push_back(rec.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) {
      throw ParseError("expected 7 columns, found " + std::to_string(fields.size()), line);
    }
    std::vector<double>* cols[] = {&t.x, &t.u, &t.du, &t.f, &t.a, &t.F12, &t.H};
    for (std::size_t c = 0; c < 7; ++c) cols[c]->push_back(parse_number(fields[c], line));
  }
  if (!header_seen) throw ParseError("empty file", line == 0 ? 1 : line);
  if (t.size() < 7) throw ParseError("a profile needs at least 7 rows", line);
  return t;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

/// Rebuilds a WallProfile from the x, u, du columns. The grid must be
/// x_k = k * spacing and contain x = 0; the anchor is read off u(0).
inline WallProfile profile_from_table(const ProfileTable& t, BoundaryCondition bc, const ModelParams& params,
                                      double spacing) {
  if (!(spacing > 0.0)) throw ParamError("spacing must be positive");
  WallProfile prof;
  prof.bc = bc;
  prof.params = validate(params);
  prof.spacing = spacing;
  prof.k_begin = std::lround(t.x.front() / spacing);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double expected = static_cast<double>(prof.k_begin + static_cast<long>(i)) * spacing;
    if (std::abs(t.x[i] - expected) > 1e-9 * (1.0 + std::abs(expected))) {
      throw ParseError("x is not on the uniform grid of spacing " + std::to_string(spacing), i + 2);
    }
  }
  if (prof.k_begin > 0 || prof.k_begin + static_cast<long>(t.size()) <= 0) {
    throw ParseError("grid does not contain x = 0", 2);
  }
  prof.x = t.x;
  prof.u = t.u;
  prof.du = t.du;
  prof.anchor = prof.u[prof.origin()];
  return prof;
}

/// max |stored - recomputed| / (1 + |recomputed|) over the derived columns.
inline double column_consistency(const ProfileTable& stored, const WallProfile& prof) {
  const ProfileTable fresh = tabulate(prof);
  double worst = 0.0;
  const std::vector<double> ProfileTable::*cols[] = {&ProfileTable::f, &ProfileTable::a, &ProfileTable::F12,
                                                     &ProfileTable::H};
  for (auto col : cols) {
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      const double r = (fresh.*col)[i];
      worst = std::max(worst, std::abs((stored.*col)[i] - r) / (1.0 + std::abs(r)));
    }
  }
  return worst;
}

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_number(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) return number(*v);
  else return *v;
}

inline const char* to_string(SignBranch b) { return b == SignBranch::Upper ? "upper" : "lower"; }

inline BoundaryCondition parse_bc(const std::string& s) {
  if (s == "higgs-magnetic") return BoundaryCondition::HiggsToMagnetic;
  if (s == "magnetic-magnetic") return BoundaryCondition::MagneticToMagnetic;
  throw ParamError("unknown boundary condition '" + s + "' (higgs-magnetic | magnetic-magnetic)");
}

inline SignBranch parse_branch(const std::string& s) {
  if (s == "upper") return SignBranch::Upper;
  if (s == "lower") return SignBranch::Lower;
  throw ParamError("unknown branch '" + s + "' (upper | lower)");
}

inline json residuals_json(const DiagnosticsReport& r) {
  return {{"first_integral", number(r.first_integral)},
          {"ode", number(r.ode)},
          {"bps_r1", number(r.bps.r1)},
          {"bps_r2", number(r.bps.r2)},
          {"el_r3", number(r.el.r3)},
          {"el_r4", number(r.el.r4)},
          {"energy_identity", number(r.energy_identity)},
          {"f12_consistency", number(r.f12_consistency)},
          {"quadrature_equivalence", number(r.quadrature_equivalence)},
          {"symmetry", optional_number(r.symmetry)},
          {"slope_at_maximum", optional_number(r.slope_at_maximum)}};
}

inline json report_json(const DiagnosticsReport& r, const json& config) {
  json j;
  j["config"] = config;
  j["pass"] = r.pass;
  j["slope"] = {{"anchor_slope", number(r.anchor_slope)},
                {"b_star", optional_number(r.b_star)},
                {"b_lo", optional_number(r.b_lo)},
                {"b_hi", optional_number(r.b_hi)},
                {"iterations", optional_number(r.iterations)},
                {"oracle_slope", optional_number(r.oracle_slope)},
                {"agreement", optional_number(r.agreement)},
                {"shooting_segments", optional_number(r.shooting_segments)}};
  j["residuals"] = residuals_json(r);
  j["locations"] = {{"bps_r1_x", number(r.bps.r1_x)}, {"bps_r2_x", number(r.bps.r2_x)}};
  j["shape"] = {{"nodes", r.nodes},
                {"x_min", number(r.x_min)},
                {"x_max", number(r.x_max)},
                {"truncated", r.truncated},
                {"max_u", number(r.max_u)},
                {"non_decreasing_nodes", r.non_decreasing_nodes},
                {"nodes_above_maximum", r.nodes_above_maximum}};
  if (r.tails) {
    const TailFit& t = *r.tails;
    j["tails"] = {{"lambda_left", optional_number(t.lambda_left)},
                  {"c_right", number(t.c_right)},
                  {"predicted_c_right", number(t.predicted_c_right)},
                  {"theorem_c_right", number(r.theorem_c_right)},
                  {"c_right_deviates_from_theorem", r.c_right_deviates_from_theorem},
                  {"left_window", {number(t.left_window.first), number(t.left_window.second)}},
                  {"right_window", {number(t.right_window.first), number(t.right_window.second)}},
                  {"left_residual", number(t.left_residual)},
                  {"right_residual", number(t.right_residual)}};
  } else {
    j["tails"] = nullptr;
  }
  const BracketReport& b = r.brackets;
  j["brackets"] = {{"min_lower_margin", number(b.min_lower_margin)},
                   {"min_upper_margin", number(b.min_upper_margin)},
                   {"max_lower_gap", number(b.max_lower_gap)},
                   {"strict_min_margin", number(b.strict_min_margin)},
                   {"violations", b.violations},
                   {"first_violation_x", optional_number(b.first_violation_x)},
                   {"x_lower_margin", number(b.x_lower_margin)},
                   {"x_upper_margin", number(b.x_upper_margin)},
                   {"x_violations", b.x_violations},
                   {"sqrt_bound_margin", number(b.sqrt_bound_margin)},
                   {"linear_bound_margin", number(b.linear_bound_margin)},
                   {"uncorrected_upper_violations", b.uncorrected_upper_violations}};
  j["fields"] = {{"flux_window", number(r.flux_window)},
                 {"far_field_energy_density", number(r.far_field_energy_density)},
                 {"far_field_energy_density_measured", number(r.far_field_energy_density_measured)}};
  json gates = json::array();
  for (const Gate& g : r.gates) {
    gates.push_back({{"name", g.name}, {"value", number(g.value)}, {"threshold", number(g.threshold)}, {"pass", g.pass}});
  }
  j["gates"] = gates;
  j["warnings"] = r.warnings;
  return j;
}

/// Pretty JSON with a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace bpswall::io
