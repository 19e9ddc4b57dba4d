// bpswall: solve, sweep, verify and slope commands for the Born-Infeld wall.
//
// Exit codes: 0 all gates pass, 2 a residual gate failed, 1 usage or solver error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bpswall/diagnostics.hpp"
#include "bpswall/io.hpp"
#include "bpswall/profile.hpp"
#include "bpswall/shoot.hpp"

namespace fs = std::filesystem;
using namespace bpswall;
using io::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitGate = 2;
constexpr double kRoundTripTolerance = 1e-12;

struct RunConfig {
  std::string bc = "higgs-magnetic";
  double beta = 0.0;
  std::optional<double> a;
  std::optional<double> u0;
  double x_min = -20.0;
  double x_max = 12.0;
  double half_window = 12.0;
  double spacing = 0.01;
  Tolerances tol{};
  std::string branch = "upper";
  std::string out = "wall";
  bool emit_plot_data = false;
  std::string config;
  // sweep
  std::string betas;
  std::string anchors;
  std::string out_dir = "sweep";
  // verify
  std::string csv;
  std::string sidecar;
  std::string report_out;
};

ModelParams model_params(const RunConfig& c, double beta) {
  ModelParams p;
  p.beta = beta;
  p.branch = io::parse_branch(c.branch);
  p.tol = c.tol;
  return validate(p);
}

json config_json(const RunConfig& c, BoundaryCondition bc, const ModelParams& p, double anchor) {
  json j = {{"bc", to_string(bc)},
            {"beta", io::number(p.beta)},
            {"anchor", io::number(anchor)},
            {"branch", io::to_string(p.branch)},
            {"spacing", io::number(c.spacing)},
            {"tolerances",
             {{"abs_tol", io::number(p.tol.abs_tol)},
              {"rel_tol", io::number(p.tol.rel_tol)},
              {"slope_tol", io::number(p.tol.slope_tol)}}}};
  if (bc == BoundaryCondition::HiggsToMagnetic) {
    j["x_min"] = io::number(c.x_min);
    j["x_max"] = io::number(c.x_max);
  } else {
    j["half_window"] = io::number(c.half_window);
  }
  return j;
}

struct Solved {
  WallProfile profile;
  DiagnosticsReport report;
  json config;
};

// The anchor is a for higgs-magnetic (u(0) = -a) and u0 for magnetic-magnetic.
Solved solve_one(const RunConfig& c, BoundaryCondition bc, double beta, double anchor) {
  const ModelParams p = model_params(c, beta);
  ProfileOptions opts;
  opts.spacing = c.spacing;
  Solved s;
  std::optional<ShootingOutcome> shot;
  if (bc == BoundaryCondition::HiggsToMagnetic) {
    shot = find_critical_slope(anchor, p, opts.limits);
    s.profile = solve_higgs_to_magnetic(anchor, p, Window{c.x_min, c.x_max}, opts);
    s.config = config_json(c, bc, p, -anchor);
  } else {
    s.profile = solve_magnetic_to_magnetic(anchor, p, c.half_window, opts);
    s.config = config_json(c, bc, p, anchor);
  }
  s.report = diagnose(s.profile, shot);
  return s;
}

double anchor_for(const RunConfig& c, BoundaryCondition bc) {
  if (bc == BoundaryCondition::HiggsToMagnetic) {
    if (!c.a) throw ParamError("--a is required for --bc higgs-magnetic");
    return *c.a;
  }
  if (!c.u0) throw ParamError("--u0 is required for --bc magnetic-magnetic");
  return *c.u0;
}

void write_plot_data(const std::string& prefix, const io::ProfileTable& t) {
  auto emit = [&](const std::string& name, const std::vector<double>& y) {
    std::string text;
    char buf[96];
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.16e %.16e\n", t.x[i], y[i]);
      text += buf;
    }
    io::write_text(prefix + "_" + name + ".dat", text);
  };
  emit("u", t.u);
  emit("F12", t.F12);
  emit("H", t.H);
}

void print_gates(const DiagnosticsReport& r) {
  for (const Gate& g : r.gates) {
    if (!g.pass) std::cerr << "gate failed: " << g.name << " = " << g.value << " > " << g.threshold << "\n";
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_solve(const RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const BoundaryCondition bc = io::parse_bc(c.bc);
  const Solved s = solve_one(c, bc, c.beta, anchor_for(c, bc));
  const io::ProfileTable table = io::tabulate(s.profile);
  io::write_text(c.out + ".csv", io::format_csv(table));
  io::write_text(c.out + ".json", io::dump(io::report_json(s.report, s.config)));
  if (c.emit_plot_data) write_plot_data(c.out, table);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_text(c.out + ".meta.json", io::dump({{"runtime_seconds", seconds}, {"nodes", table.size()}}));

  print_gates(s.report);
  if (s.report.b_star) std::printf("b_star=%.17g\n", *s.report.b_star);
  std::printf("%s %s.csv %s.json\n", s.report.pass ? "PASS" : "FAIL", c.out.c_str(), c.out.c_str());
  return s.report.pass ? kExitPass : kExitGate;
}

struct ListEntry {
  double value;
  std::string token;
};

std::vector<ListEntry> parse_list(const std::string& text, const std::string& what) {
  std::vector<ListEntry> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    std::string tok = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (!tok.empty()) {
      double v = 0.0;
      try {
        v = io::parse_number(tok, 1);
      } catch (const ParseError&) {
        throw ParamError("invalid " + what + " '" + tok + "'");
      }
      const bool dup = std::any_of(out.begin(), out.end(), [&](const ListEntry& e) { return e.value == v; });
      if (dup) {
        std::cerr << "warning: duplicate " << what << " " << tok << " ignored\n";
      } else {
        out.push_back({v, tok});
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BPSWALL_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

std::string csv_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", *v);
  return buf;
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

int cmd_sweep(const RunConfig& c) {
  const BoundaryCondition bc = io::parse_bc(c.bc);
  const auto betas = parse_list(c.betas, "beta");
  if (betas.empty()) {
    std::cerr << "error: sweep needs a non-empty --betas list\n";
    return kExitError;
  }
  const bool higgs = bc == BoundaryCondition::HiggsToMagnetic;
  const auto anchors = parse_list(c.anchors.empty() ? (higgs ? "1" : "-1") : c.anchors, "anchor");
  if (anchors.empty()) {
    std::cerr << "error: sweep needs a non-empty --anchors list\n";
    return kExitError;
  }
  fs::create_directories(c.out_dir);

  struct Job {
    ListEntry beta, anchor;
    std::optional<DiagnosticsReport> report;
    std::string error;
  };
  std::vector<Job> jobs;
  for (const auto& b : betas)
    for (const auto& a : anchors) jobs.push_back({b, a, std::nullopt, ""});

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& job = jobs[i];
      try {
        const Solved s = solve_one(c, bc, job.beta.value, job.anchor.value);
        const std::string name = c.out_dir + "/beta_" + job.beta.token + "_anchor_" + job.anchor.token + ".json";
        io::write_text(name, io::dump(io::report_json(s.report, s.config)));
        job.report = s.report;
      } catch (const std::exception& e) {
        job.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = worker_count(jobs.size());
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  std::string summary = "bc,beta,anchor,b_star,oracle_slope,agreement,lambda_left,c_right,predicted_c_right,pass,error\n";
  bool any_error = false, any_fail = false;
  for (const Job& job : jobs) {
    std::optional<double> lambda, c_right, predicted;
    if (job.report && job.report->tails) {
      lambda = job.report->tails->lambda_left;
      c_right = job.report->tails->c_right;
      predicted = job.report->tails->predicted_c_right;
    }
    const bool pass = job.report && job.report->pass;
    any_error |= !job.report;
    any_fail |= job.report && !pass;
    summary += std::string(to_string(bc)) + "," + csv_number(job.beta.value) + "," + csv_number(job.anchor.value) +
               "," + csv_number(job.report ? job.report->b_star : std::nullopt) + "," +
               csv_number(job.report ? job.report->oracle_slope : std::nullopt) + "," +
               csv_number(job.report ? job.report->agreement : std::nullopt) + "," + csv_number(lambda) + "," +
               csv_number(c_right) + "," + csv_number(predicted) + "," + (pass ? "true" : "false") + "," +
               csv_field(job.error) + "\n";
    if (!job.error.empty()) std::cerr << "error: beta " << job.beta.token << ", anchor " << job.anchor.token << ": " << job.error << "\n";
  }
  io::write_text(c.out_dir + "/summary.csv", summary);
  std::printf("%s %zu combinations, summary in %s/summary.csv\n", any_error || any_fail ? "FAIL" : "PASS",
              jobs.size(), c.out_dir.c_str());
  return any_error ? kExitError : any_fail ? kExitGate : kExitPass;
}

std::string default_sidecar(const std::string& csv) {
  fs::path p(csv);
  if (p.extension() == ".csv") p.replace_extension(".json");
  else p += ".json";
  return p.string();
}

int cmd_verify(const RunConfig& c) {
  const std::string sidecar_path = c.sidecar.empty() ? default_sidecar(c.csv) : c.sidecar;
  const json sidecar = json::parse(io::read_text(sidecar_path));
  const json& cfg = sidecar.contains("config") ? sidecar.at("config") : sidecar;

  ModelParams p;
  p.beta = cfg.at("beta").get<double>();
  p.branch = io::parse_branch(cfg.value("branch", std::string("upper")));
  if (cfg.contains("tolerances")) {
    const json& t = cfg.at("tolerances");
    p.tol = {t.value("abs_tol", p.tol.abs_tol), t.value("rel_tol", p.tol.rel_tol), t.value("slope_tol", p.tol.slope_tol)};
  }
  const BoundaryCondition bc = io::parse_bc(cfg.at("bc").get<std::string>());
  const double spacing = cfg.value("spacing", 0.01);

  const io::ProfileTable table = io::parse_csv(io::read_text(c.csv));
  WallProfile prof = io::profile_from_table(table, bc, p, spacing);
  if (sidecar.contains("shape")) prof.truncated = sidecar["shape"].value("truncated", false);
  DiagnosticsReport rep = diagnose(prof);

  const double columns = io::column_consistency(table, prof);
  rep.gates.push_back({"column_consistency", columns, kRoundTripTolerance, columns <= kRoundTripTolerance});
  if (sidecar.contains("residuals")) {
    const json fresh = io::residuals_json(rep);
    double worst = 0.0;
    for (const auto& [key, stored] : sidecar.at("residuals").items()) {
      if (!stored.is_number() || !fresh.contains(key) || !fresh.at(key).is_number()) continue;
      worst = std::max(worst, std::abs(fresh.at(key).get<double>() - stored.get<double>()));
    }
    rep.gates.push_back({"sidecar_agreement", worst, kRoundTripTolerance, worst <= kRoundTripTolerance});
  }
  rep.pass = std::all_of(rep.gates.begin(), rep.gates.end(), [](const Gate& g) { return g.pass; });

  json cfg_out = cfg;
  cfg_out["anchor"] = io::number(prof.anchor);
  const std::string text = io::dump(io::report_json(rep, cfg_out));
  if (c.report_out.empty() || c.report_out == "-") std::cout << text;
  else io::write_text(c.report_out, text);

  for (const Gate& g : rep.gates) {
    if (!g.pass && g.name == "bps_r2") std::cerr << "bps_r2 worst at x = " << rep.bps.r2_x << "\n";
  }
  print_gates(rep);
  std::fprintf(stderr, "%s %s\n", rep.pass ? "PASS" : "FAIL", c.csv.c_str());
  return rep.pass ? kExitPass : kExitGate;
}

int cmd_slope(const RunConfig& c) {
  if (!c.a) throw ParamError("--a is required");
  const ModelParams p = model_params(c, c.beta);
  const ShootingOutcome s = find_critical_slope(*c.a, p);
  std::printf("b_star=%.17g oracle=%.17g agreement=%.17g iterations=%d b_lo=%.17g b_hi=%.17g\n", s.b_star,
              s.oracle_slope, s.agreement, s.iterations, s.b_lo, s.b_hi);
  return s.agreement <= thresholds::kSlopeAgreement ? kExitPass : kExitGate;
}

// Config file: flat "key = value" lines, '#' comments. Keys are long option
// names. The entries are spliced in right after the subcommand, so later
// command-line flags take precedence.
std::vector<std::string> config_arguments(const std::string& path) {
  const std::string text = io::read_text(path);
  std::vector<std::string> args;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value in " + path, lineno);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    if (key.empty() || key == "config") throw ParseError("invalid key in " + path, lineno);
    std::replace(key.begin(), key.end(), '_', '-');
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void add_model_options(CLI::App* sub, RunConfig& c) {
  sub->add_option("--bc", c.bc, "higgs-magnetic | magnetic-magnetic")
      ->check(CLI::IsMember({"higgs-magnetic", "magnetic-magnetic"}));
  sub->add_option("--spacing", c.spacing, "grid spacing");
  sub->add_option("--x-min", c.x_min, "left end (higgs-magnetic)");
  sub->add_option("--x-max", c.x_max, "right end (higgs-magnetic)");
  sub->add_option("--half-window", c.half_window, "half width (magnetic-magnetic)");
  sub->add_option("--abs-tol", c.tol.abs_tol, "absolute integration tolerance");
  sub->add_option("--rel-tol", c.tol.rel_tol, "relative integration tolerance");
  sub->add_option("--slope-tol", c.tol.slope_tol, "bisection width on the slope");
  sub->add_option("--branch", c.branch, "upper | lower")->check(CLI::IsMember({"upper", "lower"}));
  sub->add_option("--config", c.config, "flat key = value config file");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Born-Infeld Abelian Higgs BPS domain walls"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* solve = app.add_subcommand("solve", "solve one wall, write <out>.csv and <out>.json");
  add_model_options(solve, c);
  solve->add_option("--beta", c.beta, "Born parameter, 0 <= beta < 4");
  solve->add_option("--a", c.a, "anchor a > 0, u(0) = -a (higgs-magnetic)");
  solve->add_option("--u0", c.u0, "maximum u0 < 0 (magnetic-magnetic)");
  solve->add_option("--out", c.out, "output prefix");
  solve->add_flag("--emit-plot-data", c.emit_plot_data, "also write two-column .dat files");

  auto* sweep = app.add_subcommand("sweep", "solve every (beta, anchor) pair concurrently");
  add_model_options(sweep, c);
  sweep->add_option("--betas", c.betas, "comma-separated beta values")->required();
  sweep->add_option("--anchors", c.anchors, "comma-separated a (or u0) values");
  sweep->add_option("--out-dir", c.out_dir, "output directory");

  auto* verify = app.add_subcommand("verify", "recompute every residual of a profile CSV");
  verify->add_option("csv", c.csv, "profile CSV")->required();
  verify->add_option("--report", c.sidecar, "JSON sidecar (default: CSV path with .json)");
  verify->add_option("--out", c.report_out, "write the report here instead of stdout");
  verify->add_option("--config", c.config, "flat key = value config file");

  auto* slope = app.add_subcommand("slope", "critical slope by bisection and by the first integral");
  slope->add_option("--a", c.a, "anchor a > 0")->required();
  slope->add_option("--beta", c.beta, "Born parameter");
  slope->add_option("--abs-tol", c.tol.abs_tol, "absolute integration tolerance");
  slope->add_option("--rel-tol", c.tol.rel_tol, "relative integration tolerance");
  slope->add_option("--slope-tol", c.tol.slope_tol, "bisection width on the slope");
  slope->add_option("--config", c.config, "flat key = value config file");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (auto path = find_config(args); path && !args.empty()) {
      auto extra = config_arguments(*path);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*solve) return cmd_solve(c);
    if (*sweep) return cmd_sweep(c);
    if (*verify) return cmd_verify(c);
    if (*slope) return cmd_slope(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
