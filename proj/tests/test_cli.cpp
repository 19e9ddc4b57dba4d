// Runs the bpswall binary and checks files and exit codes.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bpswall/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(BPSWALL_CLI) + " " + args + " 2>&1";
  CliRun r{-1, ""};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("bpswall_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SolveHiggs) {
  const CliRun r = run("solve --bc higgs-magnetic --beta 0 --a 1 --out " + path("w"));
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = bpswall::io::json::parse(slurp(path("w.json")));
  EXPECT_NEAR(j["slope"]["b_star"].get<double>(), 0.85776388, 1e-8);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(slurp(path("w.csv")).substr(0, 17), "x,u,du,f,a,F12,H\n");
  EXPECT_TRUE(fs::exists(path("w.meta.json")));
}

TEST_F(Cli, SolveMagnetic) {
  const CliRun r = run("solve --bc magnetic-magnetic --beta 2 --u0 -1 --out " + path("m"));
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = bpswall::io::json::parse(slurp(path("m.json")));
  EXPECT_LE(j["residuals"]["symmetry"].get<double>(), 1e-8);
}

TEST_F(Cli, RejectsBetaFour) {
  const CliRun r = run("solve --beta 4 --a 1 --out " + path("x"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("beta < 4"), std::string::npos) << r.out;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("solve --bc sideways --a 1").code, 1);
  EXPECT_EQ(run("solve --bc magnetic-magnetic --out " + path("x")).code, 1);  // no --u0
  EXPECT_EQ(run("solve --bc magnetic-magnetic --u0 0.5 --out " + path("x")).code, 1);
}

TEST_F(Cli, PlotData) {
  ASSERT_EQ(run("solve --a 1 --beta 1 --emit-plot-data --out " + path("p")).code, 0);
  for (const char* s : {"p_u.dat", "p_F12.dat", "p_H.dat"}) EXPECT_TRUE(fs::exists(path(s))) << s;
  std::istringstream in(slurp(path("p_u.dat")));
  double x = 0, u = 0;
  in >> x >> u;
  EXPECT_DOUBLE_EQ(x, -20.0);
}

TEST_F(Cli, Determinism) {
  ASSERT_EQ(run("solve --a 1 --beta 2 --out " + path("a")).code, 0);
  ASSERT_EQ(run("solve --a 1 --beta 2 --out " + path("b")).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, VerifyOwnOutput) {
  ASSERT_EQ(run("solve --a 1 --beta 2 --out " + path("w")).code, 0);
  const CliRun r = run("verify " + path("w.csv") + " --out " + path("v.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  const auto solved = bpswall::io::json::parse(slurp(path("w.json")));
  const auto verified = bpswall::io::json::parse(slurp(path("v.json")));
  EXPECT_EQ(solved["pass"], verified["pass"]);
  for (const auto& [key, v] : solved["residuals"].items()) {
    if (v.is_number()) EXPECT_NEAR(v.get<double>(), verified["residuals"][key].get<double>(), 1e-12) << key;
  }
}

TEST_F(Cli, VerifyCorruptedRow) {
  ASSERT_EQ(run("solve --a 1 --beta 0 --out " + path("w")).code, 0);
  std::string csv = slurp(path("w.csv"));
  // row for x = 1 (k = 100): bump u by 0.01
  const std::size_t header = csv.find('\n') + 1;
  std::size_t pos = header;
  for (int k = 0; k < 2100; ++k) pos = csv.find('\n', pos) + 1;
  const std::size_t end = csv.find('\n', pos);
  std::string line = csv.substr(pos, end - pos);
  const std::size_t c1 = line.find(',');
  const std::size_t c2 = line.find(',', c1 + 1);
  const double x = std::stod(line.substr(0, c1));
  const double u = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", u + 0.01);
  line = line.substr(0, c1 + 1) + buf + line.substr(c2);
  csv.replace(pos, end - pos, line);
  std::ofstream(path("w.csv"), std::ios::binary) << csv;

  const CliRun r = run("verify " + path("w.csv") + " --out " + path("v.json"));
  EXPECT_EQ(r.code, 2) << r.out;
  const auto v = bpswall::io::json::parse(slurp(path("v.json")));
  EXPECT_GT(v["residuals"]["bps_r2"].get<double>(), 1e-6);
  EXPECT_NEAR(v["locations"]["bps_r2_x"].get<double>(), x, 0.02 + 1e-9);
  EXPECT_NE(r.out.find("bps_r2"), std::string::npos);
}

TEST_F(Cli, VerifyRelabeledBeta) {
  ASSERT_EQ(run("solve --a 1 --beta 0 --out " + path("w")).code, 0);
  auto j = bpswall::io::json::parse(slurp(path("w.json")));
  j["config"]["beta"] = 2.0;
  std::ofstream(path("w.json"), std::ios::binary) << j.dump(2);
  const CliRun r = run("verify " + path("w.csv") + " --out " + path("v.json"));
  EXPECT_EQ(r.code, 2);
  const auto v = bpswall::io::json::parse(slurp(path("v.json")));
  EXPECT_GT(v["residuals"]["first_integral"].get<double>(), 1e-9);
}

TEST_F(Cli, VerifyParseErrorHasLineNumber) {
  ASSERT_EQ(run("solve --a 1 --beta 0 --out " + path("w")).code, 0);
  std::string csv = slurp(path("w.csv"));
  std::size_t pos = csv.find('\n') + 1;
  pos = csv.find('\n', pos) + 1;  // start of line 3
  csv.insert(pos, "garbage,");
  std::ofstream(path("w.csv"), std::ios::binary) << csv;
  const CliRun r = run("verify " + path("w.csv"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("line 3"), std::string::npos) << r.out;
}

TEST_F(Cli, Slope) {
  CliRun r = run("slope --a 1 --beta 0");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("b_star=0.85776388", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("oracle=0.85776388"), std::string::npos);
  r = run("slope --a 1e-6 --beta 0");
  EXPECT_EQ(r.code, 0) << r.out;
  r = run("slope --a 2 --beta 3.9");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("nan"), std::string::npos);
}

TEST_F(Cli, Sweep) {
  const CliRun r = run("sweep --betas 0,1,2,3 --anchors 1 --out-dir " + path("s"));
  EXPECT_EQ(r.code, 0) << r.out;
  std::istringstream in(slurp(path("s/summary.csv")));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "bc,beta,anchor,b_star,oracle_slope,agreement,lambda_left,c_right,predicted_c_right,pass,error");
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    const double beta = std::stod(f[1]);
    EXPECT_NEAR(std::stod(f[7]), 2.0 / std::sqrt(4.0 - beta), 1e-3);
    EXPECT_EQ(f[9], "true");
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(fs::exists(path("s/beta_3_anchor_1.json")));
}

TEST_F(Cli, SweepDeduplicates) {
  const CliRun r = run("sweep --betas 1,1,2 --out-dir " + path("s"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("duplicate"), std::string::npos);
  std::istringstream in(slurp(path("s/summary.csv")));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST_F(Cli, SweepEmptyList) {
  EXPECT_EQ(run("sweep --betas \"\" --out-dir " + path("s")).code, 1);
  EXPECT_EQ(run("sweep --out-dir " + path("s")).code, 1);
}

TEST_F(Cli, SweepRecordsFailures) {
  const CliRun r = run("sweep --betas 1,4.5 --out-dir " + path("s"));
  EXPECT_EQ(r.code, 1);
  const std::string summary = slurp(path("s/summary.csv"));
  EXPECT_NE(summary.find("beta < 4"), std::string::npos);
}

TEST_F(Cli, ConfigFilePrecedence) {
  std::ofstream(path("run.cfg")) << "# wall settings\nbc = higgs-magnetic\nbeta = 2\na = 1\nout = " << path("cfg")
                                 << "\n";
  ASSERT_EQ(run("solve --config " + path("run.cfg")).code, 0);
  EXPECT_EQ(bpswall::io::json::parse(slurp(path("cfg.json")))["config"]["beta"].get<double>(), 2.0);
  ASSERT_EQ(run("solve --config " + path("run.cfg") + " --beta 3").code, 0);
  EXPECT_EQ(bpswall::io::json::parse(slurp(path("cfg.json")))["config"]["beta"].get<double>(), 3.0);
  std::ofstream(path("bad.cfg")) << "beta 2\n";
  const CliRun r = run("solve --config " + path("bad.cfg"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("line 1"), std::string::npos);
}
