// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT
//
// End-to-end tests that spawn the command-line binary: exit codes, emitted
// artifacts, determinism, and the verify loop.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <subquad/subquad.hpp>

#include "helpers.hpp"

#ifndef SUBQUAD_CLI_PATH
#error "SUBQUAD_CLI_PATH must be defined by the build"
#endif

namespace subquad {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(SUBQUAD_CLI_PATH) + " " + args + " 2>&1";
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    res.output = "popen failed";
    return res;
  }
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) res.output.append(buf, n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("subquad_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream out(p);
    out << body;
    return p;
  }

  std::string out_arg(const std::string& sub) {
    return "--out " + (dir_ / sub).string();
  }

  fs::path dir_;
};

const char* kSmallBase = R"([domain]
dim = 2
lengths = 1 1
counts = 9 9

[coefficients]
a = 1
b = 1
c = 1

[nonlinearity]
name = log-coupled

[solver]
seed = 1
n_starts = 6
)";

TEST_F(CliTest, ThresholdsMatchReferenceAndEmitJson) {
  auto cfg = write_config("t.cfg", kSmallBase);
  auto res = run_cli("thresholds --config " + cfg.string() + " " + out_arg("o"));
  ASSERT_EQ(res.exit_code, 0) << res.output;
  auto j = json::parse(slurp(dir_ / "o" / "thresholds.json"));
  EXPECT_NEAR(j["s_F"].get<double>(), testing::kLogLowerThreshold, 1e-8);
  EXPECT_NEAR(j["S_F"].get<double>(), testing::kLogUpperThreshold, 1e-8);
  EXPECT_LE(j["interval"]["lower"].get<double>(), j["interval"]["upper"].get<double>());
}

TEST_F(CliTest, DoublingCScalesLowerThresholdExactly) {
  auto cfg1 = write_config("c1.cfg", kSmallBase);
  std::string doubled(kSmallBase);
  doubled.replace(doubled.find("c = 1"), 5, "c = 2");
  auto cfg2 = write_config("c2.cfg", doubled);
  auto r1 = run_cli("thresholds --config " + cfg1.string() + " " + out_arg("a") + " --quiet");
  auto r2 = run_cli("thresholds --config " + cfg2.string() + " " + out_arg("b") + " --quiet");
  ASSERT_EQ(r1.exit_code, 0);
  ASSERT_EQ(r2.exit_code, 0);
  auto j1 = json::parse(slurp(dir_ / "a" / "thresholds.json"));
  auto j2 = json::parse(slurp(dir_ / "b" / "thresholds.json"));
  EXPECT_NEAR(j2["s_F"].get<double>() / j1["s_F"].get<double>(), 2.0, 1e-12);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  auto res = run_cli("thresholds --config /nonexistent.cfg " + out_arg("o"));
  EXPECT_EQ(res.exit_code, 2);

  auto bad = write_config("bad.cfg", "[domain]\ndim = 7\n");
  res = run_cli("thresholds --config " + bad.string() + " " + out_arg("o"));
  EXPECT_EQ(res.exit_code, 2);
  EXPECT_NE(res.output.find("bad.cfg:2"), std::string::npos) << res.output;

  // Coefficient positivity violation is a config-stage failure and names the
  // offending field.
  std::string neg(kSmallBase);
  neg.replace(neg.find("a = 1"), 5, "a = x - 2");
  auto negcfg = write_config("neg.cfg", neg);
  res = run_cli("thresholds --config " + negcfg.string() + " " + out_arg("o"));
  EXPECT_EQ(res.exit_code, 2);
  EXPECT_NE(res.output.find("a"), std::string::npos) << res.output;
}

TEST_F(CliTest, HypothesisCheckPassesCatalogFailsQuadratic) {
  auto cfg = write_config("h.cfg", kSmallBase);
  auto res = run_cli("check-hypotheses --config " + cfg.string() + " " + out_arg("o"));
  EXPECT_EQ(res.exit_code, 0) << res.output;
  auto j = json::parse(slurp(dir_ / "o" / "hypotheses.json"));
  EXPECT_TRUE(j["pass"].get<bool>());

  std::string quad(kSmallBase);
  quad.replace(quad.find("name = log-coupled"), 18, "expression = s^2+t^2");
  auto qcfg = write_config("q.cfg", quad);
  res = run_cli("check-hypotheses --config " + qcfg.string() + " " + out_arg("o2"));
  EXPECT_EQ(res.exit_code, 4) << res.output;
}

TEST_F(CliTest, SolveBelowThresholdCertifiesNonexistence) {
  std::string body(kSmallBase);
  body += "\n[solver]\nlambda = 0.5/S_F\n";
  auto cfg = write_config("s.cfg", body);
  auto res = run_cli("solve --config " + cfg.string() + " " + out_arg("o") + " --quiet");
  ASSERT_EQ(res.exit_code, 0) << res.output;
  auto j = json::parse(slurp(dir_ / "o" / "certificate.json"));
  EXPECT_EQ(j["verdict"].get<std::string>(), "nonexistence-certified");
  EXPECT_LE(j["nodewise_max_rel_violation"].get<double>(), 1e-12);
  // solutions.csv holds exactly the trivial row.
  const std::string csv = slurp(dir_ / "o" / "solutions.csv");
  EXPECT_NE(csv.find("trivial"), std::string::npos);
  EXPECT_EQ(csv.find("nontrivial"), std::string::npos) << csv;
}

TEST_F(CliTest, SolveAboveThresholdFindsBranchesAndVerifyPasses) {
  std::string body(kSmallBase);
  body += "\n[solver]\nlambda = 2/s_F\n";
  auto cfg = write_config("s.cfg", body);
  auto res = run_cli("solve --config " + cfg.string() + " " + out_arg("o") + " --quiet");
  ASSERT_EQ(res.exit_code, 0) << res.output;
  const std::string csv = slurp(dir_ / "o" / "solutions.csv");
  int nontrivial = 0;
  for (std::size_t pos = 0; (pos = csv.find("nontrivial", pos)) != std::string::npos; ++pos)
    ++nontrivial;
  EXPECT_GE(nontrivial, 2) << csv;

  res = run_cli("verify --config " + cfg.string() + " " + out_arg("o") + " --quiet");
  EXPECT_EQ(res.exit_code, 0) << res.output;
}

TEST_F(CliTest, VerifyDetectsTamperedStateFile) {
  std::string body(kSmallBase);
  body += "\n[solver]\nlambda = 2/s_F\n";
  auto cfg = write_config("s.cfg", body);
  auto res = run_cli("solve --config " + cfg.string() + " " + out_arg("o") + " --quiet");
  ASSERT_EQ(res.exit_code, 0) << res.output;

  // Corrupt the first recorded state: bump one nodal value.
  const fs::path state_path = dir_ / "o" / "state_000.dat";
  ASSERT_TRUE(fs::exists(state_path));
  auto grid = std::make_shared<const GridDomain>(build_uniform_grid(2, {1, 1}, {9, 9}));
  StatePair st = read_state_file(state_path.string());
  st.u[40] += 37.0;
  write_state_file(state_path.string(), *grid, st);

  res = run_cli("verify --config " + cfg.string() + " " + out_arg("o") + " --quiet");
  EXPECT_EQ(res.exit_code, 5) << res.output;
}

TEST_F(CliTest, SweepIsByteIdenticalAcrossRunsAndSorted) {
  std::string body(kSmallBase);
  body += "\n[solver]\nlambda = linspace(0.3/S_F, 2.2/s_F, 5)\n";
  auto cfg = write_config("w.cfg", body);
  auto r1 = run_cli("sweep --config " + cfg.string() + " " + out_arg("a") + " --quiet");
  ASSERT_EQ(r1.exit_code, 0) << r1.output;
  auto r2 = run_cli("sweep --config " + cfg.string() + " " + out_arg("b") + " --quiet");
  ASSERT_EQ(r2.exit_code, 0) << r2.output;
  const std::string csv1 = slurp(dir_ / "a" / "sweep.csv");
  const std::string csv2 = slurp(dir_ / "b" / "sweep.csv");
  EXPECT_EQ(csv1, csv2);
  EXPECT_EQ(csv1.substr(0, csv1.find('\n')),
            "lambda,lambda_times_sF,lambda_times_SF,n_nontrivial,min_energy,max_residual,status");

  // A different seed changes the search stream but not determinism.
  auto r3 = run_cli("sweep --config " + cfg.string() + " " + out_arg("c") +
                    " --seed 7 --quiet");
  ASSERT_EQ(r3.exit_code, 0);
  auto r4 = run_cli("sweep --config " + cfg.string() + " " + out_arg("d") +
                    " --seed 7 --quiet");
  ASSERT_EQ(r4.exit_code, 0);
  EXPECT_EQ(slurp(dir_ / "c" / "sweep.csv"), slurp(dir_ / "d" / "sweep.csv"));
}

TEST_F(CliTest, SweepWithoutLambdaListExitsTwo) {
  auto cfg = write_config("w.cfg", kSmallBase);
  auto res = run_cli("sweep --config " + cfg.string() + " " + out_arg("o"));
  EXPECT_EQ(res.exit_code, 2) << res.output;
  EXPECT_NE(res.output.find("lambda"), std::string::npos);
}

TEST_F(CliTest, SolveNeedsExactlyOneLambda) {
  std::string body(kSmallBase);
  body += "\n[solver]\nlambda = 1.0, 2.0\n";
  auto cfg = write_config("s.cfg", body);
  auto res = run_cli("solve --config " + cfg.string() + " " + out_arg("o"));
  EXPECT_EQ(res.exit_code, 2) << res.output;
}

TEST_F(CliTest, PerturbEmitsPerMuRows) {
  std::string body(kSmallBase);
  body += R"(
[solver]
lambda = 2/s_F

[coefficients]
d = 1

[perturbation]
g_name = log-coupled
mus = 0, 1e-4*lambda
)";
  auto cfg = write_config("p.cfg", body);
  auto res = run_cli("perturb --config " + cfg.string() + " " + out_arg("o") + " --quiet");
  ASSERT_EQ(res.exit_code, 0) << res.output;
  std::ifstream in(dir_ / "o" / "perturb.csv");
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_EQ(header, "mu,n_nontrivial,count_preserved,max_drift,status");
  EXPECT_NE(row0.find("0,"), std::string::npos);
  EXPECT_NE(row1.find("true"), std::string::npos) << row1;
}

TEST_F(CliTest, QuietSuppressesProgressOutput) {
  auto cfg = write_config("t.cfg", kSmallBase);
  auto res = run_cli("thresholds --config " + cfg.string() + " " + out_arg("o") + " --quiet");
  ASSERT_EQ(res.exit_code, 0);
  EXPECT_TRUE(res.output.empty()) << res.output;
}

TEST_F(CliTest, SampleConfigsInRepoParse) {
  for (const char* name : {"unit_square.cfg", "sweep.cfg", "perturb.cfg"}) {
    const fs::path p = fs::path(SUBQUAD_CONFIG_DIR) / name;
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_NO_THROW(parse_config_file(p.string())) << name;
  }
}

}  // namespace
}  // namespace subquad
