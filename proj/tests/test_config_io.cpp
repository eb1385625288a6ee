// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT
//
// Config-file parsing (sections, key grammar, lambda/mu lists, diagnostics
// with line numbers) and the plain-text/CSV emission helpers.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <subquad/config.hpp>
#include <subquad/io.hpp>
#include <subquad/rng.hpp>

#include "helpers.hpp"

namespace subquad {
namespace {

namespace st = subquad::testing;
namespace fs = std::filesystem;

RunConfig parse(const std::string& text) { return parse_config_text(text, "test.cfg"); }

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "test.cfg");
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultsWithEmptyInput) {
  auto cfg = parse("");
  EXPECT_EQ(cfg.dim, 2);
  EXPECT_EQ(cfg.counts[0], 17);
  EXPECT_EQ(cfg.counts[1], 17);
  EXPECT_DOUBLE_EQ(cfg.lengths[0], 1.0);
  EXPECT_EQ(cfg.a_expr, "1");
  EXPECT_EQ(cfg.nl_name, "log-coupled");
  EXPECT_TRUE(cfg.nl_expr.empty());
  EXPECT_TRUE(cfg.lambda.empty());
  EXPECT_EQ(cfg.out_dir, "out");
  EXPECT_FALSE(cfg.quiet);
  ASSERT_EQ(cfg.mus.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.mus[0].value, 0.0);
  EXPECT_TRUE(cfg.mus[1].times_lambda);
}

TEST(Config, FullFileParses) {
  auto cfg = parse(R"(# comment
[domain]
dim = 1
lengths = 2.5
counts = 33

[coefficients]
a = 1+x
b = 2
c = 0.5   ; trailing comment

[nonlinearity]
expression = ln(1+s^2*t^2)

[solver]
lambda = 0.5/S_F, linspace(1/s_F, 3/s_F, 4), 2.0
seed = 99
grad_tol_abs = 1e-9
n_starts = 7
max_iters = 123

[thresholds]
n_radii = 80
r_max = 1e3

[perturbation]
g_expression = s^2*t^2/(1+s^2*t^2)
mus = 0, 1e-3, 2e-4*lambda

[output]
dir = results
quiet = true
)");
  EXPECT_EQ(cfg.dim, 1);
  EXPECT_DOUBLE_EQ(cfg.lengths[0], 2.5);
  EXPECT_EQ(cfg.counts[0], 33);
  EXPECT_EQ(cfg.a_expr, "1+x");
  EXPECT_EQ(cfg.c_expr, "0.5");
  EXPECT_EQ(cfg.nl_expr, "ln(1+s^2*t^2)");
  EXPECT_EQ(cfg.solver.rng_seed, 99u);
  EXPECT_DOUBLE_EQ(cfg.solver.grad_tol_abs, 1e-9);
  EXPECT_EQ(cfg.solver.n_starts, 7);
  EXPECT_EQ(cfg.solver.max_iters, 123);
  EXPECT_EQ(cfg.thresholds.n_radii, 80);
  EXPECT_DOUBLE_EQ(cfg.thresholds.r_max, 1e3);
  EXPECT_EQ(cfg.g_expr, "s^2*t^2/(1+s^2*t^2)");
  ASSERT_EQ(cfg.mus.size(), 3u);
  EXPECT_TRUE(cfg.mus[2].times_lambda);
  EXPECT_DOUBLE_EQ(cfg.mus[2].value, 2e-4);
  EXPECT_EQ(cfg.out_dir, "results");
  EXPECT_TRUE(cfg.quiet);

  // The lambda list resolves against computed thresholds.
  auto ls = resolve_lambdas(cfg.lambda, 0.8, 1.0);
  ASSERT_EQ(ls.size(), 6u);
  EXPECT_DOUBLE_EQ(ls[0], 0.5);
  EXPECT_DOUBLE_EQ(ls[1], 1.25);
  EXPECT_DOUBLE_EQ(ls[4], 3.75);
  EXPECT_DOUBLE_EQ(ls[5], 2.0);
}

TEST(Config, TwoValueDomainKeys) {
  auto cfg = parse("[domain]\ndim = 2\nlengths = 1.5 2.5\ncounts = 9, 11\n");
  EXPECT_DOUBLE_EQ(cfg.lengths[1], 2.5);
  EXPECT_EQ(cfg.counts[0], 9);
  EXPECT_EQ(cfg.counts[1], 11);
  // A single value is duplicated across both axes.
  auto cfg2 = parse("[domain]\ndim = 2\ncounts = 21\n");
  EXPECT_EQ(cfg2.counts[1], 21);
}

TEST(Config, ErrorsCarryOriginAndLineNumber) {
  EXPECT_NE(error_of("[domain]\ndim = 5\n").find("test.cfg:2"), std::string::npos);
  EXPECT_NE(error_of("[bogus]\n").find("test.cfg:1"), std::string::npos);
  EXPECT_NE(error_of("[solver]\nnope = 1\n").find("nope"), std::string::npos);
  EXPECT_NE(error_of("[domain]\ndim\n").find("test.cfg:2"), std::string::npos);
  EXPECT_NE(error_of("key = 1\n").find("outside"), std::string::npos);
}

TEST(Config, NameAndExpressionAreExclusive) {
  const std::string bad = "[nonlinearity]\nname = log-coupled\nexpression = s*t\n";
  EXPECT_NE(error_of(bad).find("both"), std::string::npos);
}

TEST(Config, BadValuesAreRejected) {
  EXPECT_FALSE(error_of("[domain]\ncounts = 2\n").empty());
  EXPECT_FALSE(error_of("[domain]\nlengths = -1\n").empty());
  EXPECT_FALSE(error_of("[solver]\nlambda = linspace(1,2)\n").empty());
  EXPECT_FALSE(error_of("[solver]\nlambda = linspace(1,2,0)\n").empty());
  EXPECT_FALSE(error_of("[solver]\nlambda = 1/junk\n").empty());
  EXPECT_FALSE(error_of("[solver]\nmax_iters = banana\n").empty());
  EXPECT_FALSE(error_of("[perturbation]\nmus = 1e-3*mu\n").empty());
}

TEST(Config, GradTolRelAcceptsAuto) {
  auto cfg = parse("[solver]\ngrad_tol_rel = auto\n");
  EXPECT_LT(cfg.solver.grad_tol_rel, 0.0);
  auto cfg2 = parse("[solver]\ngrad_tol_rel = 1e-8\n");
  EXPECT_DOUBLE_EQ(cfg2.solver.grad_tol_rel, 1e-8);
}

TEST(Config, LambdaThresholdDivisors) {
  auto cfg = parse("[solver]\nlambda = 2/s_F\n");
  auto ls = resolve_lambdas(cfg.lambda, 0.8047423425494118, 1.0);
  ASSERT_EQ(ls.size(), 1u);
  EXPECT_DOUBLE_EQ(ls[0], 2.0 / 0.8047423425494118);
}

TEST(Config, LinspaceSinglePointAndThresholdEndpoints) {
  auto cfg = parse("[solver]\nlambda = linspace(0.2/S_F, 3/s_F, 1)\n");
  auto ls = resolve_lambdas(cfg.lambda, 0.8, 2.0);
  ASSERT_EQ(ls.size(), 1u);
  EXPECT_DOUBLE_EQ(ls[0], 0.1);
}

TEST(Config, BuildersProduceWorkingObjects) {
  auto cfg = parse(
      "[domain]\ndim = 1\ncounts = 5\n"
      "[coefficients]\na = 1+x\nd = x\n"
      "[nonlinearity]\nexpression = s^2*t^2\n");
  auto grid = build_grid(cfg);
  EXPECT_EQ(grid->n_nodes(), 5);
  auto coeffs = build_coefficients(cfg, grid);
  EXPECT_DOUBLE_EQ(coeffs.a[4], 2.0);
  ASSERT_TRUE(coeffs.d.has_value());
  EXPECT_DOUBLE_EQ((*coeffs.d)[2], 0.5);
  auto nl = build_nonlinearity(cfg);
  EXPECT_DOUBLE_EQ(eval(nl, 2.0, 3.0), 36.0);
  auto G = build_perturbation(cfg);
  EXPECT_DOUBLE_EQ(eval(G, 1.0, 1.0), std::log(2.0));  // default g_name
}

TEST(Config, NonPositiveCoefficientFieldFailsAtBuild) {
  auto cfg = parse("[domain]\ndim = 1\ncounts = 5\n[coefficients]\na = x - 0.5\n");
  auto grid = build_grid(cfg);
  EXPECT_THROW(build_coefficients(cfg, grid), DomainError);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double x : {3.141592653589793, -1.0 / 3.0, 0.1, 1e-300, 2.485267512660051724}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(Io, CsvQuoting) {
  EXPECT_EQ(csv_quote("plain"), "plain");
  EXPECT_EQ(csv_quote("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_quote("line\nbreak"), "\"line\nbreak\"");
}

TEST(Io, StateFileRoundTripIsExact) {
  auto g = st::rectangle(4, 3, 1.0, 2.0);
  Rng rng(55);
  StatePair x = random_state(g->n_nodes(), rng, 2.0);
  const auto path = fs::temp_directory_path() / "subquad_state_roundtrip.dat";
  write_state_file(path.string(), *g, x);
  StateFileHeader hdr;
  StatePair y = read_state_file(path.string(), &hdr);
  EXPECT_EQ(hdr.dim, 2);
  EXPECT_EQ(hdr.counts[0], 4);
  EXPECT_EQ(hdr.counts[1], 3);
  EXPECT_DOUBLE_EQ(hdr.lengths[1], 2.0);
  EXPECT_EQ(x.u, y.u);  // bit-exact through %.17g
  EXPECT_EQ(x.v, y.v);
  fs::remove(path);
}

TEST(Io, StateFileRejectsTruncationAndGarbage) {
  auto g = st::interval(4);
  StatePair x = zero_state(4);
  const auto path = fs::temp_directory_path() / "subquad_state_trunc.dat";
  write_state_file(path.string(), *g, x);
  // Drop the last line.
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  all.erase(all.find_last_of('\n', all.size() - 2) + 1);
  std::ofstream out(path);
  out << all;
  out.close();
  EXPECT_THROW(read_state_file(path.string()), UsageError);
  EXPECT_THROW(read_state_file("/nonexistent/state.dat"), UsageError);
  fs::remove(path);
}

TEST(Io, SweepCsvHasPinnedHeaderAndSortedRows) {
  SweepReport rep;
  rep.s_F = 0.8;
  rep.S_F = 1.0;
  SweepRow r1;
  r1.lambda = 0.5;
  r1.status = "ok";
  SweepRow r2;
  r2.lambda = 2.0;
  r2.n_nontrivial = 4;
  r2.min_energy = -3.25;
  r2.max_residual = 1e-11;
  r2.status = "ok";
  rep.rows = {r1, r2};
  const std::string text = sweep_csv_text(rep);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "lambda,lambda_times_sF,lambda_times_SF,n_nontrivial,min_energy,max_residual,status");
  // Full-precision %.17g formatting: 0.5 * 0.8 is not exactly representable,
  // so the second column carries the usual 17-digit spelling.
  EXPECT_NE(text.find("\n0.5,0.40000000000000002,0.5,0,0,0,ok"), std::string::npos) << text;
  EXPECT_NE(
      text.find("\n2,1.6000000000000001,2,4,-3.25,9.9999999999999994e-12,ok"),
      std::string::npos)
      << text;
}

TEST(Io, SolutionsCsvListsStateFiles) {
  auto g = st::interval(3);
  Solution sol;
  sol.state = constant_state(3, 1.0, 2.0);
  sol.energy = -1.5;
  sol.residual_norm = 1e-12;
  sol.classification = Classification::NontrivialNegativeEnergy;
  sol.iterations = 4;
  sol.start_id = 2;
  const auto dir = fs::temp_directory_path() / "subquad_solutions_csv";
  fs::create_directories(dir);
  write_solutions_csv((dir / "solutions.csv").string(), 2.5, {sol}, {"state_000.dat"});
  std::ifstream in(dir / "solutions.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "index,lambda,classification,energy,residual_norm,iterations,start_id,state_file");
  EXPECT_NE(row.find("nontrivial-negative-energy"), std::string::npos);
  EXPECT_NE(row.find("state_000.dat"), std::string::npos);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace subquad
