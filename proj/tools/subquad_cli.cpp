// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT
//
// Command-line laboratory for the two-component Neumann system: threshold
// constants, hypothesis checks, multiplicity search, parameter sweeps,
// perturbation stability, and independent re-verification of saved results.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subquad/subquad.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subquad;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSearch = 3;
constexpr int kExitHypothesis = 4;
constexpr int kExitCertificate = 5;

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool quiet = false;
};

struct Lab {
  RunConfig cfg;
  std::shared_ptr<const GridDomain> grid;
  CoefficientField coeffs;
  Nonlinearity nl;
  bool quiet = false;
  fs::path out;
};

Lab make_lab(const CliOptions& opt) {
  Lab lab;
  lab.cfg = parse_config_file(opt.config_path);
  if (opt.seed) lab.cfg.solver.rng_seed = *opt.seed;
  if (opt.out_dir) lab.cfg.out_dir = *opt.out_dir;
  lab.quiet = opt.quiet || lab.cfg.quiet;
  try {
    lab.grid = build_grid(lab.cfg);
    lab.coeffs = build_coefficients(lab.cfg, lab.grid);
    lab.nl = build_nonlinearity(lab.cfg);
  } catch (const DomainError& e) {
    // Everything built here came straight from the config file, so a domain
    // violation (e.g. a nonpositive coefficient field) is a config error.
    throw UsageError(e.what());
  }
  lab.out = lab.cfg.out_dir;
  fs::create_directories(lab.out);
  return lab;
}

std::ostream& say(const Lab& lab) {
  static std::ofstream devnull;
  if (lab.quiet) {
    devnull.setstate(std::ios_base::badbit);
    return devnull;
  }
  return std::cout;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

json threshold_json(const ThresholdReport& rep) {
  json j;
  j["s_F"] = rep.s_F;
  j["S_F"] = rep.S_F;
  j["argmax_sF"] = {rep.argmax_sF[0], rep.argmax_sF[1]};
  j["argmax_SF"] = {rep.argmax_SF[0], rep.argmax_SF[1]};
  j["stationarity_residual"] = rep.stationarity;
  j["interval"] = {{"lower", 1.0 / rep.S_F}, {"upper", 1.0 / rep.s_F}};
  j["grid_points"] = rep.grid_points;
  j["refine_iterations"] = rep.refine_iterations;
  auto pts = json::array();
  for (const auto& p : rep.co_maximizers_sF) pts.push_back({p[0], p[1]});
  j["co_maximizers_sF"] = pts;
  pts = json::array();
  for (const auto& p : rep.co_maximizers_SF) pts.push_back({p[0], p[1]});
  j["co_maximizers_SF"] = pts;
  return j;
}

ThresholdReport compute_and_report_thresholds(Lab& lab) {
  const auto nb = norms(lab.coeffs);
  const auto rep = compute_thresholds(lab.nl, nb, lab.cfg.thresholds);
  say(lab) << "s_F = " << format_double(rep.s_F) << " at (s, t) = ("
           << format_double(rep.argmax_sF[0]) << ", " << format_double(rep.argmax_sF[1])
           << ")\n"
           << "S_F = " << format_double(rep.S_F) << " at (s, t) = ("
           << format_double(rep.argmax_SF[0]) << ", " << format_double(rep.argmax_SF[1])
           << ")\n"
           << "stationarity residual at s_F argmax: " << format_double(rep.stationarity)
           << "\n"
           << "interval of interest: [1/S_F, 1/s_F] = [" << format_double(1.0 / rep.S_F)
           << ", " << format_double(1.0 / rep.s_F) << "]\n";
  return rep;
}

int cmd_thresholds(const CliOptions& opt) {
  Lab lab = make_lab(opt);
  const auto rep = compute_and_report_thresholds(lab);
  write_json(lab.out / "thresholds.json", threshold_json(rep));
  say(lab) << "wrote " << (lab.out / "thresholds.json").string() << "\n";
  return kExitOk;
}

int cmd_check_hypotheses(const CliOptions& opt) {
  Lab lab = make_lab(opt);
  const auto radii = log_spaced(1e-6, 1e6, 49);
  const auto rep = check_hypotheses(lab.nl, radii, 64, 1e-6);

  json j;
  j["nonlinearity"] = lab.nl.name;
  j["nonnegative"] = rep.f_plus_ok;
  j["not_identically_zero"] = rep.nonzero_seen;
  j["gradient_ratio_decays_at_zero"] = rep.decay_at_zero_ok;
  j["gradient_ratio_decays_at_infinity"] = rep.decay_at_infinity_ok;
  j["max_gradient_ratio"] = rep.M_estimate;
  j["pass"] = rep.pass;
  write_json(lab.out / "hypotheses.json", j);

  say(lab) << "nonlinearity: " << lab.nl.name << "\n"
           << "  F >= 0 and F(0,0) = 0:        " << (rep.f_plus_ok ? "yes" : "NO") << "\n"
           << "  F not identically zero:      " << (rep.nonzero_seen ? "yes" : "NO (degenerate)")
           << "\n"
           << "  gradient ratio -> 0 at zero: " << (rep.decay_at_zero_ok ? "yes" : "NO") << "\n"
           << "  gradient ratio -> 0 at inf:  " << (rep.decay_at_infinity_ok ? "yes" : "NO")
           << "\n"
           << "  max sampled gradient ratio:  " << format_double(rep.M_estimate) << "\n"
           << (rep.pass ? "hypotheses: PASS\n" : "hypotheses: FAIL\n");
  return rep.pass ? kExitOk : kExitHypothesis;
}

double resolve_single_lambda(const Lab& lab, const ThresholdReport& thr) {
  if (lab.cfg.lambda.empty())
    throw UsageError("this command needs lambda in [solver] (e.g. lambda = 2/s_F)");
  const auto lambdas = resolve_lambdas(lab.cfg.lambda, thr.s_F, thr.S_F);
  if (lambdas.size() != 1)
    throw UsageError("this command needs exactly one lambda, got " +
                     std::to_string(lambdas.size()));
  return lambdas.front();
}

// At lambda * S_F < 1 the inequality chain certifies that the trivial state
// is the only solution; probe it at seeded random states and at everything
// the search returned.
int attach_certificate(Lab& lab, const DiscreteSystem& sys, double S_F,
                       const std::vector<Solution>& sols) {
  double worst_violation = 0.0;
  Rng rng(Rng::mix(lab.cfg.solver.rng_seed, 0x9e3779b97f4a7c15ULL));
  for (int k = 0; k < 100; ++k) {
    const auto st = random_state(sys.grid->n_nodes(), rng, 1.0 + 2.0 * rng.uniform());
    const auto rep = nonexistence_certificate(sys, st, S_F);
    worst_violation = std::max(worst_violation, rep.nodewise_max_rel_violation);
  }

  bool failed = worst_violation > 1e-12;
  json j;
  j["lambda_times_SF"] = sys.lambda * S_F;
  j["verdict"] = "nonexistence-certified";
  j["probe_states"] = 100;
  j["nodewise_max_rel_violation"] = worst_violation;
  auto arr = json::array();
  for (const auto& s : sols) {
    if (s.classification == Classification::Trivial) continue;
    const auto rep = nonexistence_certificate(sys, s.state, S_F);
    arr.push_back({{"energy", s.energy},
                   {"lhs", rep.lhs},
                   {"mid", rep.mid},
                   {"rhs", rep.rhs},
                   {"ratio", rep.ratio}});
    failed = true;  // a certified-nonexistence lambda admits no nontrivial solution
  }
  j["nontrivial_solutions"] = arr;
  if (failed) j["verdict"] = "certificate-FAILED";
  write_json(lab.out / "certificate.json", j);

  if (failed) {
    std::cerr << "certificate FAILED: lambda*S_F = " << format_double(sys.lambda * S_F)
              << " < 1 but the check did not hold (violation "
              << format_double(worst_violation) << ", nontrivial solutions: " << arr.size()
              << ")\n";
    return kExitCertificate;
  }
  say(lab) << "certificate: nonexistence-certified (lambda*S_F = "
           << format_double(sys.lambda * S_F)
           << " < 1; max nodewise violation " << format_double(worst_violation) << ")\n";
  return kExitOk;
}

int cmd_solve(const CliOptions& opt) {
  Lab lab = make_lab(opt);
  const auto thr = compute_and_report_thresholds(lab);
  write_json(lab.out / "thresholds.json", threshold_json(thr));
  const double lam = resolve_single_lambda(lab, thr);
  say(lab) << "lambda = " << format_double(lam) << " (lambda*s_F = "
           << format_double(lam * thr.s_F) << ", lambda*S_F = " << format_double(lam * thr.S_F)
           << ")\n";

  auto sys = make_system(lab.coeffs, lab.nl, lam);
  const auto sols = deflated_search(sys, lab.cfg.solver, thr.argmax_sF);

  std::vector<std::string> paths;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "state_%03zu.dat", i);
    const auto p = lab.out / name;
    write_state_file(p.string(), *lab.grid, sols[i].state);
    paths.push_back(p.string());
  }
  write_solutions_csv((lab.out / "solutions.csv").string(), lam, sols, paths);

  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& s = sols[i];
    say(lab) << "solution " << i << ": " << to_string(s.classification)
             << ", energy = " << format_double(s.energy)
             << ", residual = " << format_double(s.residual_norm) << " -> " << paths[i]
             << "\n";
  }
  say(lab) << "wrote " << (lab.out / "solutions.csv").string() << "\n";

  if (lam * thr.S_F < 1.0) return attach_certificate(lab, sys, thr.S_F, sols);
  return kExitOk;
}

int cmd_sweep(const CliOptions& opt) {
  Lab lab = make_lab(opt);
  const auto thr = compute_and_report_thresholds(lab);
  if (lab.cfg.lambda.empty())
    throw UsageError("sweep needs lambda in [solver] (e.g. lambda = linspace(0.2/S_F, 3/s_F, 12))");
  const auto lambdas = resolve_lambdas(lab.cfg.lambda, thr.s_F, thr.S_F);

  auto base = make_system(lab.coeffs, lab.nl, 0.0);
  const auto rep = sweep(base, lambdas, lab.cfg.solver, thr);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";

  write_sweep_csv((lab.out / "sweep.csv").string(), rep);
  say(lab) << "lambda        n_nontrivial  min_energy      status\n";
  for (const auto& row : rep.rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-13.6g %-13d %-15.6g %s", row.lambda,
                  row.n_nontrivial, row.min_energy, row.status.c_str());
    say(lab) << line << "\n";
  }
  say(lab) << "wrote " << (lab.out / "sweep.csv").string() << "\n";

  for (const auto& row : rep.rows)
    if (row.status != "ok") return kExitInternal;
  return kExitOk;
}

int cmd_perturb(const CliOptions& opt) {
  Lab lab = make_lab(opt);
  const auto thr = compute_and_report_thresholds(lab);
  const double lam = resolve_single_lambda(lab, thr);
  const auto G = build_perturbation(lab.cfg);
  const auto mus = resolve_mus(lab.cfg.mus, lam);

  auto sys = make_system(lab.coeffs, lab.nl, lam);
  const auto d = lab.coeffs.d;
  const auto rep = perturbation_stability(sys, G, d, mus, lab.cfg.solver);

  std::ofstream csv(lab.out / "perturb.csv");
  if (!csv) throw UsageError("cannot write perturb.csv");
  csv << "mu,n_nontrivial,count_preserved,max_drift,status\n";
  say(lab) << "base nontrivial count: " << rep.base_nontrivial << "\n";
  for (const auto& row : rep.rows) {
    csv << format_double(row.mu) << "," << row.n_nontrivial << ","
        << (row.count_preserved ? "true" : "false") << "," << format_double(row.max_drift)
        << "," << csv_quote(row.status) << "\n";
    say(lab) << "mu = " << format_double(row.mu) << ": count " << row.n_nontrivial
             << (row.count_preserved ? " (preserved)" : " (CHANGED)") << ", max drift "
             << format_double(row.max_drift) << ", " << row.status << "\n";
  }
  say(lab) << "wrote " << (lab.out / "perturb.csv").string() << "\n";

  for (const auto& row : rep.rows)
    if (row.status != "ok") return kExitInternal;
  return kExitOk;
}

// Minimal RFC-4180 row split (quotes and doubled quotes).
std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

int cmd_verify(const CliOptions& opt) {
  Lab lab = make_lab(opt);
  const auto csv_path = lab.out / "solutions.csv";
  std::ifstream in(csv_path);
  if (!in)
    throw UsageError("verify: cannot open '" + csv_path.string() +
                     "' (run the solve command first)");

  std::string line;
  if (!std::getline(in, line)) throw UsageError("verify: empty solutions.csv");
  int checked = 0, failed = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 8) throw UsageError("verify: malformed row: " + line);
    const double lam = std::stod(fields[1]);
    const double recorded = std::stod(fields[4]);
    const std::string& state_path = fields[7];

    StateFileHeader hdr;
    const auto st = read_state_file(state_path, &hdr);
    if (hdr.dim != lab.grid->dim || hdr.counts[0] != lab.grid->counts[0] ||
        (hdr.dim == 2 && hdr.counts[1] != lab.grid->counts[1])) {
      std::cerr << "verify: grid mismatch for " << state_path << "\n";
      ++failed;
      ++checked;
      continue;
    }
    auto sys = make_system(lab.coeffs, lab.nl, lam);
    const auto g = energy_gradient(sys, st);
    const double res = std::sqrt(dot(g.u, g.u) + dot(g.v, g.v));
    const bool ok = res <= recorded + 1e-12;
    say(lab) << fields[7] << ": recorded " << format_double(recorded) << ", recomputed "
             << format_double(res) << (ok ? " [ok]" : " [MISMATCH]") << "\n";
    if (!ok) ++failed;
    ++checked;
  }
  say(lab) << checked << " record(s) checked, " << failed << " failure(s)\n";
  return failed == 0 ? kExitOk : kExitCertificate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for a two-component semilinear Neumann system"};
  app.require_subcommand(1);

  CliOptions opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "configuration file")->required();
    sub->add_option("--seed", opt.seed, "override the RNG seed");
    sub->add_option("--out", opt.out_dir, "override the output directory");
    sub->add_flag("--quiet", opt.quiet, "suppress progress output");
  };

  auto* thresholds = app.add_subcommand("thresholds", "compute the threshold constants");
  auto* hypotheses =
      app.add_subcommand("check-hypotheses", "check the structural hypotheses on F");
  auto* solve = app.add_subcommand("solve", "multiplicity search at a single lambda");
  auto* sweeps = app.add_subcommand("sweep", "multiplicity counts across a lambda list");
  auto* perturb = app.add_subcommand("perturb", "stability under a small perturbation");
  auto* verify = app.add_subcommand("verify", "re-verify saved solution records");
  for (auto* sub : {thresholds, hypotheses, solve, sweeps, perturb, verify}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (thresholds->parsed()) return cmd_thresholds(opt);
    if (hypotheses->parsed()) return cmd_check_hypotheses(opt);
    if (solve->parsed()) return cmd_solve(opt);
    if (sweeps->parsed()) return cmd_sweep(opt);
    if (perturb->parsed()) return cmd_perturb(opt);
    if (verify->parsed()) return cmd_verify(opt);
  } catch (const SearchError& e) {
    std::cerr << "threshold search error: " << e.what() << "\n";
    return kExitSearch;
  } catch (const UsageError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
