// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT
//
// Deflated multiplicity search at a single parameter value: pick lambda above
// the multiplicity threshold, hunt for nontrivial solution branches, and
// print an energy/residual table plus the nonexistence certificate verdict
// for a parameter below the other threshold.
//
//   ./example_branches [lambda_multiplier]   (default 2, i.e. lambda = 2/s_F)

#include <cstdio>
#include <cstdlib>
#include <memory>

#include <subquad/subquad.hpp>

using namespace subquad;

int main(int argc, char** argv) {
  const double multiplier = argc > 1 ? std::atof(argv[1]) : 2.0;

  auto grid = std::make_shared<const GridDomain>(
      build_uniform_grid(2, {1.0, 1.0}, {17, 17}));
  auto coeffs = constant_coefficients(grid, 1.0, 1.0, 1.0);
  auto nb = norms(coeffs);
  auto thr = compute_thresholds(catalog_log(), nb);
  const double lambda = multiplier / thr.s_F;
  std::printf("s_F = %.8f, S_F = %.8f, lambda = %g/s_F = %.8f\n", thr.s_F, thr.S_F,
              multiplier, lambda);

  auto sys = make_system(coeffs, catalog_log(), lambda);
  SolveConfig cfg;
  auto sols = deflated_search(sys, cfg, thr.argmax_sF);

  std::printf("\n%-4s %-30s %14s %12s %6s\n", "#", "classification", "energy", "residual",
              "iters");
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& s = sols[i];
    std::printf("%-4zu %-30s %14.8f %12.3e %6d\n", i, to_string(s.classification),
                s.energy, s.residual_norm, s.iterations);
  }

  // Below the upper threshold the certificate rules branches out entirely.
  const double lambda_low = 0.5 / thr.S_F;
  auto sys_low = make_system(coeffs, catalog_log(), lambda_low);
  Rng rng(7);
  auto probe = random_state(grid->n_nodes(), rng, 1.0);
  auto cert = nonexistence_certificate(sys_low, probe, thr.S_F);
  std::printf("\nat lambda = 0.5/S_F = %.6f the certificate says: %s\n", lambda_low,
              cert.verdict.c_str());
  std::printf("  (lambda*S_F = %.6f < 1, nodewise violation %.2e)\n", cert.lambda_SF,
              cert.nodewise_max_rel_violation);
  return 0;
}
