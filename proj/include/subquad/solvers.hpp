// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_SOLVERS_HPP
#define SUBQUAD_SOLVERS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subquad/common.hpp"
#include "subquad/grid.hpp"
#include "subquad/nonlinearity.hpp"
#include "subquad/rng.hpp"
#include "subquad/system.hpp"
#include "subquad/thresholds.hpp"

namespace subquad {

struct SolveConfig {
  double grad_tol_abs = 1e-10;
  double grad_tol_rel = -1.0;  // auto: 1e-12 * sqrt(nodes); times ||grad(start)||
  int max_iters = 200;
  int n_starts = 20;
  std::uint64_t rng_seed = 1;
  double distinct_tol = 1e-3;      // in the normalized discrete energy norm
  double deflation_power = 2.0;
  double deflation_shift = 1.0;
  double start_amplitude = 0.25;   // random-start entries are U[-amp, amp]
  int cg_max_iters = 600;          // inner solve budget per Newton step
  int polish_iters = 30;           // undeflated Newton budget after deflation
};

inline void validate(const SolveConfig& cfg) {
  if (!(cfg.grad_tol_abs > 0.0)) throw UsageError("SolveConfig: grad_tol_abs must be > 0");
  if (cfg.max_iters < 1) throw UsageError("SolveConfig: max_iters must be >= 1");
  if (cfg.n_starts < 1) throw UsageError("SolveConfig: n_starts must be >= 1");
  if (!(cfg.distinct_tol > 0.0)) throw UsageError("SolveConfig: distinct_tol must be > 0");
  if (!(cfg.deflation_power > 0.0)) throw UsageError("SolveConfig: deflation_power must be > 0");
  if (!(cfg.deflation_shift >= 0.0)) throw UsageError("SolveConfig: deflation_shift must be >= 0");
  if (!(cfg.start_amplitude > 0.0)) throw UsageError("SolveConfig: start_amplitude must be > 0");
}

enum class Classification { Trivial, NontrivialNegativeEnergy, NontrivialNonnegativeEnergy };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::Trivial: return "trivial";
    case Classification::NontrivialNegativeEnergy: return "nontrivial-negative-energy";
    default: return "nontrivial-nonnegative-energy";
  }
}

/// A state is trivial when its Euclidean norm is below 1e-8 * sqrt(nodes),
/// i.e. its root-mean-square size is below 1e-8.
inline Classification classify(const StatePair& st, double energy_value) {
  if (state_rms(st) < 1e-8) return Classification::Trivial;
  return energy_value < 0.0 ? Classification::NontrivialNegativeEnergy
                            : Classification::NontrivialNonnegativeEnergy;
}

struct Solution {
  StatePair state;
  double energy = 0.0;
  double residual_norm = 0.0;
  Classification classification = Classification::Trivial;
  int iterations = 0;
  int start_id = 0;
  bool converged = false;
};

namespace detail {

inline double pdot(const StatePair& x, const StatePair& y) {
  return dot(x.u, y.u) + dot(x.v, y.v);
}

inline double pnorm(const StatePair& x) { return std::sqrt(pdot(x, x)); }

inline void paxpy(double a, const StatePair& x, StatePair& y) {
  axpy(a, x.u, y.u);
  axpy(a, x.v, y.v);
}

inline double resolved_tol(const SolveConfig& cfg, int n_nodes, double g0norm) {
  const double rel = cfg.grad_tol_rel >= 0.0
                         ? cfg.grad_tol_rel
                         : 1e-12 * std::sqrt(static_cast<double>(n_nodes));
  return std::max(cfg.grad_tol_abs, rel * g0norm);
}

// Nonlinear part of the gradient alone: out = lambda q c grad F (+ mu q d grad G).
inline void nonlinear_gradient_into(const DiscreteSystem& sys, const StatePair& st,
                                    std::vector<double>& gu, std::vector<double>& gv) {
  const std::size_t n = st.u.size();
  gu.resize(n);
  gv.resize(n);
  const auto& q = sys.grid->quad_weights;
  const auto& c = sys.coeffs.c;
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = sys.nl.gradient(st.u[i], st.v[i]);
    const double w = sys.lambda * q[i] * c[i];
    gu[i] = w * g[0];
    gv[i] = w * g[1];
  }
  if (sys.perturbation && sys.perturbation->mu != 0.0) {
    const auto& p = *sys.perturbation;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sys.coeffs.d ? (*sys.coeffs.d)[i] : 1.0;
      const auto g = p.G.gradient(st.u[i], st.v[i]);
      gu[i] += p.mu * q[i] * d * g[0];
      gv[i] += p.mu * q[i] * d * g[1];
    }
  }
}

// Nonlinear energy of the shifted state (u - alpha du, v - alpha dv) without
// materializing it; this is what makes each backtracking trial cheap.
inline double nonlinear_energy_shifted(const DiscreteSystem& sys, const StatePair& st,
                                       const std::vector<double>& du,
                                       const std::vector<double>& dv, double alpha) {
  const std::size_t n = st.u.size();
  const auto& q = sys.grid->quad_weights;
  const auto& c = sys.coeffs.c;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += q[i] * c[i] * sys.nl.value(st.u[i] - alpha * du[i], st.v[i] - alpha * dv[i]);
  double total = sys.lambda * acc;
  if (sys.perturbation && sys.perturbation->mu != 0.0) {
    const auto& p = *sys.perturbation;
    double pacc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sys.coeffs.d ? (*sys.coeffs.d)[i] : 1.0;
      pacc += q[i] * d * p.G.value(st.u[i] - alpha * du[i], st.v[i] - alpha * dv[i]);
    }
    total += p.mu * pacc;
  }
  return total;
}

}  // namespace detail

/// Gradient descent with Armijo backtracking (initial step 1.0, halving,
/// sufficient-decrease constant 1e-4). The quadratic part of each trial
/// energy is assembled from precomputed inner products, so a backtracking
/// trial costs one nodewise nonlinear sum and no operator applications.
inline Solution minimize(const DiscreteSystem& sys, const StatePair& start,
                         const SolveConfig& cfg) {
  validate(cfg);
  const int n = sys.grid->n_nodes();
  if (static_cast<int>(start.u.size()) != n || static_cast<int>(start.v.size()) != n)
    throw UsageError("minimize: start state does not match grid node count");
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 40;
  constexpr int kRefreshEvery = 512;  // rebuild cached operator products

  StatePair x = start;
  std::vector<double> au = stiffness_apply(sys, x.u, Side::A);
  std::vector<double> av = stiffness_apply(sys, x.v, Side::B);
  std::vector<double> gu, gv, agu(au.size()), agv(av.size());
  double e_cur = 0.5 * (dot(au, x.u) + dot(av, x.v)) - nonlinear_energy(sys, x);

  Solution sol;
  sol.start_id = 0;
  double tol = cfg.grad_tol_abs;
  double gnorm = 0.0;
  int it = 0;
  for (;; ++it) {
    // Gradient: stiffness action minus the nonlinear part.
    detail::nonlinear_gradient_into(sys, x, gu, gv);
    for (std::size_t i = 0; i < gu.size(); ++i) {
      gu[i] = au[i] - gu[i];
      gv[i] = av[i] - gv[i];
    }
    gnorm = std::sqrt(dot(gu, gu) + dot(gv, gv));
    if (it == 0) tol = detail::resolved_tol(cfg, n, gnorm);
    if (gnorm < tol) {
      sol.converged = true;
      break;
    }
    if (it >= cfg.max_iters) break;

    // Descent direction is -g. Trial energy at step alpha:
    //   E(alpha) = 1/2 (quu - 2 alpha qud + alpha^2 qdd) - NL(x - alpha g).
    stiffness_apply_into(sys, gu, Side::A, agu);
    stiffness_apply_into(sys, gv, Side::B, agv);
    const double quu = dot(au, x.u) + dot(av, x.v);
    const double qud = dot(au, gu) + dot(av, gv);
    const double qdd = dot(agu, gu) + dot(agv, gv);
    const double g2 = gnorm * gnorm;

    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, alpha *= 0.5) {
      const double e_trial = 0.5 * (quu - 2.0 * alpha * qud + alpha * alpha * qdd) -
                             detail::nonlinear_energy_shifted(sys, x, gu, gv, alpha);
      if (!std::isfinite(e_trial))
        throw NumericError("minimize: non-finite energy at iteration " + std::to_string(it) +
                           " (step " + std::to_string(alpha) + ")");
      if (e_trial <= e_cur - kArmijo * alpha * g2) {
        axpy(-alpha, gu, x.u);
        axpy(-alpha, gv, x.v);
        axpy(-alpha, agu, au);
        axpy(-alpha, agv, av);
        e_cur = e_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // descent stalled at numerical floor
    if ((it + 1) % kRefreshEvery == 0) {
      stiffness_apply_into(sys, x.u, Side::A, au);
      stiffness_apply_into(sys, x.v, Side::B, av);
      e_cur = 0.5 * (dot(au, x.u) + dot(av, x.v)) - nonlinear_energy(sys, x);
    }
  }

  sol.state = std::move(x);
  sol.iterations = it;
  sol.residual_norm = gnorm;
  sol.energy = energy(sys, sol.state);
  sol.classification = classify(sol.state, sol.energy);
  return sol;
}

namespace detail {

struct CgOutcome {
  StatePair x;
  int iterations = 0;
  bool progressed = false;  // produced a usable nonzero direction
};

// Jacobi-preconditioned conjugate gradients for the Newton system H x = b,
// relative tolerance as specified, stopping at negative curvature (truncated
// Newton). Returns the best iterate so far in that case.
template <typename Apply>
CgOutcome pcg(const Apply& apply_h, const StatePair& b, const std::vector<double>& diag_u,
              const std::vector<double>& diag_v, double rel_tol, int max_iters) {
  const std::size_t n = b.u.size();
  CgOutcome out;
  out.x = {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    dmax = std::max({dmax, std::abs(diag_u[i]), std::abs(diag_v[i])});
  const double floor = std::max(1e-30, 1e-12 * dmax);
  auto precond = [&](const StatePair& r, StatePair& z) {
    z.u.resize(n);
    z.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      z.u[i] = r.u[i] / std::max(std::abs(diag_u[i]), floor);
      z.v[i] = r.v[i] / std::max(std::abs(diag_v[i]), floor);
    }
  };

  StatePair r = b, z, p, hp;
  precond(r, z);
  p = z;
  double rz = pdot(r, z);
  const double bnorm = pnorm(b);
  if (bnorm == 0.0) return out;

  for (int k = 0; k < max_iters; ++k) {
    apply_h(p, hp);
    const double php = pdot(p, hp);
    if (php <= 0.0) {
      // Negative curvature: keep the current iterate; on the very first
      // step fall back to the preconditioned residual direction.
      if (k == 0) {
        out.x = z;
        out.progressed = true;
      }
      out.iterations = k;
      return out;
    }
    const double alpha = rz / php;
    paxpy(alpha, p, out.x);
    paxpy(-alpha, hp, r);
    out.progressed = true;
    out.iterations = k + 1;
    if (pnorm(r) <= rel_tol * bnorm) return out;
    precond(r, z);
    const double rz_new = pdot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) {
      p.u[i] = z.u[i] + beta * p.u[i];
      p.v[i] = z.v[i] + beta * p.v[i];
    }
  }
  return out;
}

// Found-solution states a deflated solve must avoid.
struct DeflationSet {
  std::vector<const StatePair*> points;
  double power = 2.0;
  double shift = 1.0;
};

// log of the deflation factor  prod_k (shift + dist_k^{-power}), written as
// -p log r + log1p(shift r^p) per factor so it never overflows near a root.
// Returns +inf when the state coincides with a deflated point.
inline double log_deflation(const DiscreteSystem& sys, const DeflationSet& ds,
                            const StatePair& x) {
  double acc = 0.0;
  for (const StatePair* pk : ds.points) {
    const double r = state_distance(sys, x, *pk);
    if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
    acc += -ds.power * std::log(r) + std::log1p(ds.shift * std::pow(r, ds.power));
  }
  return acc;
}

// <grad log m, delta> for the deflation factor m at x. The deflated Newton
// step is the undeflated step rescaled by tau = 1 / (1 - this inner product);
// a rank-one update of the Jacobian gives exactly this collinearity.
inline double deflation_directional(const DiscreteSystem& sys, const DeflationSet& ds,
                                    const StatePair& x, const StatePair& delta) {
  const std::size_t n = x.u.size();
  const double n_nodes = static_cast<double>(n);
  double q = 0.0;
  std::vector<double> du(n), dv(n), adu(n), adv(n);
  for (const StatePair* pk : ds.points) {
    for (std::size_t i = 0; i < n; ++i) {
      du[i] = x.u[i] - pk->u[i];
      dv[i] = x.v[i] - pk->v[i];
    }
    stiffness_apply_into(sys, du, Side::A, adu);
    stiffness_apply_into(sys, dv, Side::B, adv);
    const double r2 = (dot(adu, du) + dot(adv, dv)) / n_nodes;
    const double r = std::sqrt(r2);
    if (!(r > 0.0)) continue;  // at a deflated point the merit is infinite anyway
    const double dlog_dr = -ds.power / (r * (ds.shift * std::pow(r, ds.power) + 1.0));
    const double dr_ddelta = (dot(adu, delta.u) + dot(adv, delta.v)) / (n_nodes * r);
    q += dlog_dr * dr_ddelta;
  }
  return q;
}

// Newton for energy_gradient = 0, optionally on the deflated residual.
// Line search on the log of ||deflated residual||^2; convergence is judged
// on the undeflated residual norm (the deflation factor only steers).
inline Solution newton_core(const DiscreteSystem& sys, const StatePair& start,
                            const SolveConfig& cfg, const DeflationSet& ds, int start_id) {
  const int n = sys.grid->n_nodes();
  if (static_cast<int>(start.u.size()) != n || static_cast<int>(start.v.size()) != n)
    throw UsageError("newton_solve: start state does not match grid node count");
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 40;
  const double inf = std::numeric_limits<double>::infinity();

  StatePair x = start;
  StatePair g, gtrial, hd, trial;
  energy_gradient_into(sys, x, g);
  double gnorm = pnorm(g);
  const double tol = resolved_tol(cfg, n, gnorm);

  // Value of the line-search merit at a candidate state; stores the gradient
  // so an accepted trial does not pay for a second evaluation.
  auto merit_at = [&](const StatePair& y, StatePair& gbuf, double& gn) -> double {
    try {
      energy_gradient_into(sys, y, gbuf);
    } catch (const NumericError&) {
      return inf;
    }
    gn = pnorm(gbuf);
    if (!(gn > 0.0)) return -inf;
    const double logm = ds.points.empty() ? 0.0 : log_deflation(sys, ds, y);
    return 2.0 * std::log(gn) + 2.0 * logm;
  };

  Solution sol;
  sol.start_id = start_id;
  int it = 0;
  bool converged = false;
  for (; it < cfg.max_iters; ++it) {
    if (gnorm < tol) {
      converged = true;
      break;
    }
    const auto cache = cache_nonlinear_hessian(sys, x);
    std::vector<double> diag_u, diag_v;
    hessian_diagonal(sys, cache, diag_u, diag_v);
    auto apply_h = [&](const StatePair& p, StatePair& out) {
      hessian_apply_cached(sys, cache, p, out);
    };

    StatePair rhs = g;
    for (auto& e : rhs.u) e = -e;
    for (auto& e : rhs.v) e = -e;
    auto cg = pcg(apply_h, rhs, diag_u, diag_v, 1e-4, cfg.cg_max_iters);

    StatePair delta;
    bool have_newton_dir = false;
    if (cg.progressed) {
      // Accept the inexact Newton direction only if it is a descent
      // direction for 1/2 ||grad||^2, i.e. <g, H delta> < 0.
      apply_h(cg.x, hd);
      if (pdot(g, hd) < 0.0) {
        delta = std::move(cg.x);
        have_newton_dir = true;
      }
    }
    if (!have_newton_dir) {
      // Fallback: steepest descent for 1/2 ||grad||^2, direction -H g,
      // scaled to the residual's own length.
      apply_h(g, hd);
      const double hdnorm = pnorm(hd);
      if (!(hdnorm > 0.0)) break;  // stationary point of the merit; give up
      delta = hd;
      const double s = -gnorm / hdnorm;
      for (auto& e : delta.u) e *= s;
      for (auto& e : delta.v) e *= s;
    }

    if (!ds.points.empty() && have_newton_dir) {
      const double q = deflation_directional(sys, ds, x, delta);
      const double denom = 1.0 - q;
      const double tau = std::abs(denom) < 1e-8 ? 1.0 : 1.0 / denom;
      for (auto& e : delta.u) e *= tau;
      for (auto& e : delta.v) e *= tau;
    }

    const double logm0 = ds.points.empty() ? 0.0 : log_deflation(sys, ds, x);
    const double merit0 = 2.0 * std::log(gnorm) + 2.0 * logm0;
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, alpha *= 0.5) {
      trial = x;
      paxpy(alpha, delta, trial);
      double gn_trial = 0.0;
      const double mt = merit_at(trial, gtrial, gn_trial);
      if (mt <= merit0 + std::log1p(-2.0 * kArmijo * alpha)) {
        x = std::move(trial);
        std::swap(g, gtrial);
        gnorm = gn_trial;
        accepted = true;
        break;
      }
      if (mt == -inf) {  // residual vanished exactly at the trial point
        x = std::move(trial);
        std::swap(g, gtrial);
        gnorm = gn_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no step decreased the merit
  }
  if (!converged && gnorm < tol) converged = true;  // budget ended exactly at tol

  sol.state = std::move(x);
  sol.iterations = it;
  sol.residual_norm = gnorm;
  sol.converged = converged;
  sol.energy = energy(sys, sol.state);
  sol.classification = classify(sol.state, sol.energy);
  return sol;
}

}  // namespace detail

/// Newton iteration on energy_gradient = 0 with a truncated, diagonally
/// preconditioned conjugate-gradient inner solve (relative tolerance 1e-4),
/// falling back to the steepest-descent direction of 1/2 ||grad||^2 when the
/// inner solve makes no progress or yields a non-descent direction.
inline Solution newton_solve(const DiscreteSystem& sys, const StatePair& start,
                             const SolveConfig& cfg) {
  validate(cfg);
  return detail::newton_core(sys, start, cfg, detail::DeflationSet{}, 0);
}

/// The default start set for the multiplicity search: constant states at the
/// lower-threshold argmax, sign-flipped and scaled by {1, 1/2, 2}, followed
/// by seeded random states.
inline std::vector<StatePair> default_start_set(const DiscreteSystem& sys,
                                                const SolveConfig& cfg,
                                                std::array<double, 2> sF_argmax) {
  const int n = sys.grid->n_nodes();
  std::vector<StatePair> starts;
  const double s0 = sF_argmax[0], t0 = sF_argmax[1];
  for (double scale : {1.0, 0.5, 2.0}) {
    starts.push_back(constant_state(n, scale * s0, scale * t0));
    starts.push_back(constant_state(n, -scale * s0, -scale * t0));
  }
  const double amp = cfg.start_amplitude * std::max({1.0, std::abs(s0), std::abs(t0)});
  for (int k = 0; k < cfg.n_starts; ++k) {
    Rng rng(Rng::mix(cfg.rng_seed, static_cast<std::uint64_t>(k)));
    starts.push_back(random_state(n, rng, amp));
  }
  return starts;
}

/// Deflation-based multiplicity search over an explicit start list. The
/// found-set begins with the trivial solution; every converged start is
/// re-polished on the undeflated residual and admitted only if it clears
/// distinct_tol against everything already found. Results sorted by energy.
inline std::vector<Solution> deflated_search_with_starts(const DiscreteSystem& sys,
                                                         const std::vector<StatePair>& starts,
                                                         const SolveConfig& cfg) {
  validate(cfg);
  const int n = sys.grid->n_nodes();

  std::vector<Solution> found;
  Solution trivial;
  trivial.state = zero_state(n);
  trivial.energy = 0.0;
  trivial.residual_norm = 0.0;
  trivial.classification = Classification::Trivial;
  trivial.converged = true;
  trivial.start_id = -1;
  found.push_back(std::move(trivial));

  SolveConfig polish_cfg = cfg;
  polish_cfg.max_iters = cfg.polish_iters;

  int start_id = 0;
  for (const auto& start : starts) {
    detail::DeflationSet ds;
    ds.power = cfg.deflation_power;
    ds.shift = cfg.deflation_shift;
    for (const auto& f : found) ds.points.push_back(&f.state);

    Solution cand = detail::newton_core(sys, start, cfg, ds, start_id);
    ++start_id;
    if (!cand.converged) continue;
    Solution polished = detail::newton_core(sys, cand.state, polish_cfg,
                                            detail::DeflationSet{}, cand.start_id);
    if (!polished.converged) continue;

    bool distinct = true;
    for (const auto& f : found) {
      if (state_distance(sys, polished.state, f.state) <= cfg.distinct_tol) {
        distinct = false;
        break;
      }
    }
    if (distinct) found.push_back(std::move(polished));
  }

  std::stable_sort(found.begin(), found.end(), [](const Solution& a, const Solution& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.start_id < b.start_id;
  });
  return found;
}

/// Multiplicity search with the default start set. The lower-threshold
/// argmax used for the constant starts is computed on demand when not given.
inline std::vector<Solution> deflated_search(
    const DiscreteSystem& sys, const SolveConfig& cfg,
    std::optional<std::array<double, 2>> sF_argmax = std::nullopt) {
  validate(cfg);
  std::array<double, 2> am{};
  if (sF_argmax) {
    am = *sF_argmax;
  } else {
    const auto nb = norms(sys.coeffs);
    am = compute_sF(sys.nl, nb).argmax;
  }
  return deflated_search_with_starts(sys, default_start_set(sys, cfg, am), cfg);
}

/// The computable inequality chain behind the nonexistence threshold:
///   lhs = ||u||^2_{a,h} + ||v||^2_{b,h},
///   mid = lambda * integral(c (F_s u + F_t v)) <= lambda * S_F * lhs = rhs.
/// The middle inequality holds nodewise — c_i |s F_s + t F_t| <=
/// S_F (a_i s^2 + b_i t^2) — so positive quadrature weights and the positive
/// semidefinite Laplacian part make it exact at the discrete level. At a
/// discrete solution lhs = mid, so lambda * S_F < 1 forces the zero state.
struct CertificateReport {
  double lhs = 0.0;
  double mid = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;       // mid / lhs
  double lambda_SF = 0.0;   // lambda * S_F
  double nodewise_max_rel_violation = 0.0;
  bool nodewise_ok = false;
  std::string verdict;      // "nonexistence-certified" | "inconclusive"
};

inline CertificateReport nonexistence_certificate(const DiscreteSystem& sys,
                                                  const StatePair& state, double S_F) {
  const std::size_t n = state.u.size();
  if (static_cast<int>(n) != sys.grid->n_nodes())
    throw UsageError("nonexistence_certificate: state does not match grid");
  bool all_zero = true;
  for (std::size_t i = 0; i < n && all_zero; ++i)
    all_zero = state.u[i] == 0.0 && state.v[i] == 0.0;
  if (all_zero)
    throw UsageError("nonexistence_certificate: vacuous for the zero state");
  if (!(S_F > 0.0)) throw UsageError("nonexistence_certificate: S_F must be > 0");

  CertificateReport rep;
  rep.lhs = quad_form(sys, state.u, Side::A) + quad_form(sys, state.v, Side::B);
  rep.mid = nonlinear_pairing(sys, state);
  rep.lambda_SF = sys.lambda * S_F;
  rep.rhs = rep.lambda_SF * rep.lhs;
  rep.ratio = rep.mid / rep.lhs;

  const auto& a = sys.coeffs.a;
  const auto& b = sys.coeffs.b;
  const auto& c = sys.coeffs.c;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = state.u[i], t = state.v[i];
    if (s == 0.0 && t == 0.0) continue;
    const auto g = sys.nl.gradient(s, t);
    const double lhs_node = c[i] * std::abs(s * g[0] + t * g[1]);
    const double rhs_node = S_F * (a[i] * s * s + b[i] * t * t);
    const double viol = (lhs_node - rhs_node) / std::max(rhs_node, 1e-300);
    worst = std::max(worst, viol);
  }
  rep.nodewise_max_rel_violation = worst;
  rep.nodewise_ok = worst <= 1e-12;
  rep.verdict = rep.lambda_SF < 1.0 ? "nonexistence-certified" : "inconclusive";
  return rep;
}

struct SweepRow {
  double lambda = 0.0;
  int n_nontrivial = 0;
  double min_energy = 0.0;
  double max_residual = 0.0;
  std::string status;  // "ok" or "error: ..."
  std::vector<Solution> solutions;
};

struct SweepReport {
  double s_F = 0.0;
  double S_F = 0.0;
  std::array<double, 2> sF_argmax{0.0, 0.0};
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

/// Runs the multiplicity search at each lambda (sorted ascending, exact
/// duplicates dropped with a warning). Per-lambda failures become flagged
/// rows; the sweep itself always completes. Deterministic for a fixed seed:
/// row k uses the substream mix(rng_seed, k). Threshold constants may be
/// passed in when already computed; otherwise they are recomputed here.
inline SweepReport sweep(const DiscreteSystem& base_sys, std::vector<double> lambdas,
                         const SolveConfig& cfg,
                         std::optional<ThresholdReport> thresholds = std::nullopt,
                         const ThresholdSearchConfig& tcfg = {}) {
  validate(cfg);
  if (lambdas.empty()) throw UsageError("sweep: lambda list is empty");
  for (double l : lambdas)
    if (!std::isfinite(l) || l < 0.0)
      throw UsageError("sweep: lambda values must be finite and >= 0");
  std::sort(lambdas.begin(), lambdas.end());

  SweepReport rep;
  if (!thresholds) {
    const auto nb = norms(base_sys.coeffs);
    thresholds = compute_thresholds(base_sys.nl, nb, tcfg);
  }
  rep.s_F = thresholds->s_F;
  rep.S_F = thresholds->S_F;
  rep.sF_argmax = thresholds->argmax_sF;

  double prev = -1.0;
  int row_index = 0;
  for (double lam : lambdas) {
    if (!rep.rows.empty() && lam == prev) {
      rep.warnings.push_back("duplicate lambda " + std::to_string(lam) + " dropped");
      continue;
    }
    prev = lam;
    DiscreteSystem sys = base_sys;
    sys.lambda = lam;
    SolveConfig row_cfg = cfg;
    row_cfg.rng_seed = Rng::mix(cfg.rng_seed, static_cast<std::uint64_t>(row_index));
    ++row_index;

    SweepRow row;
    row.lambda = lam;
    try {
      auto sols = deflated_search(sys, row_cfg, rep.sF_argmax);
      row.min_energy = 0.0;
      row.max_residual = 0.0;
      for (const auto& s : sols) {
        if (s.classification != Classification::Trivial) ++row.n_nontrivial;
        row.min_energy = std::min(row.min_energy, s.energy);
        row.max_residual = std::max(row.max_residual, s.residual_norm);
      }
      row.status = "ok";
      row.solutions = std::move(sols);
    } catch (const Error& e) {
      row.status = std::string("error: ") + e.what();
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

/// Sampled check of the perturbation growth bound
///   max(|G_s|, |G_t|) <= c (1 + |s|^p + |t|^p)  for some c > 0, with p = 2.
/// Existence of c is a boundedness statement, not a statement about its
/// size, so the verdict is trend-based rather than an absolute cap: the
/// ratio's maximum over the outer radii (r > ~8) must not exceed ten times
/// its maximum over the inner radii. A gradient with excess growth r^q,
/// q > p, gains a factor (1000/8)^(q-p) across that split and is caught,
/// while any bounded ratio -- however large its constant -- passes.
/// A sampling check, not a proof.
struct GrowthBoundReport {
  double c_estimate = 0.0;
  bool ok = false;
};

inline GrowthBoundReport growth_bound_check(const Nonlinearity& G, double p = 2.0) {
  GrowthBoundReport rep;
  const auto radii = log_spaced(1e-3, 1e3, 41);
  const double two_pi = 6.283185307179586476925286766559;
  double inner = 0.0, outer = 0.0;
  for (std::size_t ir = 0; ir < radii.size(); ++ir) {
    const double r = radii[ir];
    for (int ia = 0; ia < 64; ++ia) {
      const double th = two_pi * ia / 64;
      const double s = r * std::cos(th), t = r * std::sin(th);
      const auto g = grad(G, s, t);
      if (!std::isfinite(g[0]) || !std::isfinite(g[1])) return rep;
      const double ratio = std::max(std::abs(g[0]), std::abs(g[1])) /
                           (1.0 + std::pow(std::abs(s), p) + std::pow(std::abs(t), p));
      double& bucket = (ir <= 26) ? inner : outer;
      bucket = std::max(bucket, ratio);
    }
  }
  rep.c_estimate = std::max(inner, outer);
  rep.ok = outer <= 10.0 * inner + 1e-12;
  return rep;
}

struct PerturbRow {
  double mu = 0.0;
  int n_nontrivial = 0;
  bool count_preserved = false;
  double max_drift = 0.0;  // worst branch movement in the normalized energy norm
  std::string status;
  std::vector<Solution> solutions;
};

struct PerturbReport {
  int base_nontrivial = 0;
  std::vector<Solution> base_solutions;
  std::vector<PerturbRow> rows;
};

/// Multiplicity under a subquadratic perturbation: for each mu the search is
/// re-run on the perturbed system, seeded from the unperturbed solutions.
/// mu = 0 reproduces the base result exactly (same search, no perturbation).
inline PerturbReport perturbation_stability(const DiscreteSystem& sys, const Nonlinearity& G,
                                            const std::optional<std::vector<double>>& d,
                                            const std::vector<double>& mus,
                                            const SolveConfig& cfg) {
  validate(cfg);
  for (double mu : mus)
    if (!std::isfinite(mu)) throw UsageError("perturbation_stability: non-finite mu");
  const auto gb = growth_bound_check(G);
  if (!gb.ok)
    throw UsageError("perturbation_stability: perturbation fails the sampled growth bound");

  const auto nb = norms(sys.coeffs);
  const auto am = compute_sF(sys.nl, nb).argmax;

  PerturbReport rep;
  rep.base_solutions = deflated_search(sys, cfg, am);
  for (const auto& s : rep.base_solutions)
    if (s.classification != Classification::Trivial) ++rep.base_nontrivial;

  for (double mu : mus) {
    PerturbRow row;
    row.mu = mu;
    if (mu == 0.0) {
      row.solutions = rep.base_solutions;
      row.n_nontrivial = rep.base_nontrivial;
      row.count_preserved = true;
      row.max_drift = 0.0;
      row.status = "ok";
      rep.rows.push_back(std::move(row));
      continue;
    }
    DiscreteSystem psys = sys;
    psys.perturbation = Perturbation{mu, G};
    if (d) {
      if (static_cast<int>(d->size()) != sys.grid->n_nodes())
        throw UsageError("perturbation_stability: weight field does not match grid");
      psys.coeffs.d = d;
    }
    try {
      std::vector<StatePair> starts;
      for (const auto& s : rep.base_solutions)
        if (s.classification != Classification::Trivial) starts.push_back(s.state);
      const auto defaults = default_start_set(psys, cfg, am);
      starts.insert(starts.end(), defaults.begin(), defaults.end());

      auto sols = deflated_search_with_starts(psys, starts, cfg);
      for (const auto& s : sols)
        if (s.classification != Classification::Trivial) ++row.n_nontrivial;
      row.count_preserved = row.n_nontrivial == rep.base_nontrivial;
      row.max_drift = 0.0;
      for (const auto& base : rep.base_solutions) {
        if (base.classification == Classification::Trivial) continue;
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& s : sols) {
          if (s.classification == Classification::Trivial) continue;
          nearest = std::min(nearest, state_distance(sys, base.state, s.state));
        }
        if (std::isfinite(nearest)) row.max_drift = std::max(row.max_drift, nearest);
      }
      row.status = "ok";
      row.solutions = std::move(sols);
    } catch (const Error& e) {
      row.status = std::string("error: ") + e.what();
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace subquad

#endif
