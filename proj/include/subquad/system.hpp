// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_SYSTEM_HPP
#define SUBQUAD_SYSTEM_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subquad/common.hpp"
#include "subquad/grid.hpp"
#include "subquad/nonlinearity.hpp"
#include "subquad/rng.hpp"

namespace subquad {

/// Nodal pair (u, v) on a shared grid — the discrete unknown.
struct StatePair {
  std::vector<double> u;
  std::vector<double> v;
};

inline StatePair zero_state(int n_nodes) {
  return {std::vector<double>(static_cast<std::size_t>(n_nodes), 0.0),
          std::vector<double>(static_cast<std::size_t>(n_nodes), 0.0)};
}

inline StatePair constant_state(int n_nodes, double s, double t) {
  return {std::vector<double>(static_cast<std::size_t>(n_nodes), s),
          std::vector<double>(static_cast<std::size_t>(n_nodes), t)};
}

/// Seeded random state with entries uniform in [-amplitude, amplitude].
inline StatePair random_state(int n_nodes, Rng& rng, double amplitude) {
  StatePair st = zero_state(n_nodes);
  for (auto& x : st.u) x = rng.uniform(-amplitude, amplitude);
  for (auto& x : st.v) x = rng.uniform(-amplitude, amplitude);
  return st;
}

/// Root-mean-square size of a state; the triviality test compares this
/// against 1e-8 (equivalently, Euclidean norm against 1e-8 * sqrt(nodes)).
inline double state_rms(const StatePair& st) {
  const double ss = dot(st.u, st.u) + dot(st.v, st.v);
  return std::sqrt(ss / static_cast<double>(st.u.size()));
}

enum class Side { A, B };

/// Optional subquadratic perturbation: adds -mu * integral(d * G(u,v)) to the
/// energy. The weight d comes from the coefficient field (ones when absent).
struct Perturbation {
  double mu = 0.0;
  Nonlinearity G;
};

/// The full discrete problem: grid, coefficients, nonlinearity, parameter.
struct DiscreteSystem {
  std::shared_ptr<const GridDomain> grid;
  CoefficientField coeffs;
  Nonlinearity nl;
  double lambda = 0.0;
  std::optional<Perturbation> perturbation;
};

inline DiscreteSystem make_system(CoefficientField coeffs, Nonlinearity nl, double lambda,
                                  std::optional<Perturbation> pert = std::nullopt) {
  if (!coeffs.grid) throw UsageError("make_system: coefficient field has no grid");
  if (!(lambda >= 0.0)) throw UsageError("make_system: lambda must be >= 0");
  validate_coefficients(coeffs);
  DiscreteSystem sys;
  sys.grid = coeffs.grid;
  sys.coeffs = std::move(coeffs);
  sys.nl = std::move(nl);
  sys.lambda = lambda;
  sys.perturbation = std::move(pert);
  return sys;
}

namespace detail {

// Trapezoid weight along one axis.
inline double axis_weight(int i, int n, double h) {
  return (i == 0 || i == n - 1) ? 0.5 * h : h;
}

}  // namespace detail

/// Action of the quadrature-weighted Neumann Laplacian: the 3-point (1-D) or
/// 5-point (2-D) stencil with ghost-node reflection at the boundary, each row
/// scaled by that node's quadrature weight. The scaling makes the matrix
/// symmetric positive semidefinite with <L w, w> equal to the discrete
/// Dirichlet energy; constants lie in its kernel.
inline void laplacian_apply_into(const GridDomain& g, std::span<const double> w,
                                 std::span<double> out) {
  if (static_cast<int>(w.size()) != g.n_nodes() || out.size() != w.size())
    throw UsageError("laplacian_apply: vector length does not match grid node count");
  if (g.dim == 1) {
    const int n = g.counts[0];
    const double inv_h = 1.0 / g.spacing[0];
    out[0] = (w[0] - w[1]) * inv_h;
    for (int i = 1; i < n - 1; ++i)
      out[static_cast<std::size_t>(i)] = (2.0 * w[static_cast<std::size_t>(i)] -
                                          w[static_cast<std::size_t>(i - 1)] -
                                          w[static_cast<std::size_t>(i + 1)]) *
                                         inv_h;
    out[static_cast<std::size_t>(n - 1)] = (w[static_cast<std::size_t>(n - 1)] -
                                            w[static_cast<std::size_t>(n - 2)]) *
                                           inv_h;
    return;
  }
  const int nx = g.counts[0], ny = g.counts[1];
  const double hx = g.spacing[0], hy = g.spacing[1];
  const double inv_hx = 1.0 / hx, inv_hy = 1.0 / hy;
  for (int j = 0; j < ny; ++j) {
    const double wy = detail::axis_weight(j, ny, hy);
    for (int i = 0; i < nx; ++i) {
      const double wx = detail::axis_weight(i, nx, hx);
      const std::size_t k = static_cast<std::size_t>(g.index(i, j));
      double dx;
      if (i == 0)
        dx = w[k] - w[k + 1];
      else if (i == nx - 1)
        dx = w[k] - w[k - 1];
      else
        dx = 2.0 * w[k] - w[k - 1] - w[k + 1];
      double dy;
      const std::size_t stride = static_cast<std::size_t>(nx);
      if (j == 0)
        dy = w[k] - w[k + stride];
      else if (j == ny - 1)
        dy = w[k] - w[k - stride];
      else
        dy = 2.0 * w[k] - w[k - stride] - w[k + stride];
      out[k] = wy * dx * inv_hx + wx * dy * inv_hy;
    }
  }
}

/// Diagonal of the weighted Neumann Laplacian (for preconditioning).
inline std::vector<double> laplacian_diagonal(const GridDomain& g) {
  std::vector<double> diag(static_cast<std::size_t>(g.n_nodes()), 0.0);
  if (g.dim == 1) {
    const int n = g.counts[0];
    const double inv_h = 1.0 / g.spacing[0];
    for (int i = 0; i < n; ++i)
      diag[static_cast<std::size_t>(i)] = ((i == 0 || i == n - 1) ? 1.0 : 2.0) * inv_h;
    return diag;
  }
  const int nx = g.counts[0], ny = g.counts[1];
  const double hx = g.spacing[0], hy = g.spacing[1];
  for (int j = 0; j < ny; ++j) {
    const double wy = detail::axis_weight(j, ny, hy);
    const double cy = (j == 0 || j == ny - 1) ? 1.0 : 2.0;
    for (int i = 0; i < nx; ++i) {
      const double wx = detail::axis_weight(i, nx, hx);
      const double cx = (i == 0 || i == nx - 1) ? 1.0 : 2.0;
      diag[static_cast<std::size_t>(g.index(i, j))] = wy * cx / hx + wx * cy / hy;
    }
  }
  return diag;
}

inline const std::vector<double>& side_coefficient(const DiscreteSystem& sys, Side which) {
  return which == Side::A ? sys.coeffs.a : sys.coeffs.b;
}

/// Action of the full symmetric positive definite operator of one side:
/// weighted Laplacian plus diag(coefficient * quadrature weight). The
/// quadratic form <A_a u, u> is the discrete squared norm ||u||_{a,h}^2.
inline void stiffness_apply_into(const DiscreteSystem& sys, std::span<const double> w,
                                 Side which, std::span<double> out) {
  laplacian_apply_into(*sys.grid, w, out);
  const auto& coef = side_coefficient(sys, which);
  const auto& q = sys.grid->quad_weights;
  for (std::size_t i = 0; i < w.size(); ++i) out[i] += coef[i] * q[i] * w[i];
}

inline std::vector<double> stiffness_apply(const DiscreteSystem& sys,
                                           std::span<const double> w, Side which) {
  std::vector<double> out(w.size());
  stiffness_apply_into(sys, w, which, out);
  return out;
}

/// <A w, w> for one side — the discrete squared coefficient norm.
inline double quad_form(const DiscreteSystem& sys, std::span<const double> w, Side which) {
  std::vector<double> aw(w.size());
  stiffness_apply_into(sys, w, which, aw);
  return dot(aw, w);
}

/// Distance used for deflation and distinctness: the discrete energy norm of
/// the difference, normalized by sqrt(nodes).
inline double state_distance(const DiscreteSystem& sys, const StatePair& x,
                             const StatePair& y) {
  const std::size_t n = x.u.size();
  std::vector<double> du(n), dv(n);
  for (std::size_t i = 0; i < n; ++i) {
    du[i] = x.u[i] - y.u[i];
    dv[i] = x.v[i] - y.v[i];
  }
  const double ss = quad_form(sys, du, Side::A) + quad_form(sys, dv, Side::B);
  return std::sqrt(ss / static_cast<double>(n));
}

namespace detail {

[[noreturn]] inline void non_finite_at(const char* where, std::size_t node) {
  throw NumericError(std::string(where) + ": non-finite value at node " +
                     std::to_string(node));
}

}  // namespace detail

/// Nonlinear part of the energy: lambda * sum_i q_i c_i F(u_i, v_i) plus the
/// perturbation analog. Nodewise (lumped) evaluation — no extra quadrature.
inline double nonlinear_energy(const DiscreteSystem& sys, const StatePair& st) {
  const auto& q = sys.grid->quad_weights;
  const auto& c = sys.coeffs.c;
  const std::size_t n = st.u.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double term = q[i] * c[i] * sys.nl.value(st.u[i], st.v[i]);
    if (!std::isfinite(term)) detail::non_finite_at("energy", i);
    acc += term;
  }
  double total = sys.lambda * acc;
  if (sys.perturbation && sys.perturbation->mu != 0.0) {
    const auto& p = *sys.perturbation;
    double pacc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sys.coeffs.d ? (*sys.coeffs.d)[i] : 1.0;
      const double term = q[i] * d * p.G.value(st.u[i], st.v[i]);
      if (!std::isfinite(term)) detail::non_finite_at("energy (perturbation)", i);
      pacc += term;
    }
    total += p.mu * pacc;
  }
  return total;
}

/// Discrete energy: 1/2 (||u||_{a,h}^2 + ||v||_{b,h}^2) minus the nonlinear
/// part. Critical points are exactly the discrete solutions.
inline double energy(const DiscreteSystem& sys, const StatePair& st) {
  const double quad = 0.5 * (quad_form(sys, st.u, Side::A) + quad_form(sys, st.v, Side::B));
  const double val = quad - nonlinear_energy(sys, st);
  if (!std::isfinite(val)) throw NumericError("energy: non-finite total");
  return val;
}

/// Gradient of the discrete energy; its zero set is the discrete weak form.
/// u-component: A_a u - lambda (q ⊙ c ⊙ F_s(u,v)) - mu (q ⊙ d ⊙ G_s(u,v)).
inline void energy_gradient_into(const DiscreteSystem& sys, const StatePair& st,
                                 StatePair& out) {
  const std::size_t n = st.u.size();
  out.u.resize(n);
  out.v.resize(n);
  stiffness_apply_into(sys, st.u, Side::A, out.u);
  stiffness_apply_into(sys, st.v, Side::B, out.v);
  const auto& q = sys.grid->quad_weights;
  const auto& c = sys.coeffs.c;
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = sys.nl.gradient(st.u[i], st.v[i]);
    const double w = sys.lambda * q[i] * c[i];
    out.u[i] -= w * g[0];
    out.v[i] -= w * g[1];
    if (!std::isfinite(out.u[i]) || !std::isfinite(out.v[i]))
      detail::non_finite_at("energy_gradient", i);
  }
  if (sys.perturbation && sys.perturbation->mu != 0.0) {
    const auto& p = *sys.perturbation;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sys.coeffs.d ? (*sys.coeffs.d)[i] : 1.0;
      const auto g = p.G.gradient(st.u[i], st.v[i]);
      const double w = p.mu * q[i] * d;
      out.u[i] -= w * g[0];
      out.v[i] -= w * g[1];
      if (!std::isfinite(out.u[i]) || !std::isfinite(out.v[i]))
        detail::non_finite_at("energy_gradient (perturbation)", i);
    }
  }
}

inline StatePair energy_gradient(const DiscreteSystem& sys, const StatePair& st) {
  StatePair out;
  energy_gradient_into(sys, st, out);
  return out;
}

/// Nodewise second derivatives of the nonlinear energy part at a state,
/// cached so a Newton step can apply the Hessian many times cheaply.
struct NonlinearHessianCache {
  std::vector<double> huu, huv, hvv;  // already multiplied by lambda*q*c (+ mu*q*d)
};

inline NonlinearHessianCache cache_nonlinear_hessian(const DiscreteSystem& sys,
                                                     const StatePair& st) {
  const std::size_t n = st.u.size();
  NonlinearHessianCache cache;
  cache.huu.assign(n, 0.0);
  cache.huv.assign(n, 0.0);
  cache.hvv.assign(n, 0.0);
  const auto& q = sys.grid->quad_weights;
  const auto& c = sys.coeffs.c;
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = sys.nl.hessian(st.u[i], st.v[i]);
    const double w = sys.lambda * q[i] * c[i];
    cache.huu[i] = w * h.ss;
    cache.huv[i] = w * h.st;
    cache.hvv[i] = w * h.tt;
    if (!std::isfinite(cache.huu[i]) || !std::isfinite(cache.huv[i]) ||
        !std::isfinite(cache.hvv[i]))
      detail::non_finite_at("energy_hessian", i);
  }
  if (sys.perturbation && sys.perturbation->mu != 0.0) {
    const auto& p = *sys.perturbation;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = sys.coeffs.d ? (*sys.coeffs.d)[i] : 1.0;
      const auto h = p.G.hessian(st.u[i], st.v[i]);
      const double w = p.mu * q[i] * d;
      cache.huu[i] += w * h.ss;
      cache.huv[i] += w * h.st;
      cache.hvv[i] += w * h.tt;
      if (!std::isfinite(cache.huu[i]) || !std::isfinite(cache.huv[i]) ||
          !std::isfinite(cache.hvv[i]))
        detail::non_finite_at("energy_hessian (perturbation)", i);
    }
  }
  return cache;
}

/// Hessian action using a prebuilt nonlinear cache.
inline void hessian_apply_cached(const DiscreteSystem& sys, const NonlinearHessianCache& cache,
                                 const StatePair& dir, StatePair& out) {
  const std::size_t n = dir.u.size();
  out.u.resize(n);
  out.v.resize(n);
  stiffness_apply_into(sys, dir.u, Side::A, out.u);
  stiffness_apply_into(sys, dir.v, Side::B, out.v);
  for (std::size_t i = 0; i < n; ++i) {
    out.u[i] -= cache.huu[i] * dir.u[i] + cache.huv[i] * dir.v[i];
    out.v[i] -= cache.huv[i] * dir.u[i] + cache.hvv[i] * dir.v[i];
  }
}

/// Second variation of the energy in a direction (p, q):
/// u-component A_a p - lambda q c (F_ss p + F_st q), analogously for v.
inline StatePair energy_hessian_apply(const DiscreteSystem& sys, const StatePair& st,
                                      const StatePair& dir) {
  const auto cache = cache_nonlinear_hessian(sys, st);
  StatePair out;
  hessian_apply_cached(sys, cache, dir, out);
  return out;
}

/// Diagonal of the full energy Hessian at a state (Jacobi preconditioner).
inline void hessian_diagonal(const DiscreteSystem& sys, const NonlinearHessianCache& cache,
                             std::vector<double>& diag_u, std::vector<double>& diag_v) {
  const auto lap = laplacian_diagonal(*sys.grid);
  const auto& q = sys.grid->quad_weights;
  const std::size_t n = lap.size();
  diag_u.resize(n);
  diag_v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag_u[i] = lap[i] + sys.coeffs.a[i] * q[i] - cache.huu[i];
    diag_v[i] = lap[i] + sys.coeffs.b[i] * q[i] - cache.hvv[i];
  }
}

/// lambda * integral(c * (F_s u + F_t v)) — the pairing of the nonlinear term
/// with the state itself. Together with the quadratic forms this gives the
/// exact test-with-solution identity <grad, state> = lhs - pairing.
inline double nonlinear_pairing(const DiscreteSystem& sys, const StatePair& st) {
  const auto& q = sys.grid->quad_weights;
  const auto& c = sys.coeffs.c;
  const std::size_t n = st.u.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = sys.nl.gradient(st.u[i], st.v[i]);
    acc += q[i] * c[i] * (g[0] * st.u[i] + g[1] * st.v[i]);
  }
  return sys.lambda * acc;
}

}  // namespace subquad

#endif
