// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_THRESHOLDS_HPP
#define SUBQUAD_THRESHOLDS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "subquad/common.hpp"
#include "subquad/grid.hpp"
#include "subquad/nonlinearity.hpp"

namespace subquad {

/// Two-stage search parameters for the threshold maximizations. The annulus
/// bounds rest on the decay of F/(s^2+t^2) at 0 and infinity, which pushes
/// the maximum onto a compact annulus; both bounds are overridable.
struct ThresholdSearchConfig {
  int n_radii = 200;
  int n_angles = 512;
  double r_min = 1e-4;
  double r_max = 1e4;
  int multistart = 5;          // refine from this many best grid points
  double refine_tol = 1e-8;    // relative simplex diameter at termination
  int max_refine_iters = 500;
};

/// Ratio whose maximum over the punctured plane defines the lower threshold:
///   2 ||c||_1 F(s,t) / (||a||_1 s^2 + ||b||_1 t^2).
inline double ratio_sF(const Nonlinearity& nl, const NormBundle& nb, double s, double t) {
  if (s == 0.0 && t == 0.0)
    throw UsageError("ratio_sF: undefined at the origin (limit value is 0)");
  return 2.0 * nb.c_l1 * eval(nl, s, t) / (nb.a_l1 * s * s + nb.b_l1 * t * t);
}

/// Ratio whose maximum defines the upper threshold:
///   |s F_s + t F_t| / (||c/a||_inf^{-1} s^2 + ||c/b||_inf^{-1} t^2).
inline double ratio_SF(const Nonlinearity& nl, const NormBundle& nb, double s, double t) {
  if (s == 0.0 && t == 0.0)
    throw UsageError("ratio_SF: undefined at the origin (limit value is 0)");
  const auto g = grad(nl, s, t);
  const double num = std::abs(s * g[0] + t * g[1]);
  return num / (s * s / nb.c_over_a_inf + t * t / nb.c_over_b_inf);
}

/// |s0 F_s + t0 F_t - 2 F| at (s0,t0); vanishes at any maximizer of the
/// lower-threshold ratio.
inline double stationarity_residual(const Nonlinearity& nl, double s0, double t0) {
  if (s0 == 0.0 && t0 == 0.0)
    throw UsageError("stationarity_residual: undefined at the origin");
  const auto g = grad(nl, s0, t0);
  return std::abs(s0 * g[0] + t0 * g[1] - 2.0 * eval(nl, s0, t0));
}

struct ThresholdResult {
  double value = 0.0;
  std::array<double, 2> argmax{0.0, 0.0};
  std::vector<std::array<double, 2>> co_maximizers;  // refined points tied within 1e-8
  double stage1_best = 0.0;
  int refine_iterations = 0;     // summed over the multistart refinements
  double final_simplex_size = 0.0;
};

namespace detail {

struct NmOutcome {
  std::array<double, 2> point;
  double value;
  int iterations;
  double simplex_size;
};

// Nelder-Mead maximization in the plane. Chosen over gradient ascent because
// the upper-threshold ratio carries an absolute value and is nonsmooth where
// the numerator changes sign. The best vertex never regresses, so the refined
// value dominates the starting value.
inline NmOutcome nelder_mead_max(const std::function<double(double, double)>& f,
                                 std::array<double, 2> start, double scale,
                                 double rel_tol, int max_iters) {
  struct Vertex {
    std::array<double, 2> x;
    double v;
  };
  auto ev = [&f](std::array<double, 2> p) { return f(p[0], p[1]); };
  std::array<Vertex, 3> sx;
  sx[0] = {start, ev(start)};
  sx[1] = {{start[0] + scale, start[1]}, 0.0};
  sx[2] = {{start[0], start[1] + scale}, 0.0};
  sx[1].v = ev(sx[1].x);
  sx[2].v = ev(sx[2].x);

  auto diam = [&sx]() {
    double d = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        d = std::max(d, std::hypot(sx[i].x[0] - sx[j].x[0], sx[i].x[1] - sx[j].x[1]));
    return d;
  };

  int it = 0;
  for (; it < max_iters; ++it) {
    std::sort(sx.begin(), sx.end(), [](const Vertex& a, const Vertex& b) { return a.v > b.v; });
    const double extent = std::max(1.0, std::hypot(sx[0].x[0], sx[0].x[1]));
    if (diam() < rel_tol * extent) break;

    const std::array<double, 2> centroid{0.5 * (sx[0].x[0] + sx[1].x[0]),
                                         0.5 * (sx[0].x[1] + sx[1].x[1])};
    auto blend = [&centroid, &sx](double k) {
      return std::array<double, 2>{centroid[0] + k * (centroid[0] - sx[2].x[0]),
                                   centroid[1] + k * (centroid[1] - sx[2].x[1])};
    };

    const auto xr = blend(1.0);
    const double vr = ev(xr);
    if (vr > sx[0].v) {
      const auto xe = blend(2.0);
      const double ve = ev(xe);
      if (ve > vr)
        sx[2] = {xe, ve};
      else
        sx[2] = {xr, vr};
      continue;
    }
    if (vr > sx[1].v) {
      sx[2] = {xr, vr};
      continue;
    }
    const auto xc = blend(-0.5);
    const double vc = ev(xc);
    if (vc > sx[2].v) {
      sx[2] = {xc, vc};
      continue;
    }
    for (int i = 1; i < 3; ++i) {
      sx[i].x = {0.5 * (sx[i].x[0] + sx[0].x[0]), 0.5 * (sx[i].x[1] + sx[0].x[1])};
      sx[i].v = ev(sx[i].x);
    }
  }
  std::sort(sx.begin(), sx.end(), [](const Vertex& a, const Vertex& b) { return a.v > b.v; });
  return {sx[0].x, sx[0].v, it, diam()};
}

// Stage 1 sample with deterministic tie-breaking: larger value first, then
// smaller radius, then smaller angle.
struct GridSample {
  double value;
  int ir, ia;
  double s, t;
};

inline ThresholdResult maximize_ratio(const std::function<double(double, double)>& ratio,
                                      const ThresholdSearchConfig& cfg) {
  const auto radii = log_spaced(cfg.r_min, cfg.r_max, cfg.n_radii);
  const double two_pi = 6.283185307179586476925286766559;

  std::vector<GridSample> samples;
  samples.reserve(static_cast<std::size_t>(cfg.n_radii) * cfg.n_angles);
  bool any_nonzero = false;
  for (int ir = 0; ir < cfg.n_radii; ++ir) {
    for (int ia = 0; ia < cfg.n_angles; ++ia) {
      const double th = two_pi * ia / cfg.n_angles;
      const double s = radii[ir] * std::cos(th);
      const double t = radii[ir] * std::sin(th);
      const double v = ratio(s, t);
      if (v != 0.0) any_nonzero = true;
      samples.push_back({v, ir, ia, s, t});
    }
  }
  if (!any_nonzero)
    throw SearchError("threshold search: F vanished on entire search grid");

  const int k = std::max(1, cfg.multistart);
  auto better = [](const GridSample& x, const GridSample& y) {
    if (x.value != y.value) return x.value > y.value;
    if (x.ir != y.ir) return x.ir < y.ir;
    return x.ia < y.ia;
  };
  std::partial_sort(samples.begin(),
                    samples.begin() + std::min<std::size_t>(k, samples.size()),
                    samples.end(), better);

  ThresholdResult res;
  res.stage1_best = samples.front().value;

  std::vector<NmOutcome> refined;
  for (int i = 0; i < k && i < static_cast<int>(samples.size()); ++i) {
    const auto& s0 = samples[i];
    const double scale = 0.05 * std::max(radii[s0.ir], 1e-6);
    auto out = nelder_mead_max(ratio, {s0.s, s0.t}, scale, cfg.refine_tol,
                               cfg.max_refine_iters);
    res.refine_iterations += out.iterations;
    refined.push_back(out);
  }

  auto radius_angle_less = [](const std::array<double, 2>& p, const std::array<double, 2>& q) {
    const double rp = std::hypot(p[0], p[1]), rq = std::hypot(q[0], q[1]);
    if (rp != rq) return rp < rq;
    return std::atan2(p[1], p[0]) < std::atan2(q[1], q[0]);
  };
  std::sort(refined.begin(), refined.end(), [&](const NmOutcome& x, const NmOutcome& y) {
    if (x.value != y.value) return x.value > y.value;
    return radius_angle_less(x.point, y.point);
  });

  const auto& best = refined.front();
  res.value = best.value;
  res.argmax = best.point;
  res.final_simplex_size = best.simplex_size;

  // Distinct refined points whose values tie with the best within 1e-8.
  const double tie = 1e-8 * std::max(1.0, std::abs(best.value));
  for (const auto& r : refined) {
    if (best.value - r.value > tie) continue;
    bool dup = false;
    for (const auto& p : res.co_maximizers) {
      const double sep = std::hypot(r.point[0] - p[0], r.point[1] - p[1]);
      if (sep < 1e-6 * std::max(1.0, std::hypot(p[0], p[1]))) {
        dup = true;
        break;
      }
    }
    if (!dup) res.co_maximizers.push_back(r.point);
  }
  return res;
}

}  // namespace detail

/// Lower threshold by global maximization of ratio_sF. The reported value is
/// a certified lower bound on the true maximum (every evaluated point is a
/// witness) and is treated as the value.
inline ThresholdResult compute_sF(const Nonlinearity& nl, const NormBundle& nb,
                                  const ThresholdSearchConfig& cfg = {}) {
  return detail::maximize_ratio(
      [&](double s, double t) {
        return (s == 0.0 && t == 0.0) ? 0.0 : ratio_sF(nl, nb, s, t);
      },
      cfg);
}

/// Upper threshold by global maximization of ratio_SF.
inline ThresholdResult compute_SF(const Nonlinearity& nl, const NormBundle& nb,
                                  const ThresholdSearchConfig& cfg = {}) {
  return detail::maximize_ratio(
      [&](double s, double t) {
        return (s == 0.0 && t == 0.0) ? 0.0 : ratio_SF(nl, nb, s, t);
      },
      cfg);
}

/// Both thresholds plus the stationarity diagnostic at the lower-threshold
/// maximizer. The two constants satisfy S_F >= s_F up to refinement error.
struct ThresholdReport {
  double s_F = 0.0;
  double S_F = 0.0;
  std::array<double, 2> argmax_sF{0.0, 0.0};
  std::array<double, 2> argmax_SF{0.0, 0.0};
  std::vector<std::array<double, 2>> co_maximizers_sF;
  std::vector<std::array<double, 2>> co_maximizers_SF;
  double stationarity = 0.0;  // |s0 F_s + t0 F_t - 2F| at argmax_sF
  int grid_points = 0;
  int refine_iterations = 0;
  double final_simplex_size = 0.0;
};

inline ThresholdReport compute_thresholds(const Nonlinearity& nl, const NormBundle& nb,
                                          const ThresholdSearchConfig& cfg = {}) {
  ThresholdReport rep;
  const auto lo = compute_sF(nl, nb, cfg);
  const auto hi = compute_SF(nl, nb, cfg);
  rep.s_F = lo.value;
  rep.S_F = hi.value;
  rep.argmax_sF = lo.argmax;
  rep.argmax_SF = hi.argmax;
  rep.co_maximizers_sF = lo.co_maximizers;
  rep.co_maximizers_SF = hi.co_maximizers;
  rep.stationarity = stationarity_residual(nl, lo.argmax[0], lo.argmax[1]);
  rep.grid_points = cfg.n_radii * cfg.n_angles;
  rep.refine_iterations = lo.refine_iterations + hi.refine_iterations;
  rep.final_simplex_size = std::max(lo.final_simplex_size, hi.final_simplex_size);
  return rep;
}

}  // namespace subquad

#endif
