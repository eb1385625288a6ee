// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_NONLINEARITY_HPP
#define SUBQUAD_NONLINEARITY_HPP

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "subquad/common.hpp"

namespace subquad {

struct Hessian2 {
  double ss = 0.0;
  double st = 0.0;  // single-valued cross entry
  double tt = 0.0;
};

/// Coupled potential F(s,t) with first and second partial derivatives.
/// Immutable after construction; all evaluations are pure, so instances can
/// be shared freely across threads.
///
/// Catalog entries carry analytic derivatives. User-supplied entries fall
/// back to central differences with step h = max(1e-6, 1e-6*(|s|+|t|)).
struct Nonlinearity {
  std::string name;
  std::function<double(double, double)> value;
  std::function<std::array<double, 2>(double, double)> gradient;
  std::function<Hessian2(double, double)> hessian;
};

namespace detail {
inline void check_point(double s, double t, const char* what) {
  if (!std::isfinite(s) || !std::isfinite(t))
    throw DomainError(std::string(what) + ": non-finite input point");
}

inline double fd_step(double s, double t) {
  return std::max(1e-6, 1e-6 * (std::abs(s) + std::abs(t)));
}
}  // namespace detail

inline double eval(const Nonlinearity& nl, double s, double t) {
  detail::check_point(s, t, "eval");
  return nl.value(s, t);
}

inline std::array<double, 2> grad(const Nonlinearity& nl, double s, double t) {
  detail::check_point(s, t, "grad");
  return nl.gradient(s, t);
}

inline Hessian2 hess(const Nonlinearity& nl, double s, double t) {
  detail::check_point(s, t, "hess");
  return nl.hessian(s, t);
}

/// F scaled by a positive constant; derivatives scale with it.
inline Nonlinearity scaled(const Nonlinearity& nl, double k) {
  Nonlinearity out;
  out.name = nl.name + "*" + std::to_string(k);
  auto v = nl.value;
  auto g = nl.gradient;
  auto h = nl.hessian;
  out.value = [v, k](double s, double t) { return k * v(s, t); };
  out.gradient = [g, k](double s, double t) {
    auto d = g(s, t);
    return std::array<double, 2>{k * d[0], k * d[1]};
  };
  out.hessian = [h, k](double s, double t) {
    auto H = h(s, t);
    return Hessian2{k * H.ss, k * H.st, k * H.tt};
  };
  return out;
}

/// Builds an entry from a value function alone. Gradient and second
/// derivatives come from central differences of the value.
inline Nonlinearity from_value(std::string name, std::function<double(double, double)> f) {
  Nonlinearity out;
  out.name = std::move(name);
  out.value = f;
  out.gradient = [f](double s, double t) {
    const double h = detail::fd_step(s, t);
    return std::array<double, 2>{(f(s + h, t) - f(s - h, t)) / (2.0 * h),
                                 (f(s, t + h) - f(s, t - h)) / (2.0 * h)};
  };
  // Second differences of the value; the cross entry averages the two
  // orderings so it is single-valued.
  out.hessian = [f](double s, double t) {
    const double h = detail::fd_step(s, t);
    Hessian2 H;
    const double f0 = f(s, t);
    H.ss = (f(s + h, t) - 2.0 * f0 + f(s - h, t)) / (h * h);
    H.tt = (f(s, t + h) - 2.0 * f0 + f(s, t - h)) / (h * h);
    H.st = (f(s + h, t + h) - f(s + h, t - h) - f(s - h, t + h) + f(s - h, t - h)) /
           (4.0 * h * h);
    return H;
  };
  return out;
}

/// Builds an entry from value and analytic gradient; second derivatives are
/// central differences of the gradient, symmetrized in the cross entry.
inline Nonlinearity from_value_gradient(std::string name,
                                        std::function<double(double, double)> f,
                                        std::function<std::array<double, 2>(double, double)> g) {
  Nonlinearity out;
  out.name = std::move(name);
  out.value = std::move(f);
  out.gradient = g;
  out.hessian = [g](double s, double t) {
    const double h = detail::fd_step(s, t);
    const auto gp_s = g(s + h, t), gm_s = g(s - h, t);
    const auto gp_t = g(s, t + h), gm_t = g(s, t - h);
    Hessian2 H;
    H.ss = (gp_s[0] - gm_s[0]) / (2.0 * h);
    H.tt = (gp_t[1] - gm_t[1]) / (2.0 * h);
    H.st = 0.5 * ((gp_t[0] - gm_t[0]) + (gp_s[1] - gm_s[1])) / (2.0 * h);
    return H;
  };
  return out;
}

namespace detail {
// All catalog entries are of the form F(s,t) = g(w) with w = s^2 t^2 for a
// scalar profile g with g(0) = 0, g >= 0, and sublinear growth. Chain rule:
//   F_s = g'(w) 2st^2,                F_t = g'(w) 2s^2 t,
//   F_ss = g'' (2st^2)^2 + g' 2t^2,   F_st = g'' 4s^3 t^3 + g' 4st,
//   F_tt = g'' (2s^2 t)^2 + g' 2s^2.
inline Nonlinearity coupled_profile(std::string name, std::function<double(double)> g,
                                    std::function<double(double)> g1,
                                    std::function<double(double)> g2) {
  Nonlinearity out;
  out.name = std::move(name);
  out.value = [g](double s, double t) { return g(s * s * t * t); };
  out.gradient = [g1](double s, double t) {
    const double w = s * s * t * t;
    const double d = g1(w);
    return std::array<double, 2>{d * 2.0 * s * t * t, d * 2.0 * s * s * t};
  };
  out.hessian = [g1, g2](double s, double t) {
    const double w = s * s * t * t;
    const double d1 = g1(w), d2 = g2(w);
    const double ws = 2.0 * s * t * t, wt = 2.0 * s * s * t;
    Hessian2 H;
    H.ss = d2 * ws * ws + d1 * 2.0 * t * t;
    H.st = d2 * ws * wt + d1 * 4.0 * s * t;
    H.tt = d2 * wt * wt + d1 * 2.0 * s * s;
    return H;
  };
  return out;
}
}  // namespace detail

/// F(s,t) = ln(1 + s^2 t^2).
inline Nonlinearity catalog_log() {
  return detail::coupled_profile(
      "log-coupled", [](double w) { return std::log1p(w); },
      [](double w) { return 1.0 / (1.0 + w); },
      [](double w) { return -1.0 / ((1.0 + w) * (1.0 + w)); });
}

/// F(s,t) = atan(s^2 t^2).
inline Nonlinearity catalog_atan() {
  return detail::coupled_profile(
      "atan-coupled", [](double w) { return std::atan(w); },
      [](double w) { return 1.0 / (1.0 + w * w); },
      [](double w) { return -2.0 * w / ((1.0 + w * w) * (1.0 + w * w)); });
}

/// F(s,t) = s^2 t^2 / (1 + s^2 t^2).
inline Nonlinearity catalog_rational() {
  return detail::coupled_profile(
      "rational-coupled", [](double w) { return w / (1.0 + w); },
      [](double w) { return 1.0 / ((1.0 + w) * (1.0 + w)); },
      [](double w) { return -2.0 / ((1.0 + w) * (1.0 + w) * (1.0 + w)); });
}

inline std::vector<std::string> catalog_names() {
  return {"log-coupled", "atan-coupled", "rational-coupled"};
}

inline Nonlinearity catalog(const std::string& name) {
  if (name == "log-coupled") return catalog_log();
  if (name == "atan-coupled") return catalog_atan();
  if (name == "rational-coupled") return catalog_rational();
  throw UsageError("unknown catalog nonlinearity '" + name +
                   "' (known: log-coupled, atan-coupled, rational-coupled)");
}

/// Sampled evidence for the structural hypotheses on F: nonnegativity with
/// F(0,0) = 0, and decay of max(|F_s|,|F_t|)/(|s|+|t|) both near the origin
/// and at large radii. Sampling can support but never prove the limits; the
/// raw profiles are kept so decay can be inspected.
struct HypothesisReport {
  bool f_plus_ok = false;    // F >= 0 at all samples and F(0,0) = 0
  bool nonzero_seen = false; // evidence that F is not identically zero
  bool decay_at_zero_ok = false;
  bool decay_at_infinity_ok = false;
  std::vector<std::pair<double, double>> f0_profile;    // (radius, max ratio), radii <= 1
  std::vector<std::pair<double, double>> f_inf_profile; // (radius, max ratio), radii > 1
  double M_estimate = 0.0;  // max sampled ratio; F <= 2*M*(s^2+t^2) heuristic constant
  double tol = 0.0;
  bool pass = false;
};

/// Ratio max(|F_s|,|F_t|)/(|s|+|t|), defined as 0 at the origin (its
/// hypothesized limit).
inline double gradient_ratio(const Nonlinearity& nl, double s, double t) {
  const double denom = std::abs(s) + std::abs(t);
  if (denom == 0.0) return 0.0;
  const auto g = grad(nl, s, t);
  return std::max(std::abs(g[0]), std::abs(g[1])) / denom;
}

inline HypothesisReport check_hypotheses(const Nonlinearity& nl,
                                         const std::vector<double>& radii,
                                         int angles_per_radius, double tol) {
  if (radii.empty()) throw UsageError("check_hypotheses: empty radii list");
  if (angles_per_radius < 8)
    throw UsageError("check_hypotheses: need at least 8 angles per radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw UsageError("check_hypotheses: radii must be positive");
    if (i > 0 && radii[i] <= radii[i - 1])
      throw UsageError("check_hypotheses: radii must be sorted ascending");
  }

  HypothesisReport rep;
  rep.tol = tol;
  const double f00 = eval(nl, 0.0, 0.0);
  bool nonneg = std::abs(f00) <= 1e-12;

  const double two_pi = 6.283185307179586476925286766559;
  std::vector<double> ratio_per_radius(radii.size(), 0.0);
  for (std::size_t ir = 0; ir < radii.size(); ++ir) {
    const double r = radii[ir];
    double worst = 0.0;
    for (int ia = 0; ia < angles_per_radius; ++ia) {
      const double th = two_pi * ia / angles_per_radius;
      // Snap representation noise at cardinal angles to exact zero: on a
      // uniform grid |sin| and |cos| are either 0 or >= sin(2*pi/n), so a
      // value below 1e-15 can only be a rounded zero.  Without the snap,
      // sin(pi) = 1.2e-16 places the axis sample at t = r*1.2e-16, where
      // the quadratic regime of F inflates the ratio by r^2.
      double co = std::cos(th), si = std::sin(th);
      if (std::abs(co) < 1e-15) co = 0.0;
      if (std::abs(si) < 1e-15) si = 0.0;
      const double s = r * co, t = r * si;
      const double F = eval(nl, s, t);
      if (F < -1e-12) nonneg = false;
      if (F > 0.0) rep.nonzero_seen = true;
      worst = std::max(worst, gradient_ratio(nl, s, t));
    }
    ratio_per_radius[ir] = worst;
    rep.M_estimate = std::max(rep.M_estimate, worst);
    auto& profile = (r <= 1.0) ? rep.f0_profile : rep.f_inf_profile;
    profile.emplace_back(r, worst);
  }

  rep.f_plus_ok = nonneg;
  rep.decay_at_zero_ok = ratio_per_radius.front() < tol;
  rep.decay_at_infinity_ok = ratio_per_radius.back() < tol;
  rep.pass = rep.f_plus_ok && rep.decay_at_zero_ok && rep.decay_at_infinity_ok;
  return rep;
}

/// Log-spaced radii, endpoints included.
inline std::vector<double> log_spaced(double r_min, double r_max, int n) {
  if (!(r_min > 0.0) || !(r_max > r_min) || n < 2)
    throw UsageError("log_spaced: need 0 < r_min < r_max and n >= 2");
  std::vector<double> out(n);
  const double l0 = std::log(r_min), l1 = std::log(r_max);
  for (int i = 0; i < n; ++i)
    out[i] = std::exp(l0 + (l1 - l0) * i / (n - 1));
  out.front() = r_min;
  out.back() = r_max;
  return out;
}

}  // namespace subquad

#endif
