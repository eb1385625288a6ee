// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_GRID_HPP
#define SUBQUAD_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subquad/common.hpp"

namespace subquad {

/// Uniform tensor grid on an interval (0,Lx) or rectangle (0,Lx)x(0,Ly),
/// node counts include the boundary nodes. Node ordering is lexicographic
/// with x fastest. Quadrature is the trapezoid rule; every weight is
/// strictly positive and the weights sum to the domain measure.
struct GridDomain {
  int dim = 1;
  std::array<double, 2> lengths{1.0, 0.0};
  std::array<int, 2> counts{2, 1};
  std::array<double, 2> spacing{1.0, 0.0};
  std::vector<double> quad_weights;

  int n_nodes() const { return counts[0] * counts[1]; }

  double measure() const {
    return dim == 1 ? lengths[0] : lengths[0] * lengths[1];
  }

  int index(int ix, int iy) const { return iy * counts[0] + ix; }

  double node_x(int i) const { return spacing[0] * (i % counts[0]); }

  double node_y(int i) const {
    return dim == 1 ? 0.0 : spacing[1] * (i / counts[0]);
  }
};

inline GridDomain build_uniform_grid(int dim, const std::vector<double>& lengths,
                                     const std::vector<int>& counts) {
  if (dim != 1 && dim != 2)
    throw UsageError("build_uniform_grid: dim must be 1 or 2, got " + std::to_string(dim));
  if (static_cast<int>(lengths.size()) != dim || static_cast<int>(counts.size()) != dim)
    throw UsageError("build_uniform_grid: lengths/counts must have one entry per dimension");
  for (double L : lengths)
    if (!(L > 0.0) || !std::isfinite(L))
      throw UsageError("build_uniform_grid: lengths must be positive and finite");
  for (int n : counts)
    if (n < 3) throw UsageError("build_uniform_grid: need at least 3 nodes per axis");

  GridDomain g;
  g.dim = dim;
  g.lengths = {lengths[0], dim == 2 ? lengths[1] : 0.0};
  g.counts = {counts[0], dim == 2 ? counts[1] : 1};
  g.spacing = {lengths[0] / (counts[0] - 1),
               dim == 2 ? lengths[1] / (counts[1] - 1) : 0.0};

  // 1-D trapezoid weight per axis: h/2 at the two boundary nodes, h inside;
  // the 2-D weights are the tensor product.
  auto axis_weight = [](int i, int n, double h) {
    return (i == 0 || i == n - 1) ? 0.5 * h : h;
  };
  g.quad_weights.resize(g.n_nodes());
  for (int iy = 0; iy < g.counts[1]; ++iy) {
    const double wy = dim == 2 ? axis_weight(iy, g.counts[1], g.spacing[1]) : 1.0;
    for (int ix = 0; ix < g.counts[0]; ++ix) {
      g.quad_weights[g.index(ix, iy)] = wy * axis_weight(ix, g.counts[0], g.spacing[0]);
    }
  }
  return g;
}

/// Trapezoid quadrature of a nodal vector.
inline double integral(const GridDomain& grid, std::span<const double> f) {
  if (static_cast<int>(f.size()) != grid.n_nodes())
    throw UsageError("integral: nodal vector has " + std::to_string(f.size()) +
                     " entries, grid has " + std::to_string(grid.n_nodes()) + " nodes");
  double s = 0.0;
  for (int i = 0; i < grid.n_nodes(); ++i) s += grid.quad_weights[i] * f[i];
  return s;
}

/// Nodal samples of the lower-order coefficients. a, b, c must be strictly
/// positive at every node; d is an optional perturbation weight with no sign
/// restriction.
struct CoefficientField {
  std::shared_ptr<const GridDomain> grid;
  std::vector<double> a, b, c;
  std::optional<std::vector<double>> d;
};

namespace detail {
inline void check_field(const GridDomain& grid, std::span<const double> f,
                        const char* name, bool require_positive) {
  if (static_cast<int>(f.size()) != grid.n_nodes())
    throw UsageError(std::string("coefficient '") + name + "' has " +
                     std::to_string(f.size()) + " entries, grid has " +
                     std::to_string(grid.n_nodes()) + " nodes");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i]))
      throw DomainError(std::string("coefficient '") + name + "' is not finite at node " +
                        std::to_string(i));
    if (require_positive && !(f[i] > 0.0))
      throw DomainError(std::string("coefficient '") + name +
                        "' violates positivity at node " + std::to_string(i) +
                        " (value " + std::to_string(f[i]) + ")");
  }
}
}  // namespace detail

inline void validate_coefficients(const CoefficientField& cf) {
  if (!cf.grid) throw UsageError("coefficient field has no grid");
  detail::check_field(*cf.grid, cf.a, "a", true);
  detail::check_field(*cf.grid, cf.b, "b", true);
  detail::check_field(*cf.grid, cf.c, "c", true);
  if (cf.d) detail::check_field(*cf.grid, *cf.d, "d", false);
}

inline CoefficientField make_coefficients(std::shared_ptr<const GridDomain> grid,
                                          std::vector<double> a, std::vector<double> b,
                                          std::vector<double> c,
                                          std::optional<std::vector<double>> d = std::nullopt) {
  CoefficientField cf{std::move(grid), std::move(a), std::move(b), std::move(c), std::move(d)};
  validate_coefficients(cf);
  return cf;
}

inline CoefficientField constant_coefficients(std::shared_ptr<const GridDomain> grid,
                                              double a, double b, double c,
                                              std::optional<double> d = std::nullopt) {
  const int n = grid->n_nodes();
  std::optional<std::vector<double>> dv;
  if (d) dv = std::vector<double>(n, *d);
  return make_coefficients(std::move(grid), std::vector<double>(n, a),
                           std::vector<double>(n, b), std::vector<double>(n, c),
                           std::move(dv));
}

/// The norms of a, b, c entering the threshold constants.
struct NormBundle {
  double a_l1 = 0.0;
  double b_l1 = 0.0;
  double c_l1 = 0.0;
  double c_over_a_inf = 0.0;
  double c_over_b_inf = 0.0;
};

inline NormBundle norms(const CoefficientField& cf) {
  validate_coefficients(cf);
  const GridDomain& g = *cf.grid;
  NormBundle nb;
  for (int i = 0; i < g.n_nodes(); ++i) {
    const double w = g.quad_weights[i];
    nb.a_l1 += w * std::abs(cf.a[i]);
    nb.b_l1 += w * std::abs(cf.b[i]);
    nb.c_l1 += w * std::abs(cf.c[i]);
    nb.c_over_a_inf = std::max(nb.c_over_a_inf, cf.c[i] / cf.a[i]);
    nb.c_over_b_inf = std::max(nb.c_over_b_inf, cf.c[i] / cf.b[i]);
  }
  return nb;
}

}  // namespace subquad

#endif
