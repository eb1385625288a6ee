// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT
#pragma once

#include <memory>
#include <vector>

#include <subquad/grid.hpp>

namespace subquad::testing {

/// 1-D grid on [0, L] with n nodes.
inline std::shared_ptr<const GridDomain> interval(int n, double length = 1.0) {
  return std::make_shared<const GridDomain>(build_uniform_grid(1, {length}, {n}));
}

/// 2-D tensor grid on [0, Lx] x [0, Ly] with nx * ny nodes.
inline std::shared_ptr<const GridDomain> rectangle(int nx, int ny, double lx = 1.0,
                                                   double ly = 1.0) {
  return std::make_shared<const GridDomain>(build_uniform_grid(2, {lx, ly}, {nx, ny}));
}

/// Unit coefficient bundle (a = b = c = 1) on the given grid.
inline CoefficientField unit_coefficients(std::shared_ptr<const GridDomain> grid) {
  return constant_coefficients(std::move(grid), 1.0, 1.0, 1.0);
}

// Frozen reference constants for the log-coupled catalog nonlinearity with
// unit coefficient norms, computed independently at 40-digit precision and
// rounded to the nearest double.
//
// x* solves 2x/(1+x) = ln(1+x); the lower threshold argmax is the diagonal
// point with s^2 t^2 = x*, and the threshold value is ln(1+x*)/sqrt(x*).
inline constexpr double kLogXStar = 3.921553634567505092;
inline constexpr double kLogArgmaxComponent = 1.407228233241577964;  // x*^(1/4)
inline constexpr double kLogLowerThreshold = 0.8047423425494118112;
inline constexpr double kLogUpperThreshold = 1.0;  // attained at |s| = |t| = 1
// lambda used throughout the multiplicity tests: 2 / lower threshold.
inline constexpr double kLambdaTwoOverSF = 2.485267512660051724;
// Spatially constant solutions at that lambda solve q^4 - 2*lambda*q^2 + 1 = 0.
inline constexpr double kConstRootLarge = 2.181850547875195813;
inline constexpr double kConstRootSmall = 0.4583265343145772011;
// Scalar energies q^2 - lambda*ln(1+q^4) of those constants (unit square).
inline constexpr double kConstEnergyLarge = -3.102602121745541276;
inline constexpr double kConstEnergySmall = 0.1027476173959323366;

// Independent constants for the other two catalog entries (unit norms).
inline constexpr double kAtanLowerThreshold = 0.8033644569767003088;
inline constexpr double kAtanUpperThreshold = 1.139753528477388821;  // 1.5 * 3^(-1/4)
inline constexpr double kRationalLowerThreshold = 0.5;               // exact, argmax (1,1)
inline constexpr double kRationalUpperThreshold = 0.6495190528383289851;  // 3*sqrt(3)/8

}  // namespace subquad::testing
