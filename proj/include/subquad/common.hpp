// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_COMMON_HPP
#define SUBQUAD_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace subquad {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Caller passed invalid arguments or an invalid configuration.
class UsageError : public Error {
public:
  using Error::Error;
};

/// A value-domain precondition was violated (positivity, finiteness of inputs).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A non-finite value appeared during evaluation.
class NumericError : public Error {
public:
  using Error::Error;
};

/// A global search could not produce a result.
class SearchError : public Error {
public:
  using Error::Error;
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace subquad

#endif
