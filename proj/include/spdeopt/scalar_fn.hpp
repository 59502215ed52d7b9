#pragma once

#include <functional>

#include "base.hpp"

namespace spdeopt {

/// Scalar nonlinearity with analytic first (and optionally second)
/// derivative plus its declared bounds. The slope bounds are what the
/// hypothesis validators check against sampled values; value_bound is the
/// sup-norm bound used by the Burgers-type drift.
struct scalar_fn {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> second;  // may be empty

  double slope_lo = 0.0;
  double slope_hi = 0.0;
  double value_bound = k_inf;

  bool has_second() const { return static_cast<bool>(second); }
};

inline scalar_fn sf_identity() {
  scalar_fn f;
  f.name = "identity";
  f.value = [](double x) { return x; };
  f.deriv = [](double) { return 1.0; };
  f.second = [](double) { return 0.0; };
  f.slope_lo = 1.0;
  f.slope_hi = 1.0;
  return f;
}

inline scalar_fn sf_affine(double slope) {
  scalar_fn f;
  f.name = "affine";
  f.value = [=](double x) { return slope * x; };
  f.deriv = [=](double) { return slope; };
  f.second = [](double) { return 0.0; };
  f.slope_lo = slope;
  f.slope_hi = slope;
  return f;
}

/// Smooth strictly monotone function with derivative in (lo, hi]:
///   psi(x) = lo x + (hi - lo) x / sqrt(1 + x^2).
inline scalar_fn sf_smooth_monotone(double lo, double hi) {
  scalar_fn f;
  f.name = "smooth_monotone";
  const double b = hi - lo;
  f.value = [=](double x) { return lo * x + b * x / std::sqrt(1.0 + x * x); };
  f.deriv = [=](double x) { return lo + b * std::pow(1.0 + x * x, -1.5); };
  f.second = [=](double x) { return -3.0 * b * x * std::pow(1.0 + x * x, -2.5); };
  f.slope_lo = lo;
  f.slope_hi = hi;
  return f;
}

/// lambda * arctan(x / lambda): bounded with |psi| <= lambda pi/2 and
/// |psi'| <= 1, but inf psi' = 0 over the real line. declared_slope_lo lets
/// callers (deliberately) declare a positive lower bound the validator will
/// then reject on a wide enough sampling range.
inline scalar_fn sf_arctan(double lambda, double declared_slope_lo = 0.0) {
  scalar_fn f;
  f.name = "arctan";
  f.value = [=](double x) { return lambda * std::atan(x / lambda); };
  f.deriv = [=](double x) { return 1.0 / (1.0 + (x / lambda) * (x / lambda)); };
  f.second = [=](double x) {
    const double r = x / lambda;
    return -2.0 * r / (lambda * (1.0 + r * r) * (1.0 + r * r));
  };
  f.slope_lo = declared_slope_lo;
  f.slope_hi = 1.0;
  f.value_bound = lambda * std::numbers::pi / 2.0;
  return f;
}

inline scalar_fn sf_zero() {
  scalar_fn f;
  f.name = "zero";
  f.value = [](double) { return 0.0; };
  f.deriv = [](double) { return 0.0; };
  f.second = [](double) { return 0.0; };
  f.slope_lo = 0.0;
  f.slope_hi = 0.0;
  f.value_bound = 0.0;
  return f;
}

}  // namespace spdeopt
