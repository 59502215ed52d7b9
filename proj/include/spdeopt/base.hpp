#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdeopt {

inline constexpr const char* k_version = "0.1.0";

using vec = std::vector<double>;

constexpr double k_inf = std::numeric_limits<double>::infinity();

/// Inconsistent problem description (bad grids, indefinite Robin weights,
/// mismatched spaces, missing declared bounds).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested operation is not supported by the assembled problem
/// (e.g. Hamiltonian scans with control-dependent diffusion).
class capability_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: Newton stagnation, NaN states, rank loss.
class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

inline double dot(const vec& a, const vec& b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double nrm2(const vec& a) { return std::sqrt(dot(a, a)); }

inline double nrm_inf(const vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline void axpy(double a, const vec& x, vec& y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline vec scaled(const vec& x, double a) {
  vec y(x);
  for (double& v : y) v *= a;
  return y;
}

inline vec added(const vec& x, const vec& y) {
  vec z(x);
  axpy(1.0, y, z);
  return z;
}

inline vec subtracted(const vec& x, const vec& y) {
  vec z(x);
  axpy(-1.0, y, z);
  return z;
}

inline vec hadamard(const vec& x, const vec& y) {
  require(x.size() == y.size(), "hadamard: length mismatch");
  vec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] * y[i];
  return z;
}

inline bool all_finite(const vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Least-squares slope of log(y) vs log(x); order-of-convergence sweeps.
inline double log_log_slope(const vec& x, const vec& y) {
  require(x.size() == y.size() && x.size() >= 2, "log_log_slope: need >= 2 points");
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace spdeopt
