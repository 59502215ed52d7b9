#pragma once

#include <array>
#include <span>

#include "grid.hpp"

namespace spdeopt {

/// One (sample, step) view of a control: interior values per dof and,
/// when the problem has boundary control, the two endpoint values.
struct control_slice {
  std::span<const double> interior;
  std::span<const double> boundary;  // empty or size 2
};

/// Control values on (sample, step, node) plus an optional boundary channel
/// on (sample, step, side). n_samples == 1 means a deterministic control
/// broadcast across the ensemble; larger fields are per-sample. Values at
/// step j enter the dynamics on [t_j, t_{j+1}), so feedback-free fields are
/// adapted by construction.
struct control_field {
  int n_samples = 1;
  int n_steps = 0;
  int n_interior = 0;
  int n_boundary = 0;  // 0 or 2
  vec interior;        // [sample][step][node]
  vec boundary;        // [sample][step][side]

  static control_field zeros(int n_samples, int n_steps, int n_interior, int n_boundary = 0) {
    control_field u;
    u.n_samples = n_samples;
    u.n_steps = n_steps;
    u.n_interior = n_interior;
    u.n_boundary = n_boundary;
    u.interior.assign(static_cast<std::size_t>(n_samples) * n_steps * n_interior, 0.0);
    u.boundary.assign(static_cast<std::size_t>(n_samples) * n_steps * n_boundary, 0.0);
    return u;
  }

  bool deterministic() const { return n_samples == 1; }

  bool same_shape(const control_field& o) const {
    return n_samples == o.n_samples && n_steps == o.n_steps && n_interior == o.n_interior &&
           n_boundary == o.n_boundary;
  }

  std::size_t int_offset(int s, int j) const {
    return (static_cast<std::size_t>(s) * n_steps + j) * n_interior;
  }
  std::size_t bdy_offset(int s, int j) const {
    return (static_cast<std::size_t>(s) * n_steps + j) * n_boundary;
  }

  /// Broadcasting view: any sample index maps to sample 0 of a
  /// deterministic field.
  control_slice at(int s, int j) const {
    require(j >= 0 && j < n_steps, "control_field::at: step out of range");
    const int ss = deterministic() ? 0 : s;
    control_slice c;
    c.interior = std::span<const double>(interior.data() + int_offset(ss, j), n_interior);
    if (n_boundary > 0)
      c.boundary = std::span<const double>(boundary.data() + bdy_offset(ss, j), n_boundary);
    return c;
  }

  double* interior_row(int s, int j) { return interior.data() + int_offset(s, j); }
  double* boundary_row(int s, int j) { return boundary.data() + bdy_offset(s, j); }

  control_field& operator+=(const control_field& o) {
    require(same_shape(o), "control_field: shape mismatch");
    axpy(1.0, o.interior, interior);
    if (n_boundary > 0) axpy(1.0, o.boundary, boundary);
    return *this;
  }

  control_field& scale_by(double a) {
    for (double& v : interior) v *= a;
    for (double& v : boundary) v *= a;
    return *this;
  }
};

inline control_field axpy_field(double a, const control_field& x, control_field y) {
  require(x.same_shape(y), "axpy_field: shape mismatch");
  axpy(a, x.interior, y.interior);
  if (x.n_boundary > 0) axpy(a, x.boundary, y.boundary);
  return y;
}

/// Box constraints per control channel; +-inf bounds are admissible.
struct admissible_box {
  double interior_lo = -k_inf;
  double interior_hi = k_inf;
  double boundary_lo = -k_inf;
  double boundary_hi = k_inf;

  admissible_box() = default;
  admissible_box(double ilo, double ihi, double blo = -k_inf, double bhi = k_inf)
      : interior_lo(ilo), interior_hi(ihi), boundary_lo(blo), boundary_hi(bhi) {
    require(ilo <= ihi && blo <= bhi, "admissible_box: lower bound exceeds upper bound");
  }

  bool interior_bounded() const { return std::isfinite(interior_lo) && std::isfinite(interior_hi); }
  bool boundary_bounded() const { return std::isfinite(boundary_lo) && std::isfinite(boundary_hi); }
};

/// Pointwise clamp onto the box; idempotent.
inline control_field project(control_field u, const admissible_box& box) {
  for (double& v : u.interior) v = std::min(std::max(v, box.interior_lo), box.interior_hi);
  for (double& v : u.boundary) v = std::min(std::max(v, box.boundary_lo), box.boundary_hi);
  return u;
}

/// Inner product on the control space: mean over samples of
/// sum_j dt [ (u_j, v_j)_{L2 interior} + (u_j, v_j)_{boundary counting} ].
inline double control_inner(const control_field& u, const control_field& v,
                            const time_grid& tgrid, const vec& interior_mass) {
  require(u.same_shape(v), "control_inner: shape mismatch");
  require(static_cast<int>(interior_mass.size()) == u.n_interior, "control_inner: mass mismatch");
  const double dt = tgrid.dt();
  double acc = 0.0;
  for (int s = 0; s < u.n_samples; ++s) {
    for (int j = 0; j < u.n_steps; ++j) {
      const double* a = u.interior.data() + u.int_offset(s, j);
      const double* b = v.interior.data() + v.int_offset(s, j);
      double si = 0.0;
      for (int i = 0; i < u.n_interior; ++i) si += interior_mass[i] * a[i] * b[i];
      double sb = 0.0;
      for (int i = 0; i < u.n_boundary; ++i)
        sb += u.boundary[u.bdy_offset(s, j) + i] * v.boundary[v.bdy_offset(s, j) + i];
      acc += dt * (si + sb);
    }
  }
  return acc / u.n_samples;
}

inline double control_norm(const control_field& u, const time_grid& tgrid,
                           const vec& interior_mass) {
  return std::sqrt(std::max(0.0, control_inner(u, u, tgrid, interior_mass)));
}

inline double control_max_abs(const control_field& u) {
  double m = 0.0;
  for (double v : u.interior) m = std::max(m, std::abs(v));
  for (double v : u.boundary) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace spdeopt
