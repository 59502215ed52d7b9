#pragma once

#include "dynamics.hpp"

namespace spdeopt {

struct solver_options {
  double newton_tol = 1e-12;  // relative residual target per implicit step
  int max_newton_iter = 30;
  int max_line_halvings = 30;
};

/// Time-indexed ensemble of spatial vectors on a shared grid, together with
/// the control, initial state and driver it was solved with. Immutable
/// after solve.
struct state_path {
  int n_samples = 0;
  int n_steps = 0;
  int n_dof = 0;
  vec data;  // [(s * (n_steps+1) + j) * n_dof + i]
  control_field control;
  vec x0;
  brownian_driver driver;

  std::size_t offset(int s, int j) const {
    return (static_cast<std::size_t>(s) * (n_steps + 1) + j) * n_dof;
  }
  std::span<const double> x(int s, int j) const {
    return std::span<const double>(data.data() + offset(s, j), n_dof);
  }
  vec x_vec(int s, int j) const {
    const auto v = x(s, j);
    return vec(v.begin(), v.end());
  }
  double* mutable_x(int s, int j) { return data.data() + offset(s, j); }
};

using linearized_path = state_path;  // same layout; z rows, zero initial row

namespace detail {

inline void check_control_shape(const dynamics_spec& spec, const control_field& u,
                                const brownian_driver& driver) {
  require(u.n_interior == spec.n_dof(), "control interior width does not match the grid");
  require(u.n_boundary == spec.n_boundary_control(),
          "control boundary channel does not match the dynamics");
  require(u.n_steps == driver.tgrid.n_steps, "control steps do not match the time grid");
  require(u.n_samples == 1 || u.n_samples == driver.n_samples,
          "control ensemble size does not match the driver");
  require(driver.n_modes == spec.noise().n_modes &&
              driver.boundary_channel == spec.noise().boundary_channel,
          "driver channels do not match the noise model");
}

inline vec increments_row(const brownian_driver& d, int sample, int step) {
  vec r(d.n_channels());
  for (int c = 0; c < d.n_channels(); ++c) r[c] = d.increment(sample, step, c);
  return r;
}

/// Drift-implicit step: solve y = target + dt A(t, y, u) by Newton with
/// residual backtracking; the monotone drift makes this a contraction-like
/// system and the Jacobian stays tridiagonal.
inline vec implicit_step(const dynamics_spec& spec, double t, double dt, const vec& target,
                         const control_slice& u, const solver_options& opts, int sample,
                         int step) {
  const discrete_triple& tr = spec.space();
  const double scale = std::max(1.0, tr.norm_l2(target));
  vec y = target;
  auto residual = [&](const vec& w) {
    vec f = spec.drift(t, w, u);
    for (int i = 0; i < tr.n_dof; ++i) f[i] = w[i] - dt * f[i] - target[i];
    return f;
  };
  vec f = residual(y);
  double fn = tr.norm_l2(f);
  for (int it = 0; it < opts.max_newton_iter; ++it) {
    if (!all_finite(f))
      throw solver_error("implicit_step: non-finite residual at sample " +
                         std::to_string(sample) + ", step " + std::to_string(step));
    if (fn <= opts.newton_tol * scale) return y;
    tridiag j = spec.drift_jac_x(t, y, u);
    j.scale(-dt);
    j.add_scaled_identity(1.0);
    const vec delta = tridiag_lu(j).solve(scaled(f, -1.0));
    double alpha = 1.0;
    for (int h = 0; h <= opts.max_line_halvings; ++h) {
      vec trial = y;
      axpy(alpha, delta, trial);
      vec ft = residual(trial);
      const double ftn = tr.norm_l2(ft);
      if (ftn <= (1.0 - 1e-4 * alpha) * fn || ftn <= opts.newton_tol * scale) {
        y = std::move(trial);
        f = std::move(ft);
        fn = ftn;
        break;
      }
      alpha *= 0.5;
      if (h == opts.max_line_halvings)
        throw solver_error("implicit_step: line search stalled at sample " +
                           std::to_string(sample) + ", step " + std::to_string(step));
    }
  }
  if (fn <= opts.newton_tol * scale * 16.0) return y;  // near-converged tail
  throw solver_error("implicit_step: Newton did not converge at sample " +
                     std::to_string(sample) + ", step " + std::to_string(step) +
                     " (residual " + std::to_string(fn) + ")");
}

}  // namespace detail

/// Forward drift-implicit Euler-Maruyama over the seeded ensemble:
///   x_{j+1} = x_j + dt A(t_j, x_{j+1}, u_j) + sigma(t_j, x_j, u_j) dW_j.
inline state_path solve_forward(const dynamics_spec& spec, const control_field& u, const vec& x0,
                                const brownian_driver& driver, const solver_options& opts = {}) {
  const discrete_triple& tr = spec.space();
  require(tr.check_dim(x0), "solve_forward: x0 does not match the grid");
  detail::check_control_shape(spec, u, driver);

  state_path p;
  p.n_samples = driver.n_samples;
  p.n_steps = driver.tgrid.n_steps;
  p.n_dof = tr.n_dof;
  p.data.assign(static_cast<std::size_t>(p.n_samples) * (p.n_steps + 1) * p.n_dof, 0.0);
  p.control = u;
  p.x0 = x0;
  p.driver = driver;

  const double dt = driver.tgrid.dt();
  for (int s = 0; s < p.n_samples; ++s) {
    vec x = x0;
    std::copy(x.begin(), x.end(), p.mutable_x(s, 0));
    for (int j = 0; j < p.n_steps; ++j) {
      const control_slice us = u.at(s, j);
      const vec dw = detail::increments_row(driver, s, j);
      vec target = spec.sigma_increment(driver.tgrid.t(j), x, us, dw);
      axpy(1.0, x, target);
      x = detail::implicit_step(spec, driver.tgrid.t(j), dt, target, us, opts, s, j);
      if (!all_finite(x))
        throw solver_error("solve_forward: non-finite state at sample " + std::to_string(s) +
                           ", step " + std::to_string(j + 1));
      std::copy(x.begin(), x.end(), p.mutable_x(s, j + 1));
    }
  }
  return p;
}

/// Linearized dynamics along a solved base path, frozen coefficients, same
/// driver (common random numbers). This is the exact derivative of the
/// discrete forward map in the direction v.
inline linearized_path solve_linearized(const dynamics_spec& spec, const state_path& base,
                                        const control_field& v, const brownian_driver& driver) {
  require(driver.same_stream(base.driver), "solve_linearized: driver differs from the base path");
  detail::check_control_shape(spec, v, driver);

  linearized_path p;
  p.n_samples = base.n_samples;
  p.n_steps = base.n_steps;
  p.n_dof = base.n_dof;
  p.data.assign(base.data.size(), 0.0);
  p.control = v;
  p.x0.assign(base.n_dof, 0.0);
  p.driver = driver;

  const double dt = driver.tgrid.dt();
  for (int s = 0; s < p.n_samples; ++s) {
    vec z(p.n_dof, 0.0);
    for (int j = 0; j < p.n_steps; ++j) {
      const double t = driver.tgrid.t(j);
      const control_slice us = base.control.at(s, j);
      const control_slice vs = v.at(s, j);
      const vec dw = detail::increments_row(driver, s, j);
      const vec xj = base.x_vec(s, j);
      const vec xj1 = base.x_vec(s, j + 1);
      vec rhs = spec.sigma_dx_increment(z, dw);
      axpy(1.0, z, rhs);
      axpy(1.0, spec.sigma_du_increment(vs, dw), rhs);
      axpy(dt, spec.drift_du(t, xj1, vs), rhs);
      (void)xj;
      tridiag jm = spec.drift_jac_x(t, xj1, us);
      jm.scale(-dt);
      jm.add_scaled_identity(1.0);
      z = tridiag_lu(jm).solve(rhs);
      std::copy(z.begin(), z.end(), p.mutable_x(s, j + 1));
    }
  }
  return p;
}

/// Needle perturbation: v on [t0, t0 + eps), u elsewhere. The window is
/// snapped to whole steps.
inline control_field spike_control(const control_field& u, const control_field& v, double t0,
                                   double eps, const time_grid& tgrid) {
  require(u.same_shape(v), "spike_control: control shapes differ");
  require(u.n_steps == tgrid.n_steps, "spike_control: control does not match the time grid");
  require(t0 >= 0.0 && t0 < tgrid.horizon, "spike_control: t0 out of range");
  require(eps > 0.0 && eps <= tgrid.horizon - t0 + 1e-12 * tgrid.horizon,
          "spike_control: eps out of range");
  const double dt = tgrid.dt();
  const int j0 = static_cast<int>(std::llround(t0 / dt));
  int m = std::max<int>(1, static_cast<int>(std::llround(eps / dt)));
  require(j0 >= 0 && j0 < tgrid.n_steps, "spike_control: snapped t0 out of range");
  m = std::min(m, tgrid.n_steps - j0);

  control_field w = u;
  for (int s = 0; s < u.n_samples; ++s) {
    for (int j = j0; j < j0 + m; ++j) {
      std::copy(v.interior.begin() + v.int_offset(s, j),
                v.interior.begin() + v.int_offset(s, j) + v.n_interior,
                w.interior.begin() + w.int_offset(s, j));
      if (u.n_boundary > 0)
        std::copy(v.boundary.begin() + v.bdy_offset(s, j),
                  v.boundary.begin() + v.bdy_offset(s, j) + v.n_boundary,
                  w.boundary.begin() + w.bdy_offset(s, j));
    }
  }
  return w;
}

/// Linearized spike dynamics: frozen state Jacobian along the base path with
/// the bounded drift difference A(t, x, u^eps) - A(t, x, u) as forcing.
/// Needs control-independent diffusion.
inline linearized_path solve_spike_linearized(const dynamics_spec& spec, const state_path& base,
                                              const control_field& v, double t0, double eps,
                                              const brownian_driver& driver) {
  if (!spec.control_independent_sigma())
    throw capability_error(
        "solve_spike_linearized: the diffusion depends on the control ((A~) fails)");
  require(driver.same_stream(base.driver), "solve_spike_linearized: driver differs from base");
  const control_field u_eps = spike_control(base.control, v, t0, eps, driver.tgrid);

  linearized_path p;
  p.n_samples = base.n_samples;
  p.n_steps = base.n_steps;
  p.n_dof = base.n_dof;
  p.data.assign(base.data.size(), 0.0);
  p.control = v;
  p.x0.assign(base.n_dof, 0.0);
  p.driver = driver;

  const double dt = driver.tgrid.dt();
  for (int s = 0; s < p.n_samples; ++s) {
    vec z(p.n_dof, 0.0);
    for (int j = 0; j < p.n_steps; ++j) {
      const double t = driver.tgrid.t(j);
      const control_slice us = base.control.at(s, j);
      const control_slice es = u_eps.at(s, j);
      const vec dw = detail::increments_row(driver, s, j);
      const vec xj1 = base.x_vec(s, j + 1);
      vec rhs = spec.sigma_dx_increment(z, dw);
      axpy(1.0, z, rhs);
      vec force = subtracted(spec.drift(t, xj1, es), spec.drift(t, xj1, us));
      axpy(dt, force, rhs);
      tridiag jm = spec.drift_jac_x(t, xj1, us);
      jm.scale(-dt);
      jm.add_scaled_identity(1.0);
      z = tridiag_lu(jm).solve(rhs);
      std::copy(z.begin(), z.end(), p.mutable_x(s, j + 1));
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Path norms and the well-posedness bound checks
// ---------------------------------------------------------------------------

struct path_norm_parts {
  double sup_h_sq = 0.0;   // E max_j ||.||_H^2
  double int_v0_sq = 0.0;  // E sum_j dt ||.||_V0^2 (left endpoints)
};

/// Components of the discrete path norm for a path or a difference of two
/// paths solved on the same driver.
inline path_norm_parts path_norm_components(const discrete_triple& tr, const state_path& a,
                                            const state_path* b = nullptr) {
  if (b != nullptr)
    require(a.data.size() == b->data.size() && a.n_samples == b->n_samples,
            "path_norm_components: incompatible paths");
  const double dt = a.driver.tgrid.dt();
  path_norm_parts out;
  vec w(a.n_dof);
  for (int s = 0; s < a.n_samples; ++s) {
    double sup = 0.0, integ = 0.0;
    for (int j = 0; j <= a.n_steps; ++j) {
      const auto xa = a.x(s, j);
      for (int i = 0; i < a.n_dof; ++i)
        w[i] = b ? xa[i] - b->x(s, j)[i] : xa[i];
      const double nh = tr.norm_h(w);
      sup = std::max(sup, nh * nh);
      if (j < a.n_steps) {
        const double nv = tr.norm_v0(w);
        integ += dt * nv * nv;
      }
    }
    out.sup_h_sq += sup;
    out.int_v0_sq += integ;
  }
  out.sup_h_sq /= a.n_samples;
  out.int_v0_sq /= a.n_samples;
  return out;
}

/// Discrete state-space norm: sqrt(E sup ||.||_H^2 + E int ||.||_V0^2).
inline double path_x_norm(const discrete_triple& tr, const state_path& a,
                          const state_path* b = nullptr) {
  const path_norm_parts p = path_norm_components(tr, a, b);
  return std::sqrt(p.sup_h_sq + p.int_v0_sq);
}

struct bound_report {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// One-sided a-priori energy inequality for a solved path:
///   1/2 E sup ||x||_H^2 + M E int ||x||_V0^2
///     <= e^{2(alpha + L^2(1+2c1^2))T} (||x0||_H^2
///        + 2 E int [ (1/M)||A(t,0,u)||_V1^2 + L^2(1+2c1^2)||sigma(t,0,u)||_HS^2 ]).
inline bound_report energy_bound_check(const dynamics_spec& spec, const state_path& base) {
  const discrete_triple& tr = spec.space();
  const hypothesis_constants& hc = spec.constants();
  const double dt = base.driver.tgrid.dt();
  const double lfac = hc.diffusion_bound * hc.diffusion_bound *
                      (1.0 + 2.0 * hc.bdg_c1 * hc.bdg_c1);
  const path_norm_parts parts = path_norm_components(tr, base);

  bound_report r;
  r.lhs = 0.5 * parts.sup_h_sq + hc.coercivity * parts.int_v0_sq;
  const vec zero(tr.n_dof, 0.0);
  double source = 0.0;
  for (int s = 0; s < base.n_samples; ++s) {
    for (int j = 0; j < base.n_steps; ++j) {
      const double t = base.driver.tgrid.t(j);
      const control_slice us = base.control.at(s, j);
      const double a0 = tr.norm_v1(spec.drift(t, zero, us));
      const double s0 = spec.sigma_hs(t, zero, us);
      source += dt * (a0 * a0 / hc.coercivity + lfac * s0 * s0);
    }
  }
  source /= base.n_samples;
  const double gr = std::exp(2.0 * (hc.garding_shift + lfac) * base.driver.tgrid.horizon);
  const double h0 = tr.norm_h(base.x0);
  r.rhs = gr * (h0 * h0 + 2.0 * source);
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-9);
  return r;
}

/// Lipschitz control-to-state estimate under common random numbers; the
/// right side is linear in the time integral of ||u - u'||_U.
inline bound_report lipschitz_probe(const dynamics_spec& spec, const control_field& u,
                                    const control_field& u2, const vec& x0,
                                    const brownian_driver& driver,
                                    const solver_options& opts = {}) {
  const discrete_triple& tr = spec.space();
  const hypothesis_constants& hc = spec.constants();
  const state_path a = solve_forward(spec, u, x0, driver, opts);
  const state_path b = solve_forward(spec, u2, x0, driver, opts);
  const path_norm_parts parts = path_norm_components(tr, a, &b);

  bound_report r;
  r.lhs = 0.5 * parts.sup_h_sq + hc.coercivity * parts.int_v0_sq;

  const double dt = driver.tgrid.dt();
  double udiff = 0.0;
  for (int s = 0; s < driver.n_samples; ++s) {
    for (int j = 0; j < driver.tgrid.n_steps; ++j) {
      const control_slice ua = u.at(s, j);
      const control_slice ub = u2.at(s, j);
      double nn = 0.0;
      for (int i = 0; i < tr.n_dof; ++i) {
        const double d = ua.interior[i] - ub.interior[i];
        nn += tr.mass[i] * d * d;
      }
      for (std::size_t i = 0; i < ua.boundary.size(); ++i) {
        const double d = ua.boundary[i] - ub.boundary[i];
        nn += d * d;
      }
      udiff += dt * std::sqrt(nn);
    }
  }
  udiff /= driver.n_samples;

  const double lfac = hc.diffusion_bound * hc.diffusion_bound *
                      (1.0 + 2.0 * hc.bdg_c1 * hc.bdg_c1);
  const double gr = std::exp(2.0 * (hc.garding_shift + lfac) * driver.tgrid.horizon);
  r.rhs = gr * (hc.drift_bound * hc.drift_bound / hc.coercivity + 2.0 * lfac) * udiff;
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-9) + 1e-300;
  return r;
}

}  // namespace spdeopt
