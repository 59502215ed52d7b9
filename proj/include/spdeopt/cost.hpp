#pragma once

#include "paths.hpp"

namespace spdeopt {

/// Cost data (f, g, h) with partial derivatives in the discrete L2
/// representation. The optional pointwise integrands are what the
/// Hamiltonian candidate scans evaluate; additive state-only parts may be
/// omitted there since they cancel in control differences.
struct cost_spec {
  std::string name;

  std::function<double(double, const vec&, std::span<const double>)> f;
  std::function<vec(double, const vec&, std::span<const double>)> f_dx;
  std::function<vec(double, const vec&, std::span<const double>)> f_du;

  std::function<double(double, std::span<const double>)> g;                    // boundary running
  std::function<std::array<double, 2>(double, std::span<const double>)> g_du;

  std::function<double(const vec&)> h;
  std::function<vec(const vec&)> h_dx;

  std::function<double(double, double, double, double)> f_pointwise;  // (t, x, u, xi)
  std::function<double(double, double, int)> g_pointwise;             // (t, u, side)

  double growth_mf = 0.0, growth_mg = 0.0, growth_mh = 0.0, growth_c = 0.0;

  bool has_boundary() const { return static_cast<bool>(g); }
  bool has_pointwise() const { return static_cast<bool>(f_pointwise); }
};

using space_time_fn = std::function<double(double, double)>;  // (t, xi)

inline space_time_fn ref_zero() {
  return [](double, double) { return 0.0; };
}
inline space_time_fn ref_sin() {
  return [](double, double xi) { return std::sin(std::numbers::pi * xi); };
}
inline space_time_fn ref_sin_decay() {
  return [](double t, double xi) { return std::exp(-t) * std::sin(std::numbers::pi * xi); };
}

struct tracking_cost_params {
  double w_state = 1.0;
  double w_control = 1e-2;
  double w_boundary = 0.0;   // boundary-control penalty (porous-media problems)
  double w_terminal = 0.0;   // quadratic terminal weight
  double w_gradient = 0.0;   // gradient-seminorm running weight
  space_time_fn x_ref = ref_zero();
  space_time_fn terminal_ref = ref_zero();
  space_time_fn terminal_profile;  // set => linear terminal cost (profile, x_T)
};

/// Quadratic tracking family shared by the catalog entries:
///   f = w_s/2 ||x - r(t)||^2 + w_g/2 |x|_{H1}^2 + w_u/2 ||u||^2,
///   g = w_b/2 |u_bdry|^2,   h quadratic or linear in x_T.
inline cost_spec make_tracking_cost(const discrete_triple& tr, tracking_cost_params prm,
                                    std::string name) {
  if (prm.w_gradient != 0.0 && !tr.interior_only)
    throw config_error(name + ": gradient running cost needs the interior (Dirichlet) layout");

  const int n = tr.n_dof;
  vec mass = tr.mass;
  vec coords(n);
  for (int i = 0; i < n; ++i) coords[i] = tr.dof_coordinate(i);
  tridiag grad_op = tr.stiffness;  // w_g/2 |x|_{H1}^2 = w_g/2 (Kx, x)_M on this layout

  cost_spec c;
  c.name = std::move(name);
  const double ws = prm.w_state, wu = prm.w_control, wb = prm.w_boundary;
  const double wt = prm.w_terminal, wg = prm.w_gradient;
  const space_time_fn ref = prm.x_ref;
  const space_time_fn tref = prm.terminal_ref;

  c.f = [=](double t, const vec& x, std::span<const double> u) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = x[i] - ref(t, coords[i]);
      acc += 0.5 * ws * mass[i] * d * d + 0.5 * wu * mass[i] * u[i] * u[i];
    }
    if (wg != 0.0) {
      const vec kx = grad_op.apply(x);
      for (int i = 0; i < n; ++i) acc += 0.5 * wg * mass[i] * kx[i] * x[i];
    }
    return acc;
  };
  c.f_dx = [=](double t, const vec& x, std::span<const double>) {
    vec d(n);
    for (int i = 0; i < n; ++i) d[i] = ws * (x[i] - ref(t, coords[i]));
    if (wg != 0.0) axpy(wg, grad_op.apply(x), d);
    return d;
  };
  c.f_du = [=](double, const vec&, std::span<const double> u) {
    vec d(n);
    for (int i = 0; i < n; ++i) d[i] = wu * u[i];
    return d;
  };
  c.f_pointwise = [=](double t, double x, double u, double xi) {
    const double d = x - ref(t, xi);
    return 0.5 * ws * d * d + 0.5 * wu * u * u;  // gradient part cancels in u-scans
  };

  if (wb != 0.0) {
    c.g = [=](double, std::span<const double> ub) {
      return 0.5 * wb * (ub[0] * ub[0] + ub[1] * ub[1]);
    };
    c.g_du = [=](double, std::span<const double> ub) {
      return std::array<double, 2>{wb * ub[0], wb * ub[1]};
    };
    c.g_pointwise = [=](double, double u, int) { return 0.5 * wb * u * u; };
  }

  if (prm.terminal_profile) {
    const space_time_fn prof = prm.terminal_profile;
    vec w(n);
    for (int i = 0; i < n; ++i) w[i] = prof(0.0, coords[i]);
    c.h = [=](const vec& x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += mass[i] * w[i] * x[i];
      return acc;
    };
    c.h_dx = [=](const vec&) { return w; };
  } else {
    c.h = [=](const vec& x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = x[i] - tref(0.0, coords[i]);
        acc += 0.5 * wt * mass[i] * d * d;
      }
      return acc;
    };
    c.h_dx = [=](const vec& x) {
      vec d(n);
      for (int i = 0; i < n; ++i) d[i] = wt * (x[i] - tref(0.0, coords[i]));
      return d;
    };
  }

  // declared growth constants; catalog references are bounded by one
  const double lam_max_bound = 4.0 / (tr.grid.h() * tr.grid.h());
  c.growth_mf = ws + wu;
  c.growth_mg = wb;
  c.growth_mh = wt + 1.0;
  c.growth_c = ws + wu + wb + wt + wg * lam_max_bound;
  return c;
}

inline cost_spec make_lq_tracking(const discrete_triple& tr, tracking_cost_params prm) {
  prm.w_gradient = 0.0;
  return make_tracking_cost(tr, std::move(prm), "lq_tracking");
}

/// Boundary-control tracking with a linear terminal cost (profile, x_T).
inline cost_spec make_boundary_tracking(const discrete_triple& tr, tracking_cost_params prm) {
  if (!prm.terminal_profile) prm.terminal_profile = ref_sin();
  prm.w_gradient = 0.0;
  return make_tracking_cost(tr, std::move(prm), "boundary_tracking");
}

/// Tracking with a gradient-dependent running cost f(t, x, dx/dxi, u, xi).
inline cost_spec make_gradient_tracking(const discrete_triple& tr, tracking_cost_params prm) {
  if (prm.w_gradient == 0.0) prm.w_gradient = 1e-2;
  return make_tracking_cost(tr, std::move(prm), "gradient_tracking");
}

/// Monte Carlo cost of a solved ensemble with left-endpoint time quadrature;
/// deterministic given the path's seed.
inline double evaluate_cost(const cost_spec& cost, const state_path& base) {
  const double dt = base.driver.tgrid.dt();
  double acc = 0.0;
  for (int s = 0; s < base.n_samples; ++s) {
    double js = 0.0;
    for (int j = 0; j < base.n_steps; ++j) {
      const double t = base.driver.tgrid.t(j);
      const control_slice u = base.control.at(s, j);
      js += dt * cost.f(t, base.x_vec(s, j), u.interior);
      if (cost.has_boundary()) js += dt * cost.g(t, u.boundary);
    }
    js += cost.h(base.x_vec(s, base.n_steps));
    acc += js;
  }
  acc /= base.n_samples;
  if (!std::isfinite(acc)) throw solver_error("evaluate_cost: non-finite cost value");
  return acc;
}

struct cost_growth_report {
  bool pass = true;
  double worst_ratio = 0.0;  // observed / allowed
};

/// Sampled certificate for the declared derivative growth bounds.
inline cost_growth_report validate_cost_growth(const cost_spec& c, const discrete_triple& tr,
                                               const probe_sampling& sampling = {}) {
  detail::probe_gen gen(sampling);
  const int n = tr.n_dof;
  cost_growth_report rep;
  for (int it = 0; it < sampling.count; ++it) {
    const double t = 0.5;
    const vec x = gen.vector(n);
    const vec u = gen.vector(n);
    std::array<double, 2> ub{gen.scalar(), gen.scalar()};
    double unorm = 0.0;
    for (int i = 0; i < n; ++i) unorm += tr.mass[i] * u[i] * u[i];
    unorm = std::sqrt(unorm + ub[0] * ub[0] + ub[1] * ub[1]);
    const double xnorm = tr.norm_l2(x);

    const double dxn = tr.norm_l2(c.f_dx(t, x, u));
    const double dun = tr.norm_l2(c.f_du(t, x, u));
    const double allowed_f = c.growth_mf + c.growth_c * (xnorm + unorm);
    rep.worst_ratio = std::max(rep.worst_ratio, (dxn + dun) / std::max(allowed_f, 1e-300));

    if (c.has_boundary()) {
      const auto gd = c.g_du(t, ub);
      const double gn = std::sqrt(gd[0] * gd[0] + gd[1] * gd[1]);
      const double allowed_g = c.growth_mg + c.growth_c * unorm;
      rep.worst_ratio = std::max(rep.worst_ratio, gn / std::max(allowed_g, 1e-300));
    }
    const double hn = tr.norm_l2(c.h_dx(x));
    const double allowed_h = c.growth_mh + c.growth_c * xnorm;
    rep.worst_ratio = std::max(rep.worst_ratio, hn / std::max(allowed_h, 1e-300));
  }
  rep.pass = rep.worst_ratio <= 1.0 + 1e-9;
  return rep;
}

}  // namespace spdeopt
