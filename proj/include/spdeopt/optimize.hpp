#pragma once

#include "adjoint.hpp"

namespace spdeopt {

/// Reduced-cost gradient per control channel, assembled from the pathwise
/// adjoint:  grad = df/du - (dA/du)* p - (dsigma/du)* q.
/// This is the exact gradient of the discrete Monte Carlo cost under common
/// random numbers; deterministic controls get the sample average.
inline control_field gradient(const cost_spec& cost, const dynamics_spec& spec,
                              const state_path& base, const adjoint_path& adj) {
  require(adj.n_samples == base.n_samples && adj.n_steps == base.n_steps &&
              adj.n_dof == base.n_dof,
          "gradient: adjoint does not match the base path");
  const discrete_triple& tr = spec.space();
  const noise_model& nm = spec.noise();
  const double dt = base.driver.tgrid.dt();
  (void)dt;
  const control_field& u = base.control;
  control_field g = control_field::zeros(u.n_samples, u.n_steps, u.n_interior, u.n_boundary);
  (void)tr;

  const double weight = u.deterministic() ? 1.0 / base.n_samples : 1.0;
  for (int s = 0; s < base.n_samples; ++s) {
    const int gs = u.deterministic() ? 0 : s;
    for (int j = 0; j < base.n_steps; ++j) {
      const double t = base.driver.tgrid.t(j);
      const control_slice us = u.at(s, j);
      const vec pj = adj.p_vec(s, j);
      const control_dual da = spec.drift_du_adjoint(t, base.x_vec(s, j + 1), pj);
      const vec fu = cost.f_du(t, base.x_vec(s, j), us.interior);
      double* gi = g.interior_row(gs, j);
      for (int i = 0; i < u.n_interior; ++i) gi[i] += weight * (fu[i] - da.interior[i]);
      if (u.n_boundary > 0) {
        std::array<double, 2> gb{0.0, 0.0};
        if (cost.has_boundary()) gb = cost.g_du(t, us.boundary);
        std::array<double, 2> sq{0.0, 0.0};
        if (nm.boundary_channel && nm.gamma != 0.0)
          sq = spec.sigma_du_adjoint(adj.q_vec(s, j, nm.n_modes));
        double* gbrow = g.boundary_row(gs, j);
        gbrow[0] += weight * (gb[0] - da.boundary[0] - sq[0]);
        gbrow[1] += weight * (gb[1] - da.boundary[1] - sq[1]);
      }
    }
  }
  return g;
}

struct stationarity_report {
  control_field residual;  // |u - clamp(u - grad)| per lattice point
  double max_abs = 0.0;
  double rms = 0.0;
};

/// Clamped-gradient residual of the box first-order condition, pointwise
/// and aggregated (plain quadratic mean over the lattice).
inline stationarity_report stationarity_residual(const control_field& u, const control_field& g,
                                                 const admissible_box& box) {
  require(u.same_shape(g), "stationarity_residual: shape mismatch");
  stationarity_report rep;
  rep.residual = control_field::zeros(u.n_samples, u.n_steps, u.n_interior, u.n_boundary);
  double sq = 0.0;
  std::size_t count = 0;
  auto accumulate = [&](const vec& uv, const vec& gv, vec& rv, double lo, double hi) {
    for (std::size_t i = 0; i < uv.size(); ++i) {
      const double stepped = std::min(std::max(uv[i] - gv[i], lo), hi);
      const double r = std::abs(uv[i] - stepped);
      rv[i] = r;
      rep.max_abs = std::max(rep.max_abs, r);
      sq += r * r;
      ++count;
    }
  };
  accumulate(u.interior, g.interior, rep.residual.interior, box.interior_lo, box.interior_hi);
  accumulate(u.boundary, g.boundary, rep.residual.boundary, box.boundary_lo, box.boundary_hi);
  rep.rms = count ? std::sqrt(sq / count) : 0.0;
  return rep;
}

/// H(t, x, u, p) = <A(t,x,u), p> - f(t,x,u) - g(t,u_bdry), affine in p.
inline double hamiltonian(const dynamics_spec& spec, const cost_spec& cost, double t,
                          const vec& x, const control_slice& u, const vec& p) {
  double h = spec.space().inner_l2(spec.drift(t, x, u), p) - cost.f(t, x, u.interior);
  if (cost.has_boundary()) h -= cost.g(t, u.boundary);
  return h;
}

// ---------------------------------------------------------------------------
// Projected gradient with Armijo backtracking on the CRN-frozen cost
// ---------------------------------------------------------------------------

struct optimize_options {
  int max_iters = 200;
  double tol = 1e-6;        // max-norm clamped-gradient residual
  double armijo_c = 1e-4;
  double step0 = 1.0;
  int max_backtracks = 40;
  solver_options solve;
};

struct history_row {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double stationarity = 0.0;
  double step = 0.0;
};

struct optimize_result {
  control_field u;
  std::vector<history_row> history;
  bool converged = false;
  int iters = 0;
  double final_cost = 0.0;
  double final_stationarity = 0.0;
};

inline optimize_result optimize(const dynamics_spec& spec, const cost_spec& cost,
                                const admissible_box& box, const vec& x0,
                                const control_field& u_init, const brownian_driver& driver,
                                const optimize_options& opts = {}) {
  const discrete_triple& tr = spec.space();
  control_field u = project(u_init, box);
  double step = opts.step0;

  optimize_result out;
  state_path path = solve_forward(spec, u, x0, driver, opts.solve);
  double cur = evaluate_cost(cost, path);

  for (int it = 0; it <= opts.max_iters; ++it) {
    const adjoint_path adj = solve_adjoint_pathwise(spec, path, cost);
    const control_field g = gradient(cost, spec, path, adj);
    const stationarity_report st = stationarity_residual(u, g, box);
    const double gnorm = control_norm(g, driver.tgrid, tr.mass);

    history_row row;
    row.iter = it;
    row.cost = cur;
    row.grad_norm = gnorm;
    row.stationarity = st.max_abs;
    row.step = step;
    out.history.push_back(row);

    if (st.max_abs <= opts.tol || it == opts.max_iters) {
      out.converged = st.max_abs <= opts.tol;
      out.iters = it;
      break;
    }

    bool accepted = false;
    double s = step;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      control_field trial = project(axpy_field(-s, g, u), box);
      state_path trial_path = solve_forward(spec, trial, x0, driver, opts.solve);
      const double jt = evaluate_cost(cost, trial_path);
      control_field diff = trial;
      axpy(-1.0, u.interior, diff.interior);
      if (u.n_boundary > 0) axpy(-1.0, u.boundary, diff.boundary);
      const double move_sq = control_inner(diff, diff, driver.tgrid, tr.mass);
      if (jt <= cur - (opts.armijo_c / s) * move_sq) {
        u = std::move(trial);
        path = std::move(trial_path);
        cur = jt;
        step = 2.0 * s;  // gentle expansion for the next iterate
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted)
      throw solver_error("optimize: Armijo line search failed after " +
                         std::to_string(opts.max_backtracks) + " halvings at iterate " +
                         std::to_string(it) + " (cost " + std::to_string(cur) + ")");
  }

  out.u = std::move(u);
  out.final_cost = out.history.back().cost;
  out.final_stationarity = out.history.back().stationarity;
  return out;
}

// ---------------------------------------------------------------------------
// Hamiltonian candidate-grid scan
// ---------------------------------------------------------------------------

struct pontryagin_options {
  int candidates = 33;               // equispaced points on a bounded interval
  std::vector<double> offsets{1, 2, 4, 8};  // relative probes for unbounded boxes
  int max_time_samples = 0;          // 0 = all steps
  double tol = 1e-4;
};

struct pontryagin_report {
  double max_violation = -k_inf;
  double mean_violation = 0.0;
  double mc_se = 0.0;   // standard error across sample paths of per-path maxima
  int evaluated = 0;
  bool pass = false;
};

namespace detail {

inline std::vector<double> candidate_values(double lo, double hi, double center,
                                            const pontryagin_options& opt) {
  std::vector<double> c;
  if (std::isfinite(lo) && std::isfinite(hi)) {
    for (int i = 0; i < opt.candidates; ++i)
      c.push_back(lo + (hi - lo) * i / (opt.candidates - 1.0));
  } else {
    c.push_back(center);
    for (double d : opt.offsets) {
      if (center + d <= hi) c.push_back(center + d);
      if (center - d >= lo) c.push_back(center - d);
    }
  }
  return c;
}

}  // namespace detail

/// Pointwise Hamiltonian maximality scan at the current pair, using the
/// adapted (regression) adjoint. For every sampled (path, step, node) the
/// candidate grid probes   p u - f(t, x, u, xi)   over the box; positive
/// violations mean a candidate beats the current control. Requires
/// control-independent diffusion and pointwise cost integrands.
inline pontryagin_report pontryagin_check(const dynamics_spec& spec, const cost_spec& cost,
                                          const state_path& base, const adjoint_path& adj,
                                          const admissible_box& box,
                                          const pontryagin_options& opt = {}) {
  if (!spec.control_independent_sigma())
    throw capability_error("pontryagin_check: the diffusion depends on the control ((A~) fails)");
  if (!cost.has_pointwise())
    throw capability_error("pontryagin_check: cost lacks pointwise integrands");
  require(adj.method == adjoint_method::regression,
          "pontryagin_check: needs the adapted (regression) adjoint");

  const discrete_triple& tr = spec.space();
  const double dt = base.driver.tgrid.dt();
  (void)dt;
  const int stride = (opt.max_time_samples > 0 && base.n_steps > opt.max_time_samples)
                         ? base.n_steps / opt.max_time_samples
                         : 1;

  pontryagin_report rep;
  double acc = 0.0, accsq = 0.0;
  for (int s = 0; s < base.n_samples; ++s) {
    double sample_max = -k_inf;
    for (int j = 0; j < base.n_steps; j += stride) {
      const double t = base.driver.tgrid.t(j);
      const control_slice us = base.control.at(s, j);
      const vec pj = adj.p_vec(s, j);
      const control_dual da = spec.drift_du_adjoint(t, base.x_vec(s, j + 1), pj);
      const auto xj = base.x(s, j);
      for (int i = 0; i < tr.n_dof; ++i) {
        const double xi = tr.dof_coordinate(i);
        const double ubar = us.interior[i];
        // the interior channel pairs with p through the plain L2 weight
        const double coef = da.interior[i];
        const double here = coef * ubar - cost.f_pointwise(t, xj[i], ubar, xi);
        for (double cand :
             detail::candidate_values(box.interior_lo, box.interior_hi, ubar, opt)) {
          const double v = coef * cand - cost.f_pointwise(t, xj[i], cand, xi) - here;
          sample_max = std::max(sample_max, v);
          ++rep.evaluated;
        }
      }
      if (spec.has_boundary_control() && cost.g_pointwise) {
        for (int side = 0; side < 2; ++side) {
          const double ubar = us.boundary[side];
          const double coef = da.boundary[side];
          const double here = coef * ubar - cost.g_pointwise(t, ubar, side);
          for (double cand :
               detail::candidate_values(box.boundary_lo, box.boundary_hi, ubar, opt)) {
            const double v = coef * cand - cost.g_pointwise(t, cand, side) - here;
            sample_max = std::max(sample_max, v);
            ++rep.evaluated;
          }
        }
      }
    }
    rep.max_violation = std::max(rep.max_violation, sample_max);
    acc += sample_max;
    accsq += sample_max * sample_max;
  }
  rep.mean_violation = acc / base.n_samples;
  rep.mc_se = base.n_samples > 1
                  ? std::sqrt(std::max(accsq / base.n_samples - rep.mean_violation * rep.mean_violation, 0.0) /
                              (base.n_samples - 1))
                  : 0.0;
  rep.pass = rep.max_violation <= opt.tol + 3.0 * rep.mc_se;
  return rep;
}

}  // namespace spdeopt
