#pragma once

#include <chrono>

#include "config.hpp"

namespace spdeopt {

inline constexpr int k_report_schema_version = 1;

/// One measured quantity with its admissible interval. Inequalities use a
/// one-sided interval; identities use a two-sided one. The thresholds are
/// stored in the report so they cannot drift silently.
struct experiment_entry {
  std::string id;
  double value = 0.0;
  double lo = -k_inf;
  double hi = k_inf;
  bool pass = false;
  std::string note;
};

struct experiment_report {
  std::string suite;
  std::uint64_t config_hash = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<experiment_entry> entries;
  double runtime_seconds = 0.0;  // informational; excluded from hashed artifacts

  bool all_pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }
  const experiment_entry* find(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return &e;
    return nullptr;
  }
};

namespace detail {

inline void push_entry(experiment_report& r, std::string id, double value, double lo, double hi,
                       std::string note = "") {
  experiment_entry e;
  e.id = std::move(id);
  e.value = value;
  e.lo = lo;
  e.hi = hi;
  e.pass = std::isfinite(value) && value >= lo && value <= hi;
  e.note = std::move(note);
  r.entries.push_back(std::move(e));
}

/// Deterministic smooth probe direction for sweeps: nonzero interior and
/// boundary rows, mildly time dependent.
inline control_field probe_direction(const problem& p, int variant) {
  const discrete_triple& tr = p.spec->space();
  control_field v = zero_control(p);
  for (int j = 0; j < v.n_steps; ++j) {
    const double t = p.tgrid.t(j);
    double* row = v.interior_row(0, j);
    for (int i = 0; i < v.n_interior; ++i) {
      const double xi = tr.dof_coordinate(i);
      row[i] = std::sin((1.0 + variant) * std::numbers::pi * xi) * (1.0 + 0.5 * std::cos(3.0 * t + variant));
    }
    if (v.n_boundary > 0) {
      double* b = v.boundary_row(0, j);
      b[0] = 0.4 * std::cos(2.0 * t + variant);
      b[1] = 0.3 * std::sin(1.5 * t + 0.7 * variant);
    }
  }
  return v;
}

inline control_field base_control(const problem& p) {
  const discrete_triple& tr = p.spec->space();
  control_field u = zero_control(p);
  for (int j = 0; j < u.n_steps; ++j) {
    double* row = u.interior_row(0, j);
    for (int i = 0; i < u.n_interior; ++i)
      row[i] = 0.5 * std::sin(2.0 * std::numbers::pi * tr.dof_coordinate(i)) + 0.2;
    if (u.n_boundary > 0) {
      u.boundary_row(0, j)[0] = 0.3;
      u.boundary_row(0, j)[1] = 0.1;
    }
  }
  return project(std::move(u), p.box);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convergence suite: differentiability orders, spike asymptotics, scheme
// refinement, and the well-posedness inequalities.
// ---------------------------------------------------------------------------

inline experiment_report run_convergence_suite(const problem& p) {
  const auto t_start = std::chrono::steady_clock::now();
  experiment_report rep;
  rep.suite = "convergence";
  rep.config_hash = p.cfg.hash;
  rep.seeds = {p.cfg.seed};

  const discrete_triple& tr = p.spec->space();
  const brownian_driver driver = make_driver(p);
  const control_field u = detail::base_control(p);
  const control_field v = detail::probe_direction(p, 1);
  const state_path base = solve_forward(*p.spec, u, p.x0, driver, p.solve);

  // directional differentiability: remainder x^{u+eps v} - x^u - eps z
  {
    const linearized_path z = solve_linearized(*p.spec, base, v, driver);
    const vec eps = {1e-1, 3.16e-2, 1e-2, 3.16e-3, 1e-3};
    vec rem(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const state_path xe =
          solve_forward(*p.spec, axpy_field(eps[k], v, u), p.x0, driver, p.solve);
      state_path r = xe;
      for (std::size_t i = 0; i < r.data.size(); ++i)
        r.data[i] -= base.data[i] + eps[k] * z.data[i];
      rem[k] = path_x_norm(tr, r);
    }
    if (rem.front() <= 1e-11 * std::max(1.0, path_x_norm(tr, base))) {
      detail::push_entry(rep, "gateaux_remainder_slope", 2.0, 1.9, k_inf,
                         "remainder at machine precision (affine dynamics)");
    } else {
      detail::push_entry(rep, "gateaux_remainder_slope", log_log_slope(eps, rem), 1.9, k_inf);
    }
  }

  // spike asymptotics and the weak remainder battery
  if (p.spec->control_independent_sigma() && p.tgrid.n_steps >= 32) {
    const double dt = p.tgrid.dt();
    const vec eps = {16 * dt, 8 * dt, 4 * dt, 2 * dt};
    const double t0 = 0.0;
    vec diff_norm(eps.size()), z_norm(eps.size()), weak(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const control_field ue = spike_control(u, v, t0, eps[k], p.tgrid);
      const state_path xe = solve_forward(*p.spec, ue, p.x0, driver, p.solve);
      const linearized_path ze = solve_spike_linearized(*p.spec, base, v, t0, eps[k], driver);
      diff_norm[k] = path_x_norm(tr, xe, &base);
      z_norm[k] = path_x_norm(tr, ze);
      // weak remainder against a battery of smooth deterministic processes
      double wmax = 0.0;
      for (int m = 1; m <= 10; ++m) {
        double acc = 0.0;
        vec phi(tr.n_dof);
        for (int s = 0; s < xe.n_samples; ++s) {
          for (int j = 0; j <= xe.n_steps; ++j) {
            const double t = p.tgrid.t(std::min(j, p.tgrid.n_steps));
            for (int i = 0; i < tr.n_dof; ++i)
              phi[i] = std::sin(m * std::numbers::pi * tr.dof_coordinate(i)) *
                       std::cos(0.5 * m * t);
            vec w(tr.n_dof);
            for (int i = 0; i < tr.n_dof; ++i)
              w[i] = (xe.x(s, j)[i] - base.x(s, j)[i] - ze.x(s, j)[i]) / eps[k];
            if (j < xe.n_steps) acc += dt * tr.inner_h(w, phi);
          }
        }
        wmax = std::max(wmax, std::abs(acc / xe.n_samples));
      }
      weak[k] = wmax;
    }
    detail::push_entry(rep, "spike_state_slope", log_log_slope(eps, diff_norm), 0.9, 1.1);
    detail::push_entry(rep, "spike_linearized_slope", log_log_slope(eps, z_norm), 0.9, 1.1);
    double worst_ratio = 0.0;
    for (std::size_t k = 0; k + 1 < eps.size(); ++k)
      worst_ratio = std::max(worst_ratio, weak[k + 1] / std::max(weak[k], 1e-300));
    detail::push_entry(rep, "spike_weak_remainder_decreasing", worst_ratio, 0.0, 1.0,
                       "ratio of successive weak remainders over the eps sweep (eps decreasing)");
  }

  // refinement of the linear-diffusion oracle: first eigenmode decay
  {
    const double T = 0.1;
    auto heat_error = [&](int n_cells, int n_steps, bool against_continuum) {
      const space_grid_1d g(n_cells);
      const discrete_triple t3 =
          build_triple(g, boundary_condition::dirichlet(), triple_kind::hminus1_pivot);
      const noise_model nm = make_noise_model(t3, 0, mu_zero());
      const auto spec = make_porous_media(t3, sf_identity(), nm, p.cfg.c1);
      brownian_driver d;
      d.seed = 1;
      d.n_samples = 1;
      d.tgrid = time_grid(T, n_steps);
      vec x0(t3.n_dof);
      for (int i = 0; i < t3.n_dof; ++i)
        x0[i] = std::sin(std::numbers::pi * t3.dof_coordinate(i));
      const control_field uz =
          control_field::zeros(1, n_steps, t3.n_dof, 2);
      const state_path path = solve_forward(*spec, uz, x0, d, p.solve);
      const double h = g.h();
      const double lam_disc = 2.0 * (1.0 - std::cos(std::numbers::pi * h)) / (h * h);
      const double lam = against_continuum ? std::numbers::pi * std::numbers::pi : lam_disc;
      vec err(t3.n_dof);
      for (int i = 0; i < t3.n_dof; ++i)
        err[i] = path.x(0, n_steps)[i] - std::exp(-lam * T) * x0[i];
      return t3.norm_l2(err);
    };
    vec dts, derr;
    for (int n : {8, 16, 32, 64}) {
      dts.push_back(T / n);
      derr.push_back(heat_error(64, n, /*against_continuum=*/false));
    }
    detail::push_entry(rep, "heat_dt_slope", log_log_slope(dts, derr), 0.9, k_inf);
    vec hs, herr;
    for (int n : {4, 8, 16, 32}) {
      hs.push_back(1.0 / n);
      herr.push_back(heat_error(n, 4096, /*against_continuum=*/true));
    }
    detail::push_entry(rep, "heat_h_slope", log_log_slope(hs, herr), 1.9, k_inf);
  }

  // one-sided well-posedness inequalities
  {
    const bound_report eb = energy_bound_check(*p.spec, base);
    detail::push_entry(rep, "energy_bound_lhs_over_rhs", eb.lhs / std::max(eb.rhs, 1e-300), 0.0,
                       1.0 + 1e-9);
    const control_field u2 = axpy_field(0.5, detail::probe_direction(p, 2), u);
    const bound_report lp =
        lipschitz_probe(*p.spec, u, project(u2, p.box), p.x0, driver, p.solve);
    detail::push_entry(rep, "lipschitz_lhs_over_rhs", lp.lhs / std::max(lp.rhs, 1e-300), 0.0,
                       1.0 + 1e-9);
  }

  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Optimality suite: duality residuals, gradient agreement, stationarity at
// the optimizer exit, Hamiltonian scan when available.
// ---------------------------------------------------------------------------

inline experiment_report run_optimality_suite(const problem& p) {
  const auto t_start = std::chrono::steady_clock::now();
  experiment_report rep;
  rep.suite = "optimality";
  rep.config_hash = p.cfg.hash;
  rep.seeds = {p.cfg.seed};

  const discrete_triple& tr = p.spec->space();
  const brownian_driver driver = make_driver(p);
  const control_field u = detail::base_control(p);
  const state_path base = solve_forward(*p.spec, u, p.x0, driver, p.solve);

  // duality residuals for both adjoints
  {
    const control_field v = detail::probe_direction(p, 3);
    const linearized_path z = solve_linearized(*p.spec, base, v, driver);
    const adjoint_path ap = solve_adjoint_pathwise(*p.spec, base, p.cost);
    const duality_report dw = check_duality(*p.spec, base, ap, z, v, p.cost);
    detail::push_entry(rep, "duality_pathwise_rel_residual", dw.rel_residual, 0.0, 1e-10);

    regression_basis basis = p.basis;
    const adjoint_path ar = solve_adjoint_regression(*p.spec, base, p.cost, basis);
    const duality_report dr = check_duality(*p.spec, base, ar, z, v, p.cost);
    const double band = 3.0 * dr.mc_se + 1e-3 * std::max(dr.scale, 1e-12);
    detail::push_entry(rep, "duality_regression_abs_residual", dr.abs_residual, 0.0, band,
                       "band = 3 SE + regression-bias allowance");
  }

  // adjoint gradient vs central differences of the frozen-seed cost
  {
    const adjoint_path ap = solve_adjoint_pathwise(*p.spec, base, p.cost);
    const control_field g = gradient(p.cost, *p.spec, base, ap);
    std::mt19937_64 eng(p.cfg.seed ^ 0x5bd1e995u);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    const double eps = 1e-5;
    for (int dir = 0; dir < 10; ++dir) {
      control_field v = zero_control(p);
      for (double& x : v.interior) x = nd(eng);
      for (double& x : v.boundary) x = nd(eng);
      const double gv = control_inner(g, v, p.tgrid, tr.mass);
      const double jp = evaluate_cost(
          p.cost, solve_forward(*p.spec, axpy_field(eps, v, u), p.x0, driver, p.solve));
      const double jm = evaluate_cost(
          p.cost, solve_forward(*p.spec, axpy_field(-eps, v, u), p.x0, driver, p.solve));
      const double fd = (jp - jm) / (2.0 * eps);
      worst = std::max(worst, std::abs(gv - fd) / std::max(std::abs(fd), 1e-12));
    }
    detail::push_entry(rep, "fd_gradient_rel_error", worst, 0.0, 1e-6);
  }

  // projected-gradient run from zero
  {
    const optimize_result res =
        optimize(*p.spec, p.cost, p.box, p.x0, zero_control(p), driver, p.opt);
    detail::push_entry(rep, "optimizer_stationarity", res.final_stationarity, 0.0, p.opt.tol,
                       res.converged ? "converged" : "budget exhausted");
    double worst_increase = 0.0;
    for (std::size_t i = 1; i < res.history.size(); ++i)
      worst_increase = std::max(worst_increase, res.history[i].cost - res.history[i - 1].cost);
    detail::push_entry(rep, "descent_monotone", worst_increase, -k_inf, 1e-12);

    if (p.spec->control_independent_sigma() && p.cost.has_pointwise()) {
      const state_path opt_path = solve_forward(*p.spec, res.u, p.x0, driver, p.solve);
      const adjoint_path ar = solve_adjoint_regression(*p.spec, opt_path, p.cost, p.basis);
      pontryagin_options popt;
      const pontryagin_report pr =
          pontryagin_check(*p.spec, p.cost, opt_path, ar, p.box, popt);
      const bool enforce = p.spec->noise().n_modes == 0 ||
                           [&] {
                             for (double m : p.spec->noise().mu)
                               if (m != 0.0) return false;
                             return true;
                           }();
      if (enforce) {
        detail::push_entry(rep, "pontryagin_max_violation", pr.max_violation, -k_inf,
                           popt.tol + 3.0 * pr.mc_se);
      } else {
        detail::push_entry(rep, "pontryagin_max_violation", pr.max_violation, -k_inf, k_inf,
                           "report only: per-path maximality is a deterministic-instance "
                           "criterion; open-loop optimum satisfies it in the mean");
      }
    }
  }

  // frozen-seed optimality gap across seeds, reported
  {
    vec costs;
    for (std::uint64_t s = 0; s < 5; ++s) {
      brownian_driver d = driver;
      d.seed = p.cfg.seed + s;
      const state_path b2 = solve_forward(*p.spec, u, p.x0, d, p.solve);
      costs.push_back(evaluate_cost(p.cost, b2));
    }
    double lo = costs[0], hi = costs[0];
    for (double c : costs) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    detail::push_entry(rep, "seed_sensitivity_cost_spread", hi - lo, 0.0, k_inf,
                       "spread of the frozen-seed cost across 5 seeds (informational)");
  }

  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline std::string report_to_csv(const experiment_report& r) {
  std::string out = "suite,quantity,value,lo,hi,pass\n";
  for (const auto& e : r.entries) {
    out += r.suite + ',' + e.id + ',' + format_double(e.value) + ',' + format_double(e.lo) +
           ',' + format_double(e.hi) + ',' + (e.pass ? "1" : "0") + '\n';
  }
  return out;
}

inline json report_to_json(const experiment_report& r) {
  json j;
  j["schema_version"] = k_report_schema_version;
  j["suite"] = r.suite;
  j["config_hash"] = hex16(r.config_hash);
  j["seeds"] = r.seeds;
  j["runtime_seconds"] = r.runtime_seconds;  // excluded from hashed artifacts
  j["entries"] = json::array();
  auto bound = [](double v) {
    return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf");
  };
  for (const auto& e : r.entries) {
    json je;
    je["id"] = e.id;
    je["value"] = e.value;
    je["lo"] = bound(e.lo);
    je["hi"] = bound(e.hi);
    je["pass"] = e.pass;
    if (!e.note.empty()) je["note"] = e.note;
    j["entries"].push_back(je);
  }
  return j;
}

}  // namespace spdeopt
