#pragma once

#include <set>

#include <json.hpp>

#include "io.hpp"

namespace spdeopt {

using json = nlohmann::json;

/// Declarative problem description. Parsing is strict: unknown fields are
/// rejected so config typos cannot silently change a run.
struct problem_config {
  // dynamics
  std::string family = "porous_media";  // porous_media | burgers | divergence
  std::string bc = "dirichlet";         // dirichlet | neumann | robin
  std::string nonlinearity = "smooth_monotone";
  double slope = 1.0;                   // affine
  double slope_lo = 1.0, slope_hi = 2.0;
  double arctan_lambda = 1.0;
  double declared_slope_lo = 0.0;       // arctan: declared lower derivative bound
  std::array<double, 2> robin_alpha{1.0, 1.0};
  double robin_beta = 1.0;
  double robin_gamma = 0.0;

  // noise
  int n_modes = 16;
  std::string mu_kind = "power";  // power | zero
  double mu_scale = 0.1;
  double mu_rate = 2.0;
  int dimension = 1;              // d stays a parameter of the summability proxy

  // cost
  std::string cost_kind = "lq_tracking";  // lq_tracking | boundary_tracking | gradient_tracking
  double w_state = 1.0, w_control = 1e-2, w_boundary = 0.0, w_terminal = 0.0, w_gradient = 0.0;
  std::string x_ref = "sin_decay";          // zero | sin | sin_decay
  std::string terminal_profile = "";        // "" | sin | ones

  // box
  double box_interior_lo = -k_inf, box_interior_hi = k_inf;
  double box_boundary_lo = -k_inf, box_boundary_hi = k_inf;

  // grids
  int n_cells = 64;
  int n_steps = 128;
  double horizon = 0.25;

  // ensemble
  int n_samples = 256;
  std::uint64_t seed = 12345;

  // initial state
  std::string x0_kind = "eigen";  // zero | eigen | bump | sin
  int x0_index = 1;
  double x0_scale = 1.0;

  // tolerances
  double newton_tol = 1e-12;
  int max_newton_iter = 30;
  double c1 = 2.0;
  double ridge = 1e-8;

  // optimize
  int opt_max_iters = 300;
  double opt_tol = 1e-6;
  bool pontryagin = false;

  json raw;
  std::uint64_t hash = 0;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& where,
                           const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw config_error("config section '" + where + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw config_error("unknown field '" + it.key() + "' in config section '" + where + "'");
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

inline void parse_bounds(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  const json& b = j.at(key);
  if (!b.is_array() || b.size() != 2)
    throw config_error(std::string("config: '") + key + "' must be null or [lo, hi]");
  lo = b[0].is_null() ? -k_inf : b[0].get<double>();
  hi = b[1].is_null() ? k_inf : b[1].get<double>();
  if (lo > hi) throw config_error(std::string("config: '") + key + "' has lo > hi");
}

}  // namespace detail

inline std::uint64_t config_hash(const json& j) { return fnv1a64(j.dump()); }

inline problem_config parse_config(const json& j) {
  detail::reject_unknown(j, "<root>",
                         {"dynamics", "noise", "cost", "box", "grids", "ensemble",
                          "initial_state", "tolerances", "optimize"});
  problem_config c;
  c.raw = j;
  c.hash = config_hash(j);

  if (j.contains("dynamics")) {
    const json& d = j.at("dynamics");
    detail::reject_unknown(d, "dynamics", {"family", "bc", "nonlinearity", "robin"});
    c.family = detail::get_or<std::string>(d, "family", c.family);
    c.bc = detail::get_or<std::string>(d, "bc", c.bc);
    if (d.contains("nonlinearity")) {
      const json& f = d.at("nonlinearity");
      detail::reject_unknown(f, "dynamics.nonlinearity",
                             {"kind", "slope", "slope_lo", "slope_hi", "lambda",
                              "declared_slope_lo"});
      c.nonlinearity = detail::get_or<std::string>(f, "kind", c.nonlinearity);
      c.slope = detail::get_or<double>(f, "slope", c.slope);
      c.slope_lo = detail::get_or<double>(f, "slope_lo", c.slope_lo);
      c.slope_hi = detail::get_or<double>(f, "slope_hi", c.slope_hi);
      c.arctan_lambda = detail::get_or<double>(f, "lambda", c.arctan_lambda);
      c.declared_slope_lo = detail::get_or<double>(f, "declared_slope_lo", c.declared_slope_lo);
    }
    if (d.contains("robin")) {
      const json& r = d.at("robin");
      detail::reject_unknown(r, "dynamics.robin", {"alpha", "beta", "gamma"});
      if (r.contains("alpha")) {
        const json& a = r.at("alpha");
        if (!a.is_array() || a.size() != 2)
          throw config_error("dynamics.robin.alpha must be [a0, a1]");
        c.robin_alpha = {a[0].get<double>(), a[1].get<double>()};
      }
      c.robin_beta = detail::get_or<double>(r, "beta", c.robin_beta);
      c.robin_gamma = detail::get_or<double>(r, "gamma", c.robin_gamma);
    }
  }

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    detail::reject_unknown(n, "noise", {"n_modes", "mu", "dimension"});
    c.n_modes = detail::get_or<int>(n, "n_modes", c.n_modes);
    c.dimension = detail::get_or<int>(n, "dimension", c.dimension);
    if (n.contains("mu")) {
      const json& m = n.at("mu");
      detail::reject_unknown(m, "noise.mu", {"kind", "scale", "rate"});
      c.mu_kind = detail::get_or<std::string>(m, "kind", c.mu_kind);
      c.mu_scale = detail::get_or<double>(m, "scale", c.mu_scale);
      c.mu_rate = detail::get_or<double>(m, "rate", c.mu_rate);
    }
  }

  if (j.contains("cost")) {
    const json& k = j.at("cost");
    detail::reject_unknown(k, "cost",
                           {"kind", "w_state", "w_control", "w_boundary", "w_terminal",
                            "w_gradient", "x_ref", "terminal_profile"});
    c.cost_kind = detail::get_or<std::string>(k, "kind", c.cost_kind);
    c.w_state = detail::get_or<double>(k, "w_state", c.w_state);
    c.w_control = detail::get_or<double>(k, "w_control", c.w_control);
    c.w_boundary = detail::get_or<double>(k, "w_boundary", c.w_boundary);
    c.w_terminal = detail::get_or<double>(k, "w_terminal", c.w_terminal);
    c.w_gradient = detail::get_or<double>(k, "w_gradient", c.w_gradient);
    c.x_ref = detail::get_or<std::string>(k, "x_ref", c.x_ref);
    c.terminal_profile = detail::get_or<std::string>(k, "terminal_profile", c.terminal_profile);
  }

  if (j.contains("box")) {
    const json& b = j.at("box");
    detail::reject_unknown(b, "box", {"interior", "boundary"});
    detail::parse_bounds(b, "interior", c.box_interior_lo, c.box_interior_hi);
    detail::parse_bounds(b, "boundary", c.box_boundary_lo, c.box_boundary_hi);
  }

  if (j.contains("grids")) {
    const json& g = j.at("grids");
    detail::reject_unknown(g, "grids", {"n_cells", "n_steps", "horizon"});
    c.n_cells = detail::get_or<int>(g, "n_cells", c.n_cells);
    c.n_steps = detail::get_or<int>(g, "n_steps", c.n_steps);
    c.horizon = detail::get_or<double>(g, "horizon", c.horizon);
  }

  if (j.contains("ensemble")) {
    const json& e = j.at("ensemble");
    detail::reject_unknown(e, "ensemble", {"n_samples", "seed"});
    c.n_samples = detail::get_or<int>(e, "n_samples", c.n_samples);
    c.seed = detail::get_or<std::uint64_t>(e, "seed", c.seed);
  }

  if (j.contains("initial_state")) {
    const json& x = j.at("initial_state");
    detail::reject_unknown(x, "initial_state", {"kind", "index", "scale"});
    c.x0_kind = detail::get_or<std::string>(x, "kind", c.x0_kind);
    c.x0_index = detail::get_or<int>(x, "index", c.x0_index);
    c.x0_scale = detail::get_or<double>(x, "scale", c.x0_scale);
  }

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    detail::reject_unknown(t, "tolerances", {"newton_tol", "max_newton_iter", "c1", "ridge"});
    c.newton_tol = detail::get_or<double>(t, "newton_tol", c.newton_tol);
    c.max_newton_iter = detail::get_or<int>(t, "max_newton_iter", c.max_newton_iter);
    c.c1 = detail::get_or<double>(t, "c1", c.c1);
    c.ridge = detail::get_or<double>(t, "ridge", c.ridge);
  }

  if (j.contains("optimize")) {
    const json& o = j.at("optimize");
    detail::reject_unknown(o, "optimize", {"max_iters", "tol", "pontryagin"});
    c.opt_max_iters = detail::get_or<int>(o, "max_iters", c.opt_max_iters);
    c.opt_tol = detail::get_or<double>(o, "tol", c.opt_tol);
    c.pontryagin = detail::get_or<bool>(o, "pontryagin", c.pontryagin);
  }

  if (c.n_cells < 3) throw config_error("config: grids.n_cells must be >= 3");
  if (c.n_steps < 1) throw config_error("config: grids.n_steps must be >= 1");
  if (c.n_samples < 1) throw config_error("config: ensemble.n_samples must be >= 1");
  return c;
}

inline problem_config load_config_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// Fully assembled problem: everything the solvers, optimizer and suites
/// need, built from one validated config.
struct problem {
  problem_config cfg;
  time_grid tgrid;
  std::shared_ptr<const dynamics_spec> spec;
  cost_spec cost;
  admissible_box box;
  vec x0;
  regression_basis basis;
  solver_options solve;
  optimize_options opt;
};

inline scalar_fn make_nonlinearity(const problem_config& c) {
  if (c.nonlinearity == "identity") return sf_identity();
  if (c.nonlinearity == "affine") return sf_affine(c.slope);
  if (c.nonlinearity == "smooth_monotone") return sf_smooth_monotone(c.slope_lo, c.slope_hi);
  if (c.nonlinearity == "arctan") return sf_arctan(c.arctan_lambda, c.declared_slope_lo);
  throw config_error("unknown nonlinearity kind '" + c.nonlinearity + "'");
}

inline space_time_fn make_reference(const std::string& kind) {
  if (kind == "zero") return ref_zero();
  if (kind == "sin") return ref_sin();
  if (kind == "sin_decay") return ref_sin_decay();
  throw config_error("unknown reference '" + kind + "'");
}

inline vec make_initial_state(const problem_config& c, const discrete_triple& tr) {
  vec x0(tr.n_dof, 0.0);
  if (c.x0_kind == "zero") return x0;
  if (c.x0_kind == "bump") {
    for (int i = 0; i < tr.n_dof; ++i) {
      const double xi = tr.dof_coordinate(i);
      x0[i] = c.x0_scale * 4.0 * xi * (1.0 - xi);
    }
    return x0;
  }
  if (c.x0_kind == "sin") {
    for (int i = 0; i < tr.n_dof; ++i)
      x0[i] = c.x0_scale * std::sin(std::numbers::pi * tr.dof_coordinate(i));
    return x0;
  }
  if (c.x0_kind == "eigen") {
    require(c.x0_index >= 1 && c.x0_index <= tr.n_dof, "initial_state.index out of range");
    const int n = tr.n_dof;
    vec sym = tr.stiffness.dense();
    for (int i = 0; i < n; ++i)
      for (int j2 = 0; j2 < n; ++j2)
        sym[static_cast<std::size_t>(i) * n + j2] *= std::sqrt(tr.mass[i]) / std::sqrt(tr.mass[j2]);
    const eig_result e = jacobi_eigs(std::move(sym), n);
    vec v = e.vectors[c.x0_index - 1];
    for (int i = 0; i < n; ++i) v[i] /= std::sqrt(tr.mass[i]);
    double nn = 0.0;
    for (int i = 0; i < n; ++i) nn += tr.mass[i] * v[i] * v[i];
    nn = std::sqrt(nn);
    int imax = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    const double sign = v[imax] < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) x0[i] = c.x0_scale * sign * v[i] / nn;
    return x0;
  }
  throw config_error("unknown initial_state kind '" + c.x0_kind + "'");
}

inline problem assemble_problem(const problem_config& c) {
  problem p;
  p.cfg = c;
  p.tgrid = time_grid(c.horizon, c.n_steps);
  const space_grid_1d grid(c.n_cells);

  bc_kind bck;
  if (c.bc == "dirichlet") bck = bc_kind::dirichlet;
  else if (c.bc == "neumann") bck = bc_kind::neumann;
  else if (c.bc == "robin") bck = bc_kind::robin;
  else throw config_error("unknown boundary condition '" + c.bc + "'");

  boundary_condition bc{bck, c.robin_alpha};
  triple_kind kind;
  if (c.family == "porous_media")
    kind = (bck == bc_kind::dirichlet) ? triple_kind::hminus1_pivot : triple_kind::h1dual_pivot;
  else if (c.family == "burgers" || c.family == "divergence") {
    if (bck != bc_kind::dirichlet)
      throw config_error(c.family + " dynamics use homogeneous Dirichlet conditions");
    kind = triple_kind::l2_pivot;
  } else {
    throw config_error("unknown dynamics family '" + c.family + "'");
  }

  const discrete_triple tr = build_triple(grid, bc, kind);

  sequence_rule mu;
  if (c.mu_kind == "power") mu = mu_power(c.mu_scale, c.mu_rate);
  else if (c.mu_kind == "zero") mu = mu_zero();
  else throw config_error("unknown noise.mu kind '" + c.mu_kind + "'");
  const int modes = std::min(c.n_modes, tr.n_dof);
  const noise_model nm = make_noise_model(tr, modes, mu, c.robin_beta, c.robin_gamma);

  const scalar_fn fn = make_nonlinearity(c);
  if (c.family == "porous_media") p.spec = make_porous_media(tr, fn, nm, c.c1);
  else if (c.family == "burgers") p.spec = make_burgers(tr, fn, nm, c.c1);
  else p.spec = make_divergence_form(tr, fn, nm, c.c1);

  tracking_cost_params prm;
  prm.w_state = c.w_state;
  prm.w_control = c.w_control;
  prm.w_boundary = c.w_boundary;
  prm.w_terminal = c.w_terminal;
  prm.w_gradient = c.w_gradient;
  prm.x_ref = make_reference(c.x_ref);
  prm.terminal_ref = ref_zero();
  if (!c.terminal_profile.empty()) {
    if (c.terminal_profile == "ones")
      prm.terminal_profile = [](double, double) { return 1.0; };
    else
      prm.terminal_profile = make_reference(c.terminal_profile);
  }
  if (c.cost_kind == "lq_tracking") p.cost = make_lq_tracking(tr, prm);
  else if (c.cost_kind == "boundary_tracking") p.cost = make_boundary_tracking(tr, prm);
  else if (c.cost_kind == "gradient_tracking") p.cost = make_gradient_tracking(tr, prm);
  else throw config_error("unknown cost kind '" + c.cost_kind + "'");

  if (p.spec->has_boundary_control() && !p.cost.has_boundary() && c.w_boundary == 0.0) {
    // boundary channel exists but carries no running cost: keep g absent
  }

  p.box = admissible_box(c.box_interior_lo, c.box_interior_hi, c.box_boundary_lo,
                         c.box_boundary_hi);
  p.x0 = make_initial_state(c, tr);
  p.basis.ridge = c.ridge;
  p.solve.newton_tol = c.newton_tol;
  p.solve.max_newton_iter = c.max_newton_iter;
  p.opt.max_iters = c.opt_max_iters;
  p.opt.tol = c.opt_tol;
  p.opt.solve = p.solve;
  return p;
}

inline brownian_driver make_driver(const problem& p) {
  brownian_driver d;
  d.seed = p.cfg.seed;
  d.n_samples = p.cfg.n_samples;
  d.tgrid = p.tgrid;
  d.n_modes = p.spec->noise().n_modes;
  d.boundary_channel = p.spec->noise().boundary_channel;
  return d;
}

/// Deterministic zero control shaped for the problem.
inline control_field zero_control(const problem& p) {
  return control_field::zeros(1, p.tgrid.n_steps, p.spec->n_dof(), p.spec->n_boundary_control());
}

}  // namespace spdeopt
