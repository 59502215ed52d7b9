#pragma once

#include <random>

#include "spdeopt/spdeopt.hpp"

namespace spdeopt::testing {

inline vec random_vec(int n, std::mt19937_64& eng, double scale = 1.0) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  vec v(n);
  for (double& x : v) x = uni(eng);
  return v;
}

inline control_field random_control(int n_samples, int n_steps, int n_interior, int n_boundary,
                                    std::mt19937_64& eng, double scale = 1.0) {
  control_field u = control_field::zeros(n_samples, n_steps, n_interior, n_boundary);
  std::uniform_real_distribution<double> uni(-scale, scale);
  for (double& x : u.interior) x = uni(eng);
  for (double& x : u.boundary) x = uni(eng);
  return u;
}

struct test_problem {
  discrete_triple triple;
  noise_model noise;
  std::shared_ptr<const dynamics_spec> spec;
  brownian_driver driver;
  vec x0;
};

/// Porous-media instance on the Dirichlet H^-1-pivot triple.
inline test_problem porous_dirichlet(int n_cells, int n_steps, int n_samples, int n_modes,
                                     const scalar_fn& psi, double mu_scale = 0.2,
                                     double horizon = 0.25, std::uint64_t seed = 77) {
  test_problem tp;
  tp.triple = build_triple(space_grid_1d(n_cells), boundary_condition::dirichlet(),
                           triple_kind::hminus1_pivot);
  tp.noise = make_noise_model(tp.triple, n_modes, mu_power(mu_scale, 2.0));
  tp.spec = make_porous_media(tp.triple, psi, tp.noise);
  tp.driver.seed = seed;
  tp.driver.n_samples = n_samples;
  tp.driver.tgrid = time_grid(horizon, n_steps);
  tp.driver.n_modes = tp.noise.n_modes;
  tp.driver.boundary_channel = tp.noise.boundary_channel;
  tp.x0.assign(tp.triple.n_dof, 0.0);
  for (int i = 0; i < tp.triple.n_dof; ++i)
    tp.x0[i] = std::sin(std::numbers::pi * tp.triple.dof_coordinate(i));
  return tp;
}

inline test_problem porous_neumann(int n_cells, int n_steps, int n_samples, int n_modes,
                                   const scalar_fn& psi, double mu_scale = 0.2,
                                   double horizon = 0.25, std::uint64_t seed = 78) {
  test_problem tp;
  tp.triple = build_triple(space_grid_1d(n_cells), boundary_condition::neumann(),
                           triple_kind::h1dual_pivot);
  tp.noise = make_noise_model(tp.triple, n_modes, mu_power(mu_scale, 2.0));
  tp.spec = make_porous_media(tp.triple, psi, tp.noise);
  tp.driver.seed = seed;
  tp.driver.n_samples = n_samples;
  tp.driver.tgrid = time_grid(horizon, n_steps);
  tp.driver.n_modes = tp.noise.n_modes;
  tp.driver.boundary_channel = tp.noise.boundary_channel;
  tp.x0.assign(tp.triple.n_dof, 0.0);
  for (int i = 0; i < tp.triple.n_dof; ++i)
    tp.x0[i] = std::cos(std::numbers::pi * tp.triple.dof_coordinate(i));
  return tp;
}

inline test_problem porous_robin(int n_cells, int n_steps, int n_samples, int n_modes,
                                 const scalar_fn& psi, double gamma, double mu_scale = 0.2,
                                 double horizon = 0.25, std::uint64_t seed = 79) {
  test_problem tp;
  tp.triple = build_triple(space_grid_1d(n_cells), boundary_condition::robin(1.0, 1.5),
                           triple_kind::h1dual_pivot);
  tp.noise = make_noise_model(tp.triple, n_modes, mu_power(mu_scale, 2.0), /*beta=*/1.0, gamma);
  tp.spec = make_porous_media(tp.triple, psi, tp.noise);
  tp.driver.seed = seed;
  tp.driver.n_samples = n_samples;
  tp.driver.tgrid = time_grid(horizon, n_steps);
  tp.driver.n_modes = tp.noise.n_modes;
  tp.driver.boundary_channel = tp.noise.boundary_channel;
  tp.x0.assign(tp.triple.n_dof, 0.0);
  for (int i = 0; i < tp.triple.n_dof; ++i) {
    const double xi = tp.triple.dof_coordinate(i);
    tp.x0[i] = 0.5 + xi * (1.0 - xi);
  }
  return tp;
}

inline test_problem burgers(int n_cells, int n_steps, int n_samples, int n_modes,
                            const scalar_fn& b, double mu_scale = 0.2, double horizon = 0.25,
                            std::uint64_t seed = 80) {
  test_problem tp;
  tp.triple = build_triple(space_grid_1d(n_cells), boundary_condition::dirichlet(),
                           triple_kind::l2_pivot);
  tp.noise = make_noise_model(tp.triple, n_modes, mu_power(mu_scale, 2.0));
  tp.spec = make_burgers(tp.triple, b, tp.noise);
  tp.driver.seed = seed;
  tp.driver.n_samples = n_samples;
  tp.driver.tgrid = time_grid(horizon, n_steps);
  tp.driver.n_modes = tp.noise.n_modes;
  tp.driver.boundary_channel = false;
  tp.x0.assign(tp.triple.n_dof, 0.0);
  for (int i = 0; i < tp.triple.n_dof; ++i)
    tp.x0[i] = std::sin(2.0 * std::numbers::pi * tp.triple.dof_coordinate(i));
  return tp;
}

inline test_problem divergence(int n_cells, int n_steps, int n_samples, int n_modes,
                               const scalar_fn& phi, double mu_scale = 0.2,
                               double horizon = 0.25, std::uint64_t seed = 81) {
  test_problem tp;
  tp.triple = build_triple(space_grid_1d(n_cells), boundary_condition::dirichlet(),
                           triple_kind::l2_pivot);
  tp.noise = make_noise_model(tp.triple, n_modes, mu_power(mu_scale, 2.0));
  tp.spec = make_divergence_form(tp.triple, phi, tp.noise);
  tp.driver.seed = seed;
  tp.driver.n_samples = n_samples;
  tp.driver.tgrid = time_grid(horizon, n_steps);
  tp.driver.n_modes = tp.noise.n_modes;
  tp.driver.boundary_channel = false;
  tp.x0.assign(tp.triple.n_dof, 0.0);
  for (int i = 0; i < tp.triple.n_dof; ++i)
    tp.x0[i] = std::sin(std::numbers::pi * tp.triple.dof_coordinate(i));
  return tp;
}

inline cost_spec default_cost(const test_problem& tp) {
  tracking_cost_params prm;
  prm.w_state = 1.0;
  prm.w_control = 0.05;
  prm.w_terminal = 0.5;
  prm.x_ref = ref_sin_decay();
  if (tp.spec->has_boundary_control()) {
    prm.w_boundary = 0.1;
    return make_boundary_tracking(tp.triple, prm);
  }
  return make_lq_tracking(tp.triple, prm);
}

}  // namespace spdeopt::testing
