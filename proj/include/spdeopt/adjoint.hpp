#pragma once

#include "cost.hpp"

namespace spdeopt {

enum class adjoint_method { pathwise, regression };

/// Dual path (p, q). p has one row per grid time; q has one row per step
/// and noise channel, identified as p_j dW^c_j / dt -- the object the
/// duality relation and the reduced gradient contract against. Regression
/// paths are adapted by construction and carry their fitted per-step
/// coefficient tables so p can be re-evaluated as a function of the state.
struct adjoint_path {
  adjoint_method method = adjoint_method::pathwise;
  int n_samples = 0, n_steps = 0, n_dof = 0, n_channels = 0;
  vec p;  // [(s * (n_steps+1) + j) * n_dof + i]
  vec q;  // [((s * n_steps + j) * n_channels + c) * n_dof + i]

  int n_features = 0;
  vec p_coef;  // [((j) * n_features + f) * n_dof + i], regression only

  std::size_t p_offset(int s, int j) const {
    return (static_cast<std::size_t>(s) * (n_steps + 1) + j) * n_dof;
  }
  std::size_t q_offset(int s, int j, int c) const {
    return ((static_cast<std::size_t>(s) * n_steps + j) * n_channels + c) * n_dof;
  }
  std::span<const double> p_at(int s, int j) const {
    return std::span<const double>(p.data() + p_offset(s, j), n_dof);
  }
  vec p_vec(int s, int j) const {
    const auto v = p_at(s, j);
    return vec(v.begin(), v.end());
  }
  std::span<const double> q_at(int s, int j, int c) const {
    return std::span<const double>(q.data() + q_offset(s, j, c), n_dof);
  }
  vec q_vec(int s, int j, int c) const {
    const auto v = q_at(s, j, c);
    return vec(v.begin(), v.end());
  }
};

/// Feature map for the adapted least-squares solver: intercept plus nodal
/// values, optionally quadratic interactions of the first m spectral
/// coefficients.
struct regression_basis {
  bool quadratic = false;
  int m_quadratic = 0;
  double ridge = 1e-8;

  int n_features(int n_dof) const {
    return 1 + n_dof + (quadratic ? m_quadratic * (m_quadratic + 1) / 2 : 0);
  }
};

namespace detail {

inline void fill_features(const regression_basis& basis, const discrete_triple& tr,
                          const noise_model& nm, std::span<const double> x, double* out) {
  int f = 0;
  out[f++] = 1.0;
  for (int i = 0; i < tr.n_dof; ++i) out[f++] = x[i];
  if (basis.quadratic) {
    require(basis.m_quadratic <= nm.n_modes,
            "regression basis: spectral truncation exceeds the noise modes");
    vec coef(basis.m_quadratic);
    for (int a = 0; a < basis.m_quadratic; ++a) {
      double s = 0.0;
      for (int i = 0; i < tr.n_dof; ++i) s += tr.mass[i] * x[i] * nm.modes[a][i];
      coef[a] = s;
    }
    for (int a = 0; a < basis.m_quadratic; ++a)
      for (int b = a; b < basis.m_quadratic; ++b) out[f++] = coef[a] * coef[b];
  }
}

inline bool channel_active(const noise_model& nm, int c) {
  if (c < nm.n_modes) return nm.mu[c] != 0.0;
  return nm.boundary_channel && nm.gamma != 0.0;
}

}  // namespace detail

/// Per-sample backward recursion that is the exact algebraic transpose of
/// the linearized forward step against the discrete L2 weights; the
/// gradient and the duality identity then hold to round-off. Anticipating
/// (each p_j sees the whole path); use the regression variant for adapted
/// pointwise reports.
inline adjoint_path solve_adjoint_pathwise(const dynamics_spec& spec, const state_path& base,
                                           const cost_spec& cost) {
  const discrete_triple& tr = spec.space();
  const brownian_driver& drv = base.driver;
  const double dt = drv.tgrid.dt();
  const int nn = base.n_steps;

  adjoint_path a;
  a.method = adjoint_method::pathwise;
  a.n_samples = base.n_samples;
  a.n_steps = nn;
  a.n_dof = base.n_dof;
  a.n_channels = spec.noise().n_channels();
  a.p.assign(static_cast<std::size_t>(a.n_samples) * (nn + 1) * a.n_dof, 0.0);
  a.q.assign(static_cast<std::size_t>(a.n_samples) * nn * std::max(a.n_channels, 1) * a.n_dof,
             0.0);
  if (a.n_channels == 0) a.q.clear();

  for (int s = 0; s < a.n_samples; ++s) {
    vec pj = scaled(cost.h_dx(base.x_vec(s, nn)), -1.0);
    std::copy(pj.begin(), pj.end(), a.p.begin() + a.p_offset(s, nn));
    for (int j = nn - 1; j >= 0; --j) {
      vec bracket = pj;
      if (j + 1 <= nn - 1) {
        const vec dw_next = detail::increments_row(drv, s, j + 1);
        axpy(1.0, spec.sigma_dx_adjoint_increment(pj, dw_next), bracket);
        axpy(-dt, cost.f_dx(drv.tgrid.t(j + 1), base.x_vec(s, j + 1),
                            base.control.at(s, j + 1).interior),
             bracket);
      }
      tridiag jm = spec.drift_jac_x(drv.tgrid.t(j), base.x_vec(s, j + 1), base.control.at(s, j));
      jm.scale(-dt);
      jm.add_scaled_identity(1.0);
      pj = tridiag_lu(jm.weighted_transpose(tr.mass)).solve(bracket);
      std::copy(pj.begin(), pj.end(), a.p.begin() + a.p_offset(s, j));
      const vec dw = detail::increments_row(drv, s, j);
      for (int c = 0; c < a.n_channels; ++c) {
        if (!detail::channel_active(spec.noise(), c)) continue;
        double* qrow = a.q.data() + a.q_offset(s, j, c);
        const double w = dw[c] / dt;
        for (int i = 0; i < a.n_dof; ++i) qrow[i] = pj[i] * w;
      }
    }
  }
  return a;
}

/// Backward least-squares Monte Carlo: p_j regresses the one-step-transposed
/// continuation on features of x_j, and q^c_j regresses continuation times
/// dW^c_j/dt (martingale-representation estimator). Adapted by construction;
/// bias depends on basis richness.
inline adjoint_path solve_adjoint_regression(const dynamics_spec& spec, const state_path& base,
                                             const cost_spec& cost,
                                             const regression_basis& basis = {}) {
  const discrete_triple& tr = spec.space();
  const noise_model& nm = spec.noise();
  const brownian_driver& drv = base.driver;
  const double dt = drv.tgrid.dt();
  const int nn = base.n_steps;
  const int ns = base.n_samples;
  const int nf = basis.n_features(base.n_dof);
  const int nd = base.n_dof;

  adjoint_path a;
  a.method = adjoint_method::regression;
  a.n_samples = ns;
  a.n_steps = nn;
  a.n_dof = nd;
  a.n_channels = nm.n_channels();
  a.n_features = nf;
  a.p.assign(static_cast<std::size_t>(ns) * (nn + 1) * nd, 0.0);
  a.q.assign(static_cast<std::size_t>(ns) * nn * std::max(a.n_channels, 1) * nd, 0.0);
  if (a.n_channels == 0) a.q.clear();
  a.p_coef.assign(static_cast<std::size_t>(nn) * nf * nd, 0.0);

  // exact terminal values per sample
  for (int s = 0; s < ns; ++s) {
    const vec pT = scaled(cost.h_dx(base.x_vec(s, nn)), -1.0);
    std::copy(pT.begin(), pT.end(), a.p.begin() + a.p_offset(s, nn));
  }

  vec features(static_cast<std::size_t>(ns) * nf);
  vec continuation(static_cast<std::size_t>(ns) * nd);
  std::vector<int> active;
  for (int c = 0; c < a.n_channels; ++c)
    if (detail::channel_active(nm, c)) active.push_back(c);

  for (int j = nn - 1; j >= 0; --j) {
    for (int s = 0; s < ns; ++s) {
      vec bracket = a.p_vec(s, j + 1);
      if (j + 1 <= nn - 1) {
        const vec dw_next = detail::increments_row(drv, s, j + 1);
        axpy(1.0, spec.sigma_dx_adjoint_increment(a.p_vec(s, j + 1), dw_next), bracket);
        axpy(-dt, cost.f_dx(drv.tgrid.t(j + 1), base.x_vec(s, j + 1),
                            base.control.at(s, j + 1).interior),
             bracket);
      }
      tridiag jm = spec.drift_jac_x(drv.tgrid.t(j), base.x_vec(s, j + 1), base.control.at(s, j));
      jm.scale(-dt);
      jm.add_scaled_identity(1.0);
      const vec y = tridiag_lu(jm.weighted_transpose(tr.mass)).solve(bracket);
      std::copy(y.begin(), y.end(), continuation.begin() + static_cast<std::size_t>(s) * nd);
      detail::fill_features(basis, tr, nm, base.x(s, j), features.data() + static_cast<std::size_t>(s) * nf);
    }

    // shared normal matrix, one Cholesky per step, many right-hand sides
    vec gram(static_cast<std::size_t>(nf) * nf, 0.0);
    for (int s = 0; s < ns; ++s) {
      const double* fr = features.data() + static_cast<std::size_t>(s) * nf;
      for (int r = 0; r < nf; ++r)
        for (int c2 = r; c2 < nf; ++c2) gram[static_cast<std::size_t>(r) * nf + c2] += fr[r] * fr[c2];
    }
    for (int r = 0; r < nf; ++r) {
      for (int c2 = 0; c2 < r; ++c2)
        gram[static_cast<std::size_t>(r) * nf + c2] = gram[static_cast<std::size_t>(c2) * nf + r];
      gram[static_cast<std::size_t>(r) * nf + r] += basis.ridge;
    }
    try {
      cholesky_factor(gram, nf);
    } catch (const solver_error&) {
      throw solver_error("solve_adjoint_regression: design matrix rank-deficient after ridge at "
                         "step " + std::to_string(j) + " (features " + std::to_string(nf) +
                         ", samples " + std::to_string(ns) + ", ridge " +
                         std::to_string(basis.ridge) + ")");
    }

    auto fit_predict = [&](const std::function<double(int, int)>& target, double* coef_out,
                           const std::function<void(int, int, double)>& sink) {
      vec rhs(nf);
      for (int i = 0; i < nd; ++i) {
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (int s = 0; s < ns; ++s) {
          const double* fr = features.data() + static_cast<std::size_t>(s) * nf;
          const double yv = target(s, i);
          for (int r = 0; r < nf; ++r) rhs[r] += fr[r] * yv;
        }
        const vec beta = cholesky_solve(gram, nf, rhs);
        if (coef_out != nullptr)
          for (int r = 0; r < nf; ++r) coef_out[static_cast<std::size_t>(r) * nd + i] = beta[r];
        for (int s = 0; s < ns; ++s) {
          const double* fr = features.data() + static_cast<std::size_t>(s) * nf;
          double v = 0.0;
          for (int r = 0; r < nf; ++r) v += fr[r] * beta[r];
          sink(s, i, v);
        }
      }
    };

    fit_predict(
        [&](int s, int i) { return continuation[static_cast<std::size_t>(s) * nd + i]; },
        a.p_coef.data() + static_cast<std::size_t>(j) * nf * nd,
        [&](int s, int i, double v) { a.p[a.p_offset(s, j) + i] = v; });

    for (int c : active) {
      fit_predict(
          [&](int s, int i) {
            return continuation[static_cast<std::size_t>(s) * nd + i] *
                   drv.increment(s, j, c) / dt;
          },
          nullptr, [&](int s, int i, double v) { a.q[a.q_offset(s, j, c) + i] = v; });
    }
  }
  return a;
}

/// Evaluates the fitted regression function for p at a given step and state.
inline vec evaluate_regression_p(const adjoint_path& a, const dynamics_spec& spec,
                                 const regression_basis& basis, int step,
                                 std::span<const double> x) {
  require(a.method == adjoint_method::regression, "evaluate_regression_p: pathwise object");
  require(step >= 0 && step < a.n_steps, "evaluate_regression_p: step out of range");
  vec f(a.n_features);
  detail::fill_features(basis, spec.space(), spec.noise(), x, f.data());
  vec out(a.n_dof, 0.0);
  const double* coef = a.p_coef.data() + static_cast<std::size_t>(step) * a.n_features * a.n_dof;
  for (int r = 0; r < a.n_features; ++r)
    for (int i = 0; i < a.n_dof; ++i) out[i] += f[r] * coef[static_cast<std::size_t>(r) * a.n_dof + i];
  return out;
}

struct duality_report {
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  double scale = 0.0;  // mean absolute size of the assembled terms
  double mc_se = 0.0;  // standard error of the per-sample residual mean
  int n_samples = 0;
};

/// Assembles the discrete duality identity
///   0 = E int [ <z, df/dx> + <dA/du v, p> + <dsigma/du v, q> ] dt
///       + E <z_T, dh/dx>
/// and reports its residual. Pathwise adjoints satisfy it to round-off,
/// per sample; regression adjoints satisfy it up to projection bias and
/// Monte Carlo error.
inline duality_report check_duality(const dynamics_spec& spec, const state_path& base,
                                    const adjoint_path& adj, const linearized_path& z,
                                    const control_field& v, const cost_spec& cost) {
  const discrete_triple& tr = spec.space();
  const noise_model& nm = spec.noise();
  const brownian_driver& drv = base.driver;
  const double dt = drv.tgrid.dt();
  const int nn = base.n_steps;

  duality_report rep;
  rep.n_samples = base.n_samples;
  double mean = 0.0, meansq = 0.0, scale = 0.0;
  for (int s = 0; s < base.n_samples; ++s) {
    double r = 0.0, sc = 0.0;
    for (int j = 0; j < nn; ++j) {
      const double t = drv.tgrid.t(j);
      const control_slice us = base.control.at(s, j);
      const control_slice vs = v.at(s, j);
      const double t1 = tr.inner_l2(cost.f_dx(t, base.x_vec(s, j), us.interior), z.x_vec(s, j));
      const double t2 =
          tr.inner_l2(spec.drift_du(t, base.x_vec(s, j + 1), vs), adj.p_vec(s, j));
      double t3 = 0.0;
      if (nm.boundary_channel && nm.gamma != 0.0) {
        const vec lift =
            tr.boundary_functional_lift({vs.boundary[0], vs.boundary[1]});
        t3 = nm.gamma * tr.inner_l2(lift, adj.q_vec(s, j, nm.n_modes));
      }
      r += dt * (t1 + t2 + t3);
      sc += dt * (std::abs(t1) + std::abs(t2) + std::abs(t3));
    }
    const double tT = tr.inner_l2(cost.h_dx(base.x_vec(s, nn)), z.x_vec(s, nn));
    r += tT;
    sc += std::abs(tT);
    mean += r;
    meansq += r * r;
    scale += sc;
  }
  mean /= base.n_samples;
  meansq /= base.n_samples;
  scale /= base.n_samples;
  rep.scale = scale;
  rep.abs_residual = std::abs(mean);
  rep.rel_residual = rep.abs_residual / std::max(scale, 1e-300);
  rep.mc_se = base.n_samples > 1
                  ? std::sqrt(std::max(meansq - mean * mean, 0.0) / (base.n_samples - 1))
                  : 0.0;
  return rep;
}

}  // namespace spdeopt
