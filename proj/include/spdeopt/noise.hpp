#pragma once

#include <functional>
#include <numbers>
#include <span>

#include "triple.hpp"

namespace spdeopt {

// ---------------------------------------------------------------------------
// Counter-based normal variates: every increment is a pure function of
// (seed, sample, step, channel), so common random numbers survive any
// evaluation order and controls can be re-simulated bit-identically.
// ---------------------------------------------------------------------------

namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return mix64(h ^ c);
}

inline double uniform_from(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
}

inline double standard_normal(std::uint64_t k) {
  const double u1 = uniform_from(mix64(k ^ 0x452821e638d01377ULL));
  const double u2 = uniform_from(mix64(k ^ 0x13198a2e03707344ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

/// Seedable Brownian increments over a time grid: Normal(0, dt) per
/// (sample, step, channel). Stateless given the indices. resplice() swaps in
/// a second seed from a given step onward (adaptedness experiments).
struct brownian_driver {
  std::uint64_t seed = 0;
  int n_samples = 1;
  time_grid tgrid;
  int n_modes = 0;
  bool boundary_channel = false;

  std::uint64_t future_seed = 0;
  int split_step = -1;

  int n_channels() const { return n_modes + (boundary_channel ? 1 : 0); }

  brownian_driver resplice(std::uint64_t new_future_seed, int from_step) const {
    brownian_driver d(*this);
    d.future_seed = new_future_seed;
    d.split_step = from_step;
    return d;
  }

  double increment(int sample, int step, int channel) const {
    require(step >= 0 && step < tgrid.n_steps, "brownian_driver: step out of range");
    require(sample >= 0 && sample < n_samples, "brownian_driver: sample out of range");
    require(channel >= 0 && channel < n_channels(), "brownian_driver: channel out of range");
    const std::uint64_t s = (split_step >= 0 && step >= split_step) ? future_seed : seed;
    return std::sqrt(tgrid.dt()) *
           rng::standard_normal(rng::key(s, static_cast<std::uint64_t>(sample),
                                         static_cast<std::uint64_t>(step),
                                         static_cast<std::uint64_t>(channel)));
  }

  /// Row-major (n_samples x n_channels) matrix of increments for one step.
  vec sample_increments(int step) const {
    const int nc = n_channels();
    vec m(static_cast<std::size_t>(n_samples) * nc);
    for (int s = 0; s < n_samples; ++s)
      for (int c = 0; c < nc; ++c) m[static_cast<std::size_t>(s) * nc + c] = increment(s, step, c);
    return m;
  }

  bool same_stream(const brownian_driver& o) const {
    return seed == o.seed && n_samples == o.n_samples && n_modes == o.n_modes &&
           boundary_channel == o.boundary_channel && split_step == o.split_step &&
           future_seed == o.future_seed && tgrid.n_steps == o.tgrid.n_steps &&
           tgrid.horizon == o.tgrid.horizon;
  }
};

// ---------------------------------------------------------------------------
// Truncated eigenbasis noise model
// ---------------------------------------------------------------------------

/// Truncated cylindrical Wiener structure: the k-th channel multiplies the
/// state pointwise by mu_k e_k, where (lambda_k, e_k) are eigenpairs of the
/// *discrete* Laplacian of the hosting triple (orthonormality is then exact
/// on the grid). An optional boundary channel carries u^bdry [beta + gamma w'].
struct noise_model {
  int n_modes = 0;
  vec mu;                    // size n_modes
  vec lambda;                // discrete eigenvalues, ascending
  std::vector<vec> modes;    // L2(M)-orthonormal dof vectors
  double beta = 1.0;
  double gamma = 0.0;
  bool boundary_channel = false;

  int n_channels() const { return n_modes + (boundary_channel ? 1 : 0); }
  bool control_dependent() const { return boundary_channel && gamma != 0.0; }
};

using sequence_rule = std::function<double(int)>;  // 1-based index

inline sequence_rule mu_power(double scale, double rate) {
  return [=](int k) { return scale * std::pow(static_cast<double>(k), -rate); };
}

inline sequence_rule mu_zero() {
  return [](int) { return 0.0; };
}

/// Continuous Dirichlet Laplacian eigenvalues on (0,1): (k pi)^2.
inline sequence_rule lambda_dirichlet_1d() {
  return [](int k) { return std::pow(k * std::numbers::pi, 2.0); };
}

/// Neumann family shifted by one so the validator sees a positive sequence
/// accounting for the null first eigenvalue.
inline sequence_rule lambda_neumann_shifted_1d() {
  return [](int k) { return 1.0 + std::pow((k - 1) * std::numbers::pi, 2.0); };
}

inline noise_model make_noise_model(const discrete_triple& t, int n_modes,
                                    const sequence_rule& mu, double beta = 1.0,
                                    double gamma = 0.0) {
  require(n_modes >= 0 && n_modes <= t.n_dof, "make_noise_model: n_modes out of range");
  noise_model m;
  m.n_modes = n_modes;
  m.beta = beta;
  m.gamma = gamma;
  m.boundary_channel = (t.bc.kind == bc_kind::robin && gamma != 0.0);
  if (m.boundary_channel && t.interior_only)
    throw config_error("make_noise_model: boundary noise needs a full-node layout");
  if (n_modes == 0) return m;

  const int n = t.n_dof;
  vec sym = t.stiffness.dense();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sym[static_cast<std::size_t>(i) * n + j] *= std::sqrt(t.mass[i]) / std::sqrt(t.mass[j]);
  const eig_result e = jacobi_eigs(std::move(sym), n);
  m.mu.resize(n_modes);
  m.lambda.resize(n_modes);
  m.modes.resize(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    m.mu[k] = mu(k + 1);
    m.lambda[k] = e.values[k];
    vec v = e.vectors[k];
    for (int i = 0; i < n; ++i) v[i] /= std::sqrt(t.mass[i]);  // back to nodal values
    // normalize in the weighted L2 product and fix the sign deterministically
    double nn = 0.0;
    for (int i = 0; i < n; ++i) nn += t.mass[i] * v[i] * v[i];
    nn = std::sqrt(nn);
    for (double& x : v) x /= nn;
    int imax = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0)
      for (double& x : v) x = -x;
    m.modes[k] = std::move(v);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Summability validation
// ---------------------------------------------------------------------------

enum class summability_exponent { lower, upper };  // (d-1)/2 resp. (d+1)/2

struct summability_report {
  bool pass = false;
  double exponent = 0.0;
  vec partial_sums;        // at window boundaries 64, 128, 256, ...
  vec window_increments;
  vec ratios;              // consecutive window-increment ratios
  double tail_estimate = 0.0;
  std::string detail;
};

/// Doubling-window ratio certificate for sum mu_k^2 lambda_k^e: convergent
/// when the window increments decay geometrically. A proxy, not a proof.
inline summability_report validate_summability(const sequence_rule& mu,
                                               const sequence_rule& lambda, int d,
                                               summability_exponent kind) {
  summability_report r;
  r.exponent = (kind == summability_exponent::lower) ? (d - 1) / 2.0 : (d + 1) / 2.0;
  const int window = 64;
  const int levels = 7;
  double s = 0.0;
  int k = 1;
  double prev = 0.0;
  for (int l = 0; l <= levels; ++l) {
    const int upto = window << l;
    for (; k <= upto; ++k) {
      const double lam = lambda(k);
      require(lam > 0.0, "validate_summability: lambda must be positive");
      const double mk = mu(k);
      s += mk * mk * std::pow(lam, r.exponent);
    }
    r.partial_sums.push_back(s);
    if (l > 0) r.window_increments.push_back(s - prev);
    prev = s;
  }
  for (std::size_t i = 1; i < r.window_increments.size(); ++i) {
    const double a = r.window_increments[i - 1];
    const double b = r.window_increments[i];
    r.ratios.push_back(a > 0.0 ? b / a : 0.0);
  }
  if (r.window_increments.empty() || r.window_increments.back() < 1e-300) {
    r.pass = true;
    r.tail_estimate = 0.0;
    r.detail = "window increments vanish";
    return r;
  }
  double worst = 0.0;
  const std::size_t nr = r.ratios.size();
  for (std::size_t i = (nr >= 3 ? nr - 3 : 0); i < nr; ++i) worst = std::max(worst, r.ratios[i]);
  r.pass = worst <= 0.95;
  r.tail_estimate = r.pass ? r.window_increments.back() * worst / (1.0 - worst) : k_inf;
  r.detail = r.pass ? "geometric window decay" : "window increments do not decay";
  return r;
}

// ---------------------------------------------------------------------------
// Diffusion operator
// ---------------------------------------------------------------------------

/// sigma(x, u^bdry) applied to one row of Brownian increments:
///   sum_k mu_k dW^k (x . e_k)   [+ gamma dw^bdry lift(u^bdry) for Robin].
inline vec apply_sigma(const noise_model& m, const discrete_triple& t, const vec& x,
                       std::span<const double> increments,
                       std::span<const double> u_boundary = {}) {
  require(t.check_dim(x), "apply_sigma: state/grid mismatch");
  require(static_cast<int>(increments.size()) == m.n_channels(),
          "apply_sigma: wrong number of increment channels");
  vec y(t.n_dof, 0.0);
  for (int k = 0; k < m.n_modes; ++k) {
    const double w = m.mu[k] * increments[k];
    if (w == 0.0) continue;
    const vec& e = m.modes[k];
    for (int i = 0; i < t.n_dof; ++i) y[i] += w * x[i] * e[i];
  }
  if (m.boundary_channel) {
    require(u_boundary.size() == 2, "apply_sigma: Robin channel needs boundary control values");
    const double w = m.gamma * increments[m.n_modes];
    if (w != 0.0) {
      const vec lift = t.boundary_functional_lift({u_boundary[0], u_boundary[1]});
      axpy(w, lift, y);
    }
  }
  return y;
}

/// Hilbert-Schmidt norm of sigma(x, u^bdry) into the H geometry of the triple.
inline double sigma_hs_norm(const noise_model& m, const discrete_triple& t, const vec& x,
                            std::span<const double> u_boundary = {}) {
  double s = 0.0;
  for (int k = 0; k < m.n_modes; ++k) {
    if (m.mu[k] == 0.0) continue;
    const double nh = t.norm_h(hadamard(x, m.modes[k]));
    s += m.mu[k] * m.mu[k] * nh * nh;
  }
  if (m.boundary_channel) {
    require(u_boundary.size() == 2, "sigma_hs_norm: Robin channel needs boundary control values");
    const vec lift = t.boundary_functional_lift({u_boundary[0], u_boundary[1]});
    const double nh = t.norm_h(lift);
    s += m.gamma * m.gamma * nh * nh;
  }
  return std::sqrt(s);
}

/// ||d_x sigma|| in L(H, L2(K,H)) by power iteration on the H-self-adjoint
/// operator z -> sum_k mu_k^2 P_H(e_k . (e_k . z)); x-independent because
/// sigma is linear in the state.
inline double sigma_dx_operator_norm(const noise_model& m, const discrete_triple& t,
                                     int iterations = 80) {
  if (m.n_modes == 0) return 0.0;
  const int n = t.n_dof;
  vec z(n);
  for (int i = 0; i < n; ++i) z[i] = 1.0 + 0.29 * std::cos(1.7 * i + 0.3);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    // s = sum_k mu_k^2 e_k . (M R^{-1}(e_k . z)), then T z = R M^{-1} s
    vec s(n, 0.0);
    for (int k = 0; k < m.n_modes; ++k) {
      if (m.mu[k] == 0.0) continue;
      const vec w = t.riesz_solve(hadamard(z, m.modes[k]));
      for (int i = 0; i < n; ++i) s[i] += m.mu[k] * m.mu[k] * m.modes[k][i] * t.mass[i] * w[i];
    }
    for (int i = 0; i < n; ++i) s[i] /= t.mass[i];
    vec tz = t.riesz_is_identity ? s : t.riesz.apply(s);
    const double nh = t.norm_h(tz);
    if (nh < 1e-300) return 0.0;
    lambda = t.inner_h(tz, z) / std::max(t.inner_h(z, z), 1e-300);
    for (double& v : tz) v /= nh;
    z = std::move(tz);
  }
  return std::sqrt(std::max(lambda, 0.0));
}

/// ||d_u sigma|| for the Robin boundary channel (exact from the 2x2 Gram of
/// the lift vectors in H); zero for control-independent noise.
inline double sigma_du_operator_norm(const noise_model& m, const discrete_triple& t) {
  if (!m.boundary_channel || m.gamma == 0.0) return 0.0;
  const vec l0 = t.boundary_functional_lift({1.0, 0.0});
  const vec l1 = t.boundary_functional_lift({0.0, 1.0});
  const double a = t.inner_h(l0, l0), b = t.inner_h(l0, l1), c = t.inner_h(l1, l1);
  const double lam = 0.5 * (a + c + std::sqrt((a - c) * (a - c) + 4.0 * b * b));
  return std::abs(m.gamma) * std::sqrt(std::max(lam, 0.0));
}

}  // namespace spdeopt
