#pragma once

#include <array>
#include <optional>

#include "grid.hpp"
#include "linalg.hpp"

namespace spdeopt {

enum class bc_kind { dirichlet, neumann, robin };

struct boundary_condition {
  bc_kind kind = bc_kind::dirichlet;
  std::array<double, 2> robin_alpha{0.0, 0.0};  // weights at xi = 0 and xi = 1

  static boundary_condition dirichlet() { return {bc_kind::dirichlet, {0.0, 0.0}}; }
  static boundary_condition neumann() { return {bc_kind::neumann, {0.0, 0.0}}; }
  static boundary_condition robin(double a0, double a1) { return {bc_kind::robin, {a0, a1}}; }
};

inline const char* to_string(bc_kind k) {
  switch (k) {
    case bc_kind::dirichlet: return "dirichlet";
    case bc_kind::neumann: return "neumann";
    case bc_kind::robin: return "robin";
  }
  return "?";
}

/// Which space plays the pivot in V0 c H c V1.
///   l2_pivot:      H01 c L2 c H^-1            (divergence-form, Burgers)
///   hminus1_pivot: L2 c H^-1 c (H2 n H01)'    (Dirichlet porous media)
///   h1dual_pivot:  L2 c (H1)' c script-H'     (Neumann/Robin porous media)
enum class triple_kind { l2_pivot, hminus1_pivot, h1dual_pivot };

inline const char* to_string(triple_kind k) {
  switch (k) {
    case triple_kind::l2_pivot: return "l2_pivot";
    case triple_kind::hminus1_pivot: return "hminus1_pivot";
    case triple_kind::h1dual_pivot: return "h1dual_pivot";
  }
  return "?";
}

/// Finite-dimensional realization of a Gelfand triple on a uniform grid.
/// Dirichlet layouts carry interior nodes only; Neumann/Robin carry all
/// nodes with trapezoidal L2 weights. All H and V1 norms go through cached
/// tridiagonal factorizations, never explicit inverses. Immutable after
/// build; safe to share across threads.
class discrete_triple {
 public:
  space_grid_1d grid;
  boundary_condition bc;
  triple_kind kind = triple_kind::hminus1_pivot;

  int n_dof = 0;
  bool interior_only = true;
  vec mass;             // diagonal L2 weights
  tridiag stiffness;    // discrete -Laplacian for the boundary condition
  tridiag riesz;        // pivot Riesz operator; identity for l2_pivot
  bool riesz_is_identity = false;
  double stiff_eig_min = 0.0;  // smallest M-eigenvalue of the stiffness
  double riesz_eig_min = 0.0;
  double c_embed = 0.0;        // measured ||x||_H <= c_embed ||x||_V0

  double inner_l2(const vec& x, const vec& y) const {
    require(check_dim(x) && check_dim(y), "inner_l2: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < n_dof; ++i) s += mass[i] * x[i] * y[i];
    return s;
  }

  double norm_l2(const vec& x) const { return std::sqrt(std::max(0.0, inner_l2(x, x))); }

  vec riesz_solve(const vec& y) const {
    require(check_dim(y), "riesz_solve: dimension mismatch");
    return riesz_is_identity ? y : riesz_lu_->solve(y);
  }

  vec stiff_solve(const vec& y) const {
    require(check_dim(y), "stiff_solve: dimension mismatch");
    require(stiff_lu_.has_value(), "stiff_solve: singular stiffness (Neumann kernel)");
    return stiff_lu_->solve(y);
  }

  /// H inner product: (R^{-1}x, y)_{L2} with the pivot Riesz operator R.
  double inner_h(const vec& x, const vec& y) const { return inner_l2(riesz_solve(x), y); }

  double norm_h(const vec& x) const { return std::sqrt(std::max(0.0, inner_h(x, x))); }

  /// Duality pairing <y, x>_{V1,V0}; extends the H inner product, evaluated
  /// through the opposite factorization route than inner_h.
  double pair_v1_v0(const vec& y, const vec& x) const {
    require(check_dim(x) && check_dim(y), "pair_v1_v0: dimension mismatch");
    return inner_l2(x, riesz_solve(y));
  }

  double norm_v0(const vec& x) const {
    if (kind == triple_kind::l2_pivot)
      return std::sqrt(std::max(0.0, inner_l2(x, stiffness.apply(x))));
    return norm_l2(x);
  }

  double norm_v1(const vec& y) const {
    switch (kind) {
      case triple_kind::l2_pivot:
        return std::sqrt(std::max(0.0, inner_l2(y, stiff_solve(y))));
      case triple_kind::hminus1_pivot:
        return norm_l2(stiff_solve(y));
      case triple_kind::h1dual_pivot:
        return norm_l2(riesz_solve(y));
    }
    return 0.0;
  }

  /// Pads Dirichlet-interior vectors with their zero boundary values.
  vec to_full(const vec& x) const {
    require(check_dim(x), "to_full: dimension mismatch");
    if (!interior_only) return x;
    vec f(grid.n_nodes(), 0.0);
    for (int i = 0; i < n_dof; ++i) f[i + 1] = x[i];
    return f;
  }

  double dof_coordinate(int i) const {
    return interior_only ? grid.node(i + 1) : grid.node(i);
  }

  /// Outward normal derivative at both boundary points via one-sided
  /// second-order stencils: d/dnu = -d/dxi at 0 and +d/dxi at 1.
  std::array<double, 2> neumann_trace(const vec& phi) const {
    require(grid.n_cells >= 3, "neumann_trace: grid too coarse (n_cells < 3)");
    const vec f = to_full(phi);
    const double h = grid.h();
    const int n = grid.n_cells;
    const double left = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    const double right = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * h);
    return {-left, right};
  }

  /// Discrete lift of boundary data w = (w0, w1) realizing the functional
  /// phi -> w0 phi(0) + w1 phi(1) against the L2 weights. Full-node layouts
  /// only (Neumann/Robin machinery).
  vec boundary_functional_lift(const std::array<double, 2>& w) const {
    require(!interior_only, "boundary_functional_lift: needs a full-node layout");
    vec v(n_dof, 0.0);
    v[0] = 2.0 * w[0] / grid.h();
    v[n_dof - 1] = 2.0 * w[1] / grid.h();
    return v;
  }

  bool check_dim(const vec& x) const { return static_cast<int>(x.size()) == n_dof; }

  const tridiag_lu& stiff_factorization() const { return *stiff_lu_; }
  const tridiag_lu& riesz_factorization() const { return *riesz_lu_; }

  std::optional<tridiag_lu> stiff_lu_;
  std::optional<tridiag_lu> riesz_lu_;
};

namespace detail {

inline tridiag assemble_stiffness(const space_grid_1d& g, const boundary_condition& bc) {
  const double h = g.h();
  const double w = 1.0 / (h * h);
  if (bc.kind == bc_kind::dirichlet) {
    const int n = g.n_interior();
    tridiag k = tridiag::zero(n);
    for (int i = 0; i < n; ++i) {
      k.di[i] = 2.0 * w;
      if (i > 0) k.lo[i] = -w;
      if (i + 1 < n) k.up[i] = -w;
    }
    return k;
  }
  // ghost-node elimination, second order, all nodes
  const int n = g.n_nodes();
  tridiag k = tridiag::zero(n);
  for (int i = 0; i < n; ++i) {
    k.di[i] = 2.0 * w;
    if (i > 0) k.lo[i] = -w;
    if (i + 1 < n) k.up[i] = -w;
  }
  k.up[0] = -2.0 * w;
  k.lo[n - 1] = -2.0 * w;
  if (bc.kind == bc_kind::robin) {
    k.di[0] += 2.0 * bc.robin_alpha[0] / h;
    k.di[n - 1] += 2.0 * bc.robin_alpha[1] / h;
  }
  return k;
}

/// Smallest M-eigenvalue of an M-self-adjoint operator via inverse power
/// iteration on a cached factorization.
inline double min_eigenvalue(const tridiag& a, const tridiag_lu& lu, const vec& m) {
  const int n = a.n();
  vec y(n);
  for (int i = 0; i < n; ++i) y[i] = 1.0 + 0.37 * std::sin(2.1 * i + 0.4);
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    y = lu.solve(y);
    double nn = 0.0;
    for (int i = 0; i < n; ++i) nn += m[i] * y[i] * y[i];
    nn = std::sqrt(nn);
    if (nn < 1e-300) throw solver_error("min_eigenvalue: iteration collapsed");
    for (double& v : y) v /= nn;
    const vec ay = a.apply(y);
    double num = 0.0;
    for (int i = 0; i < n; ++i) num += m[i] * y[i] * ay[i];
    if (it > 20 && std::abs(num - lambda) <= 1e-13 * std::abs(num)) return num;
    lambda = num;
  }
  return lambda;
}

}  // namespace detail

inline discrete_triple build_triple(const space_grid_1d& grid, const boundary_condition& bc,
                                    triple_kind kind) {
  if (grid.n_cells < 3) throw config_error("build_triple: need n_cells >= 3");
  const bool dirichlet_kind =
      kind == triple_kind::l2_pivot || kind == triple_kind::hminus1_pivot;
  if (dirichlet_kind && bc.kind != bc_kind::dirichlet)
    throw config_error(std::string("build_triple: ") + to_string(kind) +
                       " requires a Dirichlet boundary condition");
  if (kind == triple_kind::h1dual_pivot && bc.kind == bc_kind::dirichlet)
    throw config_error("build_triple: h1dual_pivot requires Neumann or Robin conditions");

  discrete_triple t;
  t.grid = grid;
  t.bc = bc;
  t.kind = kind;
  t.interior_only = (bc.kind == bc_kind::dirichlet);
  t.n_dof = t.interior_only ? grid.n_interior() : grid.n_nodes();
  t.mass.assign(t.n_dof, grid.h());
  if (!t.interior_only) {
    t.mass.front() = grid.h() / 2.0;
    t.mass.back() = grid.h() / 2.0;
  }
  t.stiffness = detail::assemble_stiffness(grid, bc);

  if (bc.kind == bc_kind::robin) {
    // positivity of the weighted H1 form; degenerate alpha must fail loudly
    vec sym = t.stiffness.dense();
    const int n = t.n_dof;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        sym[static_cast<std::size_t>(i) * n + j] *=
            std::sqrt(t.mass[i]) / std::sqrt(t.mass[j]);
    const eig_result e = jacobi_eigs(std::move(sym), n);
    if (e.values.front() <= 1e-10 * std::max(1.0, e.values.back()))
      throw config_error(
          "build_triple: Robin weighted H1 form is not positive definite "
          "(smallest eigenvalue " + std::to_string(e.values.front()) +
          "); adjust the alpha weights");
  }

  // the Neumann stiffness has the constant kernel; its solves are never
  // needed (the Riesz operator carries the +identity shift)
  const bool stiffness_invertible = bc.kind != bc_kind::neumann;
  if (stiffness_invertible) t.stiff_lu_.emplace(t.stiffness);

  switch (kind) {
    case triple_kind::l2_pivot:
      t.riesz = tridiag::identity(t.n_dof);
      t.riesz_is_identity = true;
      t.riesz_lu_.emplace(t.riesz);
      break;
    case triple_kind::hminus1_pivot:
      t.riesz = t.stiffness;
      t.riesz_lu_.emplace(t.riesz);
      break;
    case triple_kind::h1dual_pivot:
      t.riesz = t.stiffness;
      if (bc.kind == bc_kind::neumann) t.riesz.add_scaled_identity(1.0);
      t.riesz_lu_.emplace(t.riesz);
      break;
  }

  t.stiff_eig_min =
      stiffness_invertible ? detail::min_eigenvalue(t.stiffness, *t.stiff_lu_, t.mass) : 0.0;
  t.riesz_eig_min = t.riesz_is_identity
                        ? 1.0
                        : detail::min_eigenvalue(t.riesz, *t.riesz_lu_, t.mass);
  t.c_embed = (kind == triple_kind::l2_pivot)
                  ? 1.0 / std::sqrt(std::max(t.stiff_eig_min, 1e-300))
                  : 1.0 / std::sqrt(std::max(t.riesz_eig_min, 1e-300));
  return t;
}

/// Measured discrete Poincare constant: ||x||_{L2} <= C ||x||_{H01}.
inline double poincare_constant(const discrete_triple& t) {
  require(t.kind == triple_kind::l2_pivot, "poincare_constant: L2-pivot triples only");
  return t.c_embed;
}

}  // namespace spdeopt
