#pragma once

#include <algorithm>
#include <numeric>

#include "base.hpp"

namespace spdeopt {

/// Tridiagonal matrix, row i = (lo[i], di[i], up[i]); lo[0], up[n-1] unused.
struct tridiag {
  vec lo, di, up;

  int n() const { return static_cast<int>(di.size()); }

  static tridiag zero(int n) {
    tridiag t;
    t.lo.assign(n, 0.0);
    t.di.assign(n, 0.0);
    t.up.assign(n, 0.0);
    return t;
  }

  static tridiag identity(int n) {
    tridiag t = zero(n);
    std::fill(t.di.begin(), t.di.end(), 1.0);
    return t;
  }

  vec apply(const vec& x) const {
    const int m = n();
    require(static_cast<int>(x.size()) == m, "tridiag::apply: size mismatch");
    vec y(m);
    for (int i = 0; i < m; ++i) {
      double s = di[i] * x[i];
      if (i > 0) s += lo[i] * x[i - 1];
      if (i + 1 < m) s += up[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  /// M^{-1} A^T M for a diagonal weight m: the adjoint w.r.t. (x,y)_m.
  tridiag weighted_transpose(const vec& m) const {
    const int k = n();
    require(static_cast<int>(m.size()) == k, "weighted_transpose: size mismatch");
    tridiag t = zero(k);
    for (int i = 0; i < k; ++i) {
      t.di[i] = di[i];
      if (i > 0) t.lo[i] = up[i - 1] * m[i - 1] / m[i];
      if (i + 1 < k) t.up[i] = lo[i + 1] * m[i + 1] / m[i];
    }
    return t;
  }

  void add_scaled_identity(double a) {
    for (double& d : di) d += a;
  }

  void scale(double a) {
    for (double& v : lo) v *= a;
    for (double& v : di) v *= a;
    for (double& v : up) v *= a;
  }

  tridiag scaled_by(double a) const {
    tridiag t(*this);
    t.scale(a);
    return t;
  }

  /// A * diag(w): scales column j by w[j].
  tridiag times_diag(const vec& w) const {
    const int k = n();
    require(static_cast<int>(w.size()) == k, "times_diag: size mismatch");
    tridiag t = zero(k);
    for (int i = 0; i < k; ++i) {
      t.di[i] = di[i] * w[i];
      if (i > 0) t.lo[i] = lo[i] * w[i - 1];
      if (i + 1 < k) t.up[i] = up[i] * w[i + 1];
    }
    return t;
  }

  vec dense() const {
    const int k = n();
    vec a(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
      a[static_cast<std::size_t>(i) * k + i] = di[i];
      if (i > 0) a[static_cast<std::size_t>(i) * k + i - 1] = lo[i];
      if (i + 1 < k) a[static_cast<std::size_t>(i) * k + i + 1] = up[i];
    }
    return a;
  }
};

/// Thomas factorization, no pivoting. Callers pass column-dominant or
/// SPD-like systems (all stiffness and implicit-step matrices here are).
class tridiag_lu {
 public:
  explicit tridiag_lu(const tridiag& a) : l_(a.n()), d_(a.n()), u_(a.up) {
    const int n = a.n();
    require(n > 0, "tridiag_lu: empty system");
    d_[0] = a.di[0];
    if (std::abs(d_[0]) < 1e-300) throw solver_error("tridiag_lu: zero pivot at row 0");
    for (int i = 1; i < n; ++i) {
      l_[i] = a.lo[i] / d_[i - 1];
      d_[i] = a.di[i] - l_[i] * a.up[i - 1];
      if (std::abs(d_[i]) < 1e-300)
        throw solver_error("tridiag_lu: zero pivot at row " + std::to_string(i));
    }
  }

  vec solve(const vec& b) const {
    const int n = static_cast<int>(d_.size());
    require(static_cast<int>(b.size()) == n, "tridiag_lu::solve: size mismatch");
    vec x(b);
    for (int i = 1; i < n; ++i) x[i] -= l_[i] * x[i - 1];
    x[n - 1] /= d_[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (x[i] - u_[i] * x[i + 1]) / d_[i];
    return x;
  }

 private:
  vec l_, d_, u_;
};

/// Dense solve (row-major flat a, square), Gaussian elimination with
/// partial pivoting. Consumes its arguments.
inline vec solve_dense(vec a, vec b) {
  const int n = static_cast<int>(b.size());
  require(static_cast<int>(a.size()) == static_cast<std::size_t>(n) * n,
          "solve_dense: dimension mismatch");
  for (int i = 0; i < n; ++i) {
    int piv = i;
    double best = std::abs(a[static_cast<std::size_t>(i) * n + i]);
    for (int r = i + 1; r < n; ++r) {
      const double v = std::abs(a[static_cast<std::size_t>(r) * n + i]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300) throw solver_error("solve_dense: singular matrix");
    if (piv != i) {
      for (int c = 0; c < n; ++c)
        std::swap(a[static_cast<std::size_t>(i) * n + c], a[static_cast<std::size_t>(piv) * n + c]);
      std::swap(b[i], b[piv]);
    }
    const double p = a[static_cast<std::size_t>(i) * n + i];
    for (int r = i + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r) * n + i] / p;
      if (f == 0.0) continue;
      for (int c = i; c < n; ++c)
        a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(i) * n + c];
      b[r] -= f * b[i];
    }
  }
  vec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int c = i + 1; c < n; ++c) s -= a[static_cast<std::size_t>(i) * n + c] * x[c];
    x[i] = s / a[static_cast<std::size_t>(i) * n + i];
  }
  return x;
}

/// In-place lower Cholesky of a flat row-major SPD matrix.
inline void cholesky_factor(vec& a, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[static_cast<std::size_t>(j) * n + j];
    for (int k = 0; k < j; ++k) {
      const double l = a[static_cast<std::size_t>(j) * n + k];
      d -= l * l;
    }
    if (d <= 0.0) throw solver_error("cholesky_factor: matrix not positive definite at pivot " +
                                     std::to_string(j));
    const double dj = std::sqrt(d);
    a[static_cast<std::size_t>(j) * n + j] = dj;
    for (int i = j + 1; i < n; ++i) {
      double s = a[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k)
        s -= a[static_cast<std::size_t>(i) * n + k] * a[static_cast<std::size_t>(j) * n + k];
      a[static_cast<std::size_t>(i) * n + j] = s / dj;
    }
  }
}

inline vec cholesky_solve(const vec& chol, int n, vec b) {
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= chol[static_cast<std::size_t>(i) * n + k] * b[k];
    b[i] = s / chol[static_cast<std::size_t>(i) * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= chol[static_cast<std::size_t>(k) * n + i] * b[k];
    b[i] = s / chol[static_cast<std::size_t>(i) * n + i];
  }
  return b;
}

struct eig_result {
  vec values;                    // ascending
  std::vector<vec> vectors;     // vectors[k] pairs with values[k]
};

/// Cyclic Jacobi for a dense symmetric matrix (flat row-major). Desk-scale
/// dimensions only; accuracy ~1e-14 * ||A||.
inline eig_result jacobi_eigs(vec a, int n, int max_sweeps = 64) {
  require(static_cast<int>(a.size()) == static_cast<std::size_t>(n) * n, "jacobi_eigs: bad shape");
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  vec v(static_cast<std::size_t>(n) * n, 0.0);  // accumulated rotations, row-major
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
  auto vat = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i) * n + j]; };

  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);
  const double tol = 1e-15 * std::max(fro, 1e-300);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += 2.0 * at(i, j) * at(i, j);
    if (std::sqrt(off) < tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < tol / n) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vat(k, p), vkq = vat(k, q);
          vat(k, p) = c * vkp - s * vkq;
          vat(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return at(i, i) < at(j, j); });

  eig_result r;
  r.values.resize(n);
  r.vectors.resize(n);
  for (int k = 0; k < n; ++k) {
    const int col = order[k];
    r.values[k] = at(col, col);
    vec& w = r.vectors[k];
    w.resize(n);
    for (int i = 0; i < n; ++i) w[i] = vat(i, col);
    // deterministic sign: largest-magnitude entry made positive
    int imax = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(w[i]) > std::abs(w[imax])) imax = i;
    if (w[imax] < 0.0)
      for (double& x : w) x = -x;
  }
  return r;
}

}  // namespace spdeopt
