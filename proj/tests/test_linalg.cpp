#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "spdeopt/linalg.hpp"

using namespace spdeopt;

namespace {

tridiag random_dominant(int n, std::mt19937_64& eng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  tridiag a = tridiag::zero(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) a.lo[i] = uni(eng);
    if (i + 1 < n) a.up[i] = uni(eng);
    a.di[i] = 3.0 + uni(eng);
  }
  return a;
}

}  // namespace

TEST_CASE("thomas solve agrees with dense elimination") {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial;
    const tridiag a = random_dominant(n, eng);
    vec b(n);
    for (double& x : b) x = uni(eng);
    const vec x1 = tridiag_lu(a).solve(b);
    const vec x2 = solve_dense(a.dense(), b);
    for (int i = 0; i < n; ++i) REQUIRE(x1[i] == Catch::Approx(x2[i]).margin(1e-12));
    const vec back = a.apply(x1);
    for (int i = 0; i < n; ++i) REQUIRE(back[i] == Catch::Approx(b[i]).margin(1e-11));
  }
}

TEST_CASE("weighted transpose is the adjoint for the weighted inner product") {
  std::mt19937_64 eng(2);
  std::uniform_real_distribution<double> uni(0.5, 2.0);
  const int n = 12;
  const tridiag a = random_dominant(n, eng);
  vec m(n);
  for (double& w : m) w = uni(eng);
  const tridiag at = a.weighted_transpose(m);
  std::uniform_real_distribution<double> su(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    vec x(n), y(n);
    for (double& v : x) v = su(eng);
    for (double& v : y) v = su(eng);
    double lhs = 0.0, rhs = 0.0;
    const vec ax = a.apply(x);
    const vec aty = at.apply(y);
    for (int i = 0; i < n; ++i) {
      lhs += m[i] * ax[i] * y[i];
      rhs += m[i] * x[i] * aty[i];
    }
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-12).margin(1e-13));
  }
}

TEST_CASE("jacobi eigensolver reproduces the second-difference spectrum") {
  const int n = 17;
  tridiag a = tridiag::zero(n);
  for (int i = 0; i < n; ++i) {
    a.di[i] = 2.0;
    if (i > 0) a.lo[i] = -1.0;
    if (i + 1 < n) a.up[i] = -1.0;
  }
  const eig_result e = jacobi_eigs(a.dense(), n);
  for (int k = 1; k <= n; ++k) {
    const double exact = 2.0 - 2.0 * std::cos(k * std::numbers::pi / (n + 1));
    REQUIRE(e.values[k - 1] == Catch::Approx(exact).epsilon(1e-12));
  }
  // orthonormal, and each pair satisfies A v = lambda v
  for (int k = 0; k < n; ++k) {
    const vec av = a.apply(e.vectors[k]);
    for (int i = 0; i < n; ++i)
      REQUIRE(av[i] == Catch::Approx(e.values[k] * e.vectors[k][i]).margin(1e-11));
    for (int l = k; l < n; ++l) {
      const double d = dot(e.vectors[k], e.vectors[l]);
      REQUIRE(d == Catch::Approx(k == l ? 1.0 : 0.0).margin(1e-12));
    }
  }
}

TEST_CASE("cholesky solve matches dense elimination on SPD systems") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int n = 9;
  vec g(n * n, 0.0);
  for (int r = 0; r < 3 * n; ++r) {
    vec row(n);
    for (double& v : row) v = uni(eng);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g[i * n + j] += row[i] * row[j];
  }
  for (int i = 0; i < n; ++i) g[i * n + i] += 0.1;
  vec b(n);
  for (double& v : b) v = uni(eng);
  const vec xd = solve_dense(g, b);
  vec chol = g;
  cholesky_factor(chol, n);
  const vec xc = cholesky_solve(chol, n, b);
  for (int i = 0; i < n; ++i) REQUIRE(xc[i] == Catch::Approx(xd[i]).margin(1e-10));
}

TEST_CASE("cholesky rejects indefinite matrices") {
  vec a = {1.0, 2.0, 2.0, 1.0};  // eigenvalues 3, -1
  REQUIRE_THROWS_AS(cholesky_factor(a, 2), solver_error);
}

TEST_CASE("log-log slope recovers exact power laws") {
  vec x = {1e-1, 1e-2, 1e-3, 1e-4};
  vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.7 * std::pow(x[i], 2.0);
  REQUIRE(log_log_slope(x, y) == Catch::Approx(2.0).epsilon(1e-12));
}
