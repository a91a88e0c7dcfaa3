#pragma once

// Test-side oracles. Nothing here calls into the library's solvers or
// quadrature; each routine is an independent reimplementation.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

/// Gauss-Jordan with full pivoting, long double throughout.
inline std::vector<double> solve_dense(Dense a, std::vector<double> b) {
  const std::size_t n = a.size();
  std::vector<std::vector<long double>> m(n, std::vector<long double>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
    m[i][n] = b[i];
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < n; ++j) perm[j] = j;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    long double best = 0;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::fabs(m[i][j]) > best) best = std::fabs(m[i][j]), pr = i, pc = j;
    std::swap(m[k], m[pr]);
    for (std::size_t i = 0; i < n; ++i) std::swap(m[i][k], m[i][pc]);
    std::swap(perm[k], perm[pc]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const long double f = m[i][k] / m[k][k];
      if (f == 0) continue;
      for (std::size_t j = k; j <= n; ++j) m[i][j] -= f * m[k][j];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[perm[k]] = static_cast<double>(m[k][n] / m[k][k]);
  return x;
}

/// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  /// Q·Qᵀ + I with Q a random sparse matrix.
  Dense spd(std::size_t n, double density = 0.3) {
    Dense q(n, std::vector<double>(n, 0.0));
    for (auto& row : q)
      for (auto& v : row)
        if (uniform(0, 1) < density) v = uniform(-1, 1);
    Dense a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t k = 0; k < n; ++k) s += q[i][k] * q[j][k];
        a[i][j] = s;
      }
    for (std::size_t i = 0; i < n; ++i) a[i][i] += 1.0;
    return a;
  }

 private:
  std::mt19937_64 rng_;
};

/// Dunavant 7-point rule on the reference triangle, degree 5. Weights sum to 1.
struct Dunavant7 {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> w;
  Dunavant7() {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, b1 = 1.0 - 2.0 * a1;
    const double a2 = (6.0 + s15) / 21.0, b2 = 1.0 - 2.0 * a2;
    const double w1 = (155.0 - s15) / 1200.0, w2 = (155.0 + s15) / 1200.0;
    bary = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1},
            {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}};
    w = {9.0 / 40, w1, w1, w1, w2, w2, w2};
  }
};

/// ∫_T f over triangle (p0,p1,p2) with Dunavant-7 on each of 4^k subtriangles.
template <class F>
long double integrate(const std::array<std::array<double, 2>, 3>& p, F&& f, int depth = 0) {
  if (depth > 0) {
    const auto m = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
      return std::array<double, 2>{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    };
    const auto m01 = m(p[0], p[1]), m12 = m(p[1], p[2]), m20 = m(p[2], p[0]);
    return integrate({p[0], m01, m20}, f, depth - 1) + integrate({m01, p[1], m12}, f, depth - 1) +
           integrate({m20, m12, p[2]}, f, depth - 1) + integrate({m12, m20, m01}, f, depth - 1);
  }
  static const Dunavant7 q;
  const double area = 0.5 * std::fabs((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) -
                                      (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]));
  long double s = 0;
  for (std::size_t i = 0; i < q.w.size(); ++i) {
    const double x = q.bary[i][0] * p[0][0] + q.bary[i][1] * p[1][0] + q.bary[i][2] * p[2][0];
    const double y = q.bary[i][0] * p[0][1] + q.bary[i][1] * p[1][1] + q.bary[i][2] * p[2][1];
    s += q.w[i] * static_cast<long double>(f(x, y));
  }
  return s * area;
}

using P = std::array<double, 2>;
using Tri = std::array<P, 3>;

// Hat function gradients from the 3×3 interpolation system.
inline std::array<P, 3> oracle_gradients(const Tri& t) {
  oracle::Dense v = {{1, t[0][0], t[0][1]}, {1, t[1][0], t[1][1]}, {1, t[2][0], t[2][1]}};
  std::array<P, 3> g;
  for (int i = 0; i < 3; ++i) {
    std::vector<double> rhs(3, 0.0);
    rhs[i] = 1.0;
    const auto c = oracle::solve_dense(v, rhs);
    g[i] = {c[1], c[2]};
  }
  return g;
}

// RT0 function a + b·x with prescribed normal components n_out·s on each edge:
// solve for (a0, a1, b) from the three normal conditions at edge midpoints.
struct OracleRt {
  std::array<std::array<double, 3>, 3> coef;  // per basis k: a0, a1, b
  OracleRt(const Tri& t, const std::array<int, 3>& s) {
    oracle::Dense m(3, std::vector<double>(3));
    std::array<P, 3> n;
    std::array<P, 3> mid;
    for (int j = 0; j < 3; ++j) {
      const auto& a = t[(j + 1) % 3];
      const auto& b = t[(j + 2) % 3];
      const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
      n[j] = {(b[1] - a[1]) / len, -(b[0] - a[0]) / len};
      mid[j] = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
      m[j] = {n[j][0], n[j][1], mid[j][0] * n[j][0] + mid[j][1] * n[j][1]};
    }
    for (int k = 0; k < 3; ++k) {
      std::vector<double> rhs(3, 0.0);
      rhs[k] = s[k];
      const auto c = oracle::solve_dense(m, rhs);
      coef[k] = {c[0], c[1], c[2]};
    }
  }
  P eval(int k, double x, double y) const { return {coef[k][0] + coef[k][2] * x, coef[k][1] + coef[k][2] * y}; }
};


}  // namespace oracle
