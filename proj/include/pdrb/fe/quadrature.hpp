#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "pdrb/mesh/mesh.hpp"

namespace pdrb::fe {

using mesh::Point;

/// Quadrature point in barycentric coordinates with weight relative to |T|
/// (weights sum to 1).
struct QuadPoint {
  std::array<double, 3> lambda;
  double weight;
};

/// Edge-midpoint rule: exact for polynomials of degree ≤ 2, which covers
/// every product of P1 gradients, RT0 fields and P0 constants.
inline const std::vector<QuadPoint>& midpoint_rule() {
  static const std::vector<QuadPoint> q = {
      {{0.0, 0.5, 0.5}, 1.0 / 3.0}, {{0.5, 0.0, 0.5}, 1.0 / 3.0}, {{0.5, 0.5, 0.0}, 1.0 / 3.0}};
  return q;
}

/// n-point Gauss-Legendre on [0,1].
inline std::vector<std::array<double, 2>> gauss_legendre01(int n) {
  std::vector<std::array<double, 2>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    out[static_cast<std::size_t>(i)] = {0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)};
  }
  return out;
}

/// Collapsed (Duffy) tensor Gauss rule with n² points; exact to degree 2n−2.
/// Used for analytic data and true-error integrals only.
inline std::vector<QuadPoint> conical_rule(int n) {
  const auto g = gauss_legendre01(n);
  std::vector<QuadPoint> q;
  q.reserve(g.size() * g.size());
  for (const auto& [s, ws] : g)
    for (const auto& [t, wt] : g) {
      // (s, t) ↦ λ1 = s, λ2 = t(1−s); Jacobian (1−s); reference area 1/2
      const double l1 = s, l2 = t * (1.0 - s);
      q.push_back({{1.0 - l1 - l2, l1, l2}, 2.0 * ws * wt * (1.0 - s)});
    }
  return q;
}

inline const std::vector<QuadPoint>& high_order_rule() {
  static const std::vector<QuadPoint> q = conical_rule(8);
  return q;
}

inline Point map_point(const std::array<Point, 3>& c, const std::array<double, 3>& l) {
  return {l[0] * c[0].x + l[1] * c[1].x + l[2] * c[2].x, l[0] * c[0].y + l[1] * c[1].y + l[2] * c[2].y};
}

/// Gauss points on [0,1] for edge integrals.
inline const std::vector<std::array<double, 2>>& edge_rule() {
  static const auto g = gauss_legendre01(8);
  return g;
}

}  // namespace pdrb::fe
