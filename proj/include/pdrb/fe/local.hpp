#pragma once

#include <array>
#include <cmath>

#include "pdrb/errors.hpp"
#include "pdrb/fe/quadrature.hpp"
#include "pdrb/mesh/mesh.hpp"

namespace pdrb::fe {

using Corners = std::array<Point, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec2 = std::array<double, 2>;

/// Sign of each local RT0 basis function: +1 when the global edge normal
/// (tangent low→high vertex index, rotated clockwise) points out of T.
using Signs = std::array<int, 3>;

inline double checked_area(const Corners& c) {
  const double a = mesh::signed_area(c[0], c[1], c[2]);
  PDRB_THROW_IF(!(a > 0.0), ErrorCode::invalid_argument, "degenerate or clockwise triangle");
  return a;
}

/// Local edge k is opposite vertex k.
inline double edge_length(const Corners& c, int k) {
  const auto& a = c[(k + 1) % 3];
  const auto& b = c[(k + 2) % 3];
  return std::hypot(b.x - a.x, b.y - a.y);
}

/// Constant gradients of the three hat functions.
inline std::array<Vec2, 3> p1_gradients(const Corners& c) {
  const double two_area = 2.0 * checked_area(c);
  std::array<Vec2, 3> g{};
  for (int k = 0; k < 3; ++k) {
    const auto& a = c[(k + 1) % 3];
    const auto& b = c[(k + 2) % 3];
    g[k] = {(a.y - b.y) / two_area, (b.x - a.x) / two_area};
  }
  return g;
}

inline Mat3 local_p1_stiffness(const Corners& c, double alpha) {
  const double area = checked_area(c);
  const auto g = p1_gradients(c);
  Mat3 k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = alpha * area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
  return k;
}

/// φ_k(x) = s_k |e_k| / (2|T|) · (x − P_k); normal component s_k on edge k.
inline Vec2 rt0_basis(const Corners& c, const Signs& s, int k, const Point& x) {
  const double scale = s[k] * edge_length(c, k) / (2.0 * checked_area(c));
  return {scale * (x.x - c[k].x), scale * (x.y - c[k].y)};
}

inline Mat3 local_rt0_mass(const Corners& c, const Signs& s, double alpha_inv) {
  const double area = checked_area(c);
  Mat3 m{};
  for (const auto& q : midpoint_rule()) {
    const Point x = map_point(c, q.lambda);
    std::array<Vec2, 3> phi;
    for (int k = 0; k < 3; ++k) phi[k] = rt0_basis(c, s, k, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] += alpha_inv * q.weight * area * (phi[i][0] * phi[j][0] + phi[i][1] * phi[j][1]);
  }
  // symmetric by construction up to summation order; make it exact
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < i; ++j) m[j][i] = m[i][j];
  return m;
}

/// Elementwise divergence of each unit-coefficient basis function: s_k|e_k|/|T|.
inline std::array<double, 3> local_div(const Corners& c, const Signs& s) {
  const double area = checked_area(c);
  return {s[0] * edge_length(c, 0) / area, s[1] * edge_length(c, 1) / area, s[2] * edge_length(c, 2) / area};
}

/// ∫_T φ_k = s_k|e_k|/2 · (x_c − P_k).
inline std::array<Vec2, 3> rt0_integrals(const Corners& c, const Signs& s) {
  const double xc = (c[0].x + c[1].x + c[2].x) / 3.0;
  const double yc = (c[0].y + c[1].y + c[2].y) / 3.0;
  std::array<Vec2, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const double h = 0.5 * s[k] * edge_length(c, k);
    out[k] = {h * (xc - c[k].x), h * (yc - c[k].y)};
  }
  return out;
}

/// (∇λ_i, φ_k)_T for the P1–RT0 cross block.
inline Mat3 local_cross(const Corners& c, const Signs& s) {
  const auto g = p1_gradients(c);
  const auto in = rt0_integrals(c, s);
  Mat3 x{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) x[i][k] = g[i][0] * in[k][0] + g[i][1] * in[k][1];
  return x;
}

}  // namespace pdrb::fe
