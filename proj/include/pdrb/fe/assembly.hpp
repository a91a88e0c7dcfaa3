#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "pdrb/fe/fields.hpp"
#include "pdrb/fe/quadrature.hpp"
#include "pdrb/fe/spaces.hpp"
#include "pdrb/linalg/sparse_matrix.hpp"

namespace pdrb::fe {

using linalg::SparseMatrix;
using linalg::Triplet;

/// Coefficient regions (tag 1 → index 0, tag 2 → index 1).
inline constexpr std::size_t num_regions = 2;
inline std::size_t region_index(int tag) { return static_cast<std::size_t>(tag - 1); }

/// Parameter-independent operators with unit coefficient, split by region.
struct Operators {
  std::array<SparseMatrix, num_regions> stiffness;  // nv × nv, (∇λ_i, ∇λ_j)_{Ω_q}
  std::array<SparseMatrix, num_regions> mass;       // ne × ne, (φ_i, φ_j)_{Ω_q}
  SparseMatrix cross;                               // nv × ne, (∇λ_i, φ_e)_Ω
  SparseMatrix div;                                 // nt × ne, ∫_T ∇·φ_e = s|e|
  Vector area;                                      // per triangle
};

inline Operators build_operators(const FESpaces& sp) {
  const auto& m = sp.mesh();
  const std::size_t nv = sp.num_p1(), ne = sp.num_rt0(), nt = sp.num_p0();
  std::array<std::vector<Triplet>, num_regions> ks, ms;
  std::vector<Triplet> cs, ds;
  for (auto& k : ks) k.reserve(9 * nt);
  for (auto& k : ms) k.reserve(9 * nt);
  cs.reserve(9 * nt);
  ds.reserve(3 * nt);
  Operators ops;
  ops.area.resize(static_cast<Eigen::Index>(nt));
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = m.triangles()[t];
    const auto c = sp.corners(t);
    const auto& s = sp.tri_signs(t);
    const auto& e = sp.tri_edges(t);
    const std::size_t q = region_index(tri.region);
    const auto kl = local_p1_stiffness(c, 1.0);
    const auto ml = local_rt0_mass(c, s, 1.0);
    const auto xl = local_cross(c, s);
    const double area = mesh::signed_area(c[0], c[1], c[2]);
    ops.area[static_cast<Eigen::Index>(t)] = area;
    const auto dl = local_div(c, s);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        ks[q].push_back({tri.v[i], tri.v[j], kl[i][j]});
        ms[q].push_back({e[i], e[j], ml[i][j]});
        cs.push_back({tri.v[i], e[j], xl[i][j]});
      }
      ds.push_back({t, e[i], dl[i] * area});
    }
  }
  for (std::size_t q = 0; q < num_regions; ++q) {
    ops.stiffness[q] = SparseMatrix::from_triplets(nv, nv, std::move(ks[q]));
    ops.mass[q] = SparseMatrix::from_triplets(ne, ne, std::move(ms[q]));
  }
  ops.cross = SparseMatrix::from_triplets(nv, ne, std::move(cs));
  ops.div = SparseMatrix::from_triplets(nt, ne, std::move(ds));
  return ops;
}

/// Σ_q w_q · blocks_q.
inline SparseMatrix combine(const std::array<SparseMatrix, num_regions>& blocks, const std::array<double, num_regions>& w) {
  std::array<const SparseMatrix*, num_regions> ptr{};
  for (std::size_t q = 0; q < num_regions; ++q) ptr[q] = &blocks[q];
  return linalg::linear_combination(w, ptr);
}

/// Stiffness with the coefficient applied per element during assembly. Used
/// to cross-check the affine split.
inline SparseMatrix assemble_stiffness_direct(const FESpaces& sp, const std::array<double, num_regions>& alpha) {
  std::vector<Triplet> t;
  t.reserve(9 * sp.num_p0());
  for (std::size_t k = 0; k < sp.num_p0(); ++k) {
    const auto& tri = sp.mesh().triangles()[k];
    const auto kl = local_p1_stiffness(sp.corners(k), alpha[region_index(tri.region)]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t.push_back({tri.v[i], tri.v[j], kl[i][j]});
  }
  return SparseMatrix::from_triplets(sp.num_p1(), sp.num_p1(), std::move(t));
}

using ScalarFunction = std::function<double(double, double)>;

/// Element averages of f (high-order rule).
inline Vector p0_project(const FESpaces& sp, const ScalarFunction& f) {
  Vector out(static_cast<Eigen::Index>(sp.num_p0()));
  const auto& rule = high_order_rule();
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const auto c = sp.corners(t);
    long double s = 0.0L, w = 0.0L;
    for (const auto& q : rule) {
      const Point x = map_point(c, q.lambda);
      s += static_cast<long double>(q.weight) * f(x.x, x.y);
      w += q.weight;
    }
    // normalise by the summed weights so constants are reproduced exactly
    out[static_cast<Eigen::Index>(t)] = static_cast<double>(s / w);
  }
  return out;
}

/// Nodal interpolation.
inline Vector p1_interpolate(const FESpaces& sp, const ScalarFunction& f) {
  Vector out(static_cast<Eigen::Index>(sp.num_p1()));
  for (std::size_t v = 0; v < sp.num_p1(); ++v) {
    const auto& p = sp.mesh().vertices()[v];
    out[static_cast<Eigen::Index>(v)] = f(p.x, p.y);
  }
  return out;
}

/// Mean of f over edge e.
inline double edge_average(const FESpaces& sp, std::size_t e, const ScalarFunction& f) {
  const auto& p = sp.mesh().vertices()[sp.edge(e)[0]];
  const auto& q = sp.mesh().vertices()[sp.edge(e)[1]];
  long double s = 0.0L;
  for (const auto& [t, w] : edge_rule()) s += static_cast<long double>(w) * f(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
  return static_cast<double>(s);
}

/// h_T/π · ‖f − f_h‖_{0,T} per element: the data-oscillation term, kept
/// apart from the estimator.
inline Vector data_oscillation(const FESpaces& sp, const ScalarFunction& f, const Vector& f_h) {
  Vector out(static_cast<Eigen::Index>(sp.num_p0()));
  const auto& rule = high_order_rule();
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const auto c = sp.corners(t);
    const double area = mesh::signed_area(c[0], c[1], c[2]);
    double h = 0.0;
    for (int k = 0; k < 3; ++k) h = std::max(h, edge_length(c, k));
    long double s = 0.0L;
    for (const auto& q : rule) {
      const Point x = map_point(c, q.lambda);
      const double d = f(x.x, x.y) - f_h[static_cast<Eigen::Index>(t)];
      s += static_cast<long double>(q.weight) * d * d;
    }
    out[static_cast<Eigen::Index>(t)] = h / std::numbers::pi * std::sqrt(static_cast<double>(s) * area);
  }
  return out;
}

}  // namespace pdrb::fe
