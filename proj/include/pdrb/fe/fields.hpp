#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "pdrb/fe/spaces.hpp"
#include "pdrb/linalg/sparse_matrix.hpp"

namespace pdrb::fe {

using linalg::Vector;

/// P1 coefficients per vertex, Dirichlet values included.
struct PrimalField {
  MeshStamp stamp;
  Vector coeffs;
};

/// RT0 normal-component coefficients per edge plus the elementwise divergence.
struct DualField {
  MeshStamp stamp;
  Vector flux;
  Vector div;
};

/// Elementwise divergence assembled from local_div.
inline Vector divergence(const FESpaces& sp, const Vector& flux) {
  PDRB_THROW_IF(static_cast<std::size_t>(flux.size()) != sp.num_rt0(), ErrorCode::invalid_argument,
                "divergence: flux size does not match RT0 space");
  Vector d(static_cast<Eigen::Index>(sp.num_p0()));
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const auto ld = local_div(sp.corners(t), sp.tri_signs(t));
    const auto& e = sp.tri_edges(t);
    long double s = 0.0L;
    for (int k = 0; k < 3; ++k) s += static_cast<long double>(ld[k]) * flux[static_cast<Eigen::Index>(e[k])];
    d[static_cast<Eigen::Index>(t)] = static_cast<double>(s);
  }
  return d;
}

inline Vector divergence(const FESpaces& sp, const DualField& f) {
  sp.require_stamp(f.stamp, "dual field");
  return divergence(sp, f.flux);
}

inline PrimalField make_primal(const FESpaces& sp, Vector coeffs) {
  PDRB_THROW_IF(static_cast<std::size_t>(coeffs.size()) != sp.num_p1(), ErrorCode::invalid_argument,
                "primal field size does not match P1 space");
  return {sp.stamp(), std::move(coeffs)};
}

inline DualField make_dual(const FESpaces& sp, Vector flux) {
  Vector d = divergence(sp, flux);
  return {sp.stamp(), std::move(flux), std::move(d)};
}

inline PrimalField zero_primal(const FESpaces& sp) { return make_primal(sp, Vector::Zero(static_cast<Eigen::Index>(sp.num_p1()))); }
inline DualField zero_dual(const FESpaces& sp) { return make_dual(sp, Vector::Zero(static_cast<Eigen::Index>(sp.num_rt0()))); }

/// Field arithmetic on a shared mesh.
inline PrimalField axpy(double a, const PrimalField& x, const PrimalField& y) {
  PDRB_THROW_IF(!(x.stamp == y.stamp), ErrorCode::generation_mismatch, "axpy: primal fields on different meshes");
  return {y.stamp, a * x.coeffs + y.coeffs};
}

inline DualField axpy(double a, const DualField& x, const DualField& y) {
  PDRB_THROW_IF(!(x.stamp == y.stamp), ErrorCode::generation_mismatch, "axpy: dual fields on different meshes");
  return {y.stamp, a * x.flux + y.flux, a * x.div + y.div};
}

}  // namespace pdrb::fe
