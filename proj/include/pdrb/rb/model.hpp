#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "pdrb/discretization.hpp"
#include "pdrb/fe/gramians.hpp"

namespace pdrb::rb {

using fe::num_regions;
using linalg::DenseMatrix;
using linalg::Vector;

/// A full FE solution pair at one parameter.
struct Snapshot {
  Parameter mu;
  fe::PrimalField u;
  fe::DualField sigma;
};

/// Offline data. Index 0 of the extended Gramians is the lifting (u_g resp.
/// σ_fg), indices 1..N the homogeneous snapshot parts u_{0,h}(μ_i), σ_{00,h}(μ_i).
struct RBModel {
  std::string problem;
  std::shared_ptr<const mesh::Mesh> mesh;
  fe::MeshStamp stamp;
  std::vector<Parameter> mus;

  std::array<DenseMatrix, num_regions> A;  // a^q(u0_i, u0_j)
  std::array<DenseMatrix, num_regions> B;  // b^q(σ00_i, σ00_j)
  Vector F0;                               // F(u0_i)
  std::array<Vector, num_regions> L;       // a^q(u_g, u0_i)
  Vector G0;                               // (σ00_i·n, g_D)_{Γ_D}
  std::array<Vector, num_regions> K;       // b^q(σ_fg, σ00_i)
  fe::Gramians gap;                        // (N+1)×(N+1), extended bases

  DenseMatrix U0;  // nv × N
  DenseMatrix S00;  // ne × N
  Vector u_g;
  Vector sigma_fg;

  [[nodiscard]] std::size_t N() const noexcept { return mus.size(); }
};

namespace detail {

inline void check_snapshot(const Discretization& disc, const Snapshot& s, std::size_t i) {
  const auto& sp = disc.spaces();
  sp.require_stamp(s.u.stamp, "primal snapshot");
  sp.require_stamp(s.sigma.stamp, "dual snapshot");
  const fe::Vector div = fe::divergence(sp, s.sigma.flux - disc.sigma_fg().flux);
  const double tol = divergence_tolerance(sp, s.sigma.flux, disc.data().f_h);
  PDRB_THROW_IF(div.lpNorm<Eigen::Infinity>() > tol, ErrorCode::infeasible_lifting,
                "build_offline: dual snapshot " + std::to_string(i) + " is not divergence-compatible with the lifting");
}

}  // namespace detail

inline RBModel build_offline(const Discretization& disc, const std::vector<Snapshot>& snaps) {
  const auto& sp = disc.spaces();
  const auto& ops = disc.ops();
  const auto n = static_cast<Eigen::Index>(snaps.size());
  RBModel m;
  m.problem = disc.problem().name;
  m.mesh = sp.mesh_ptr();
  m.stamp = sp.stamp();
  m.u_g = disc.u_g().coeffs;
  m.sigma_fg = disc.sigma_fg().flux;

  std::vector<fe::PrimalField> ue{disc.u_g()};
  std::vector<fe::DualField> se{disc.sigma_fg()};
  m.U0.resize(static_cast<Eigen::Index>(sp.num_p1()), n);
  m.S00.resize(static_cast<Eigen::Index>(sp.num_rt0()), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = snaps[static_cast<std::size_t>(i)];
    detail::check_snapshot(disc, s, static_cast<std::size_t>(i));
    m.mus.push_back(s.mu);
    m.U0.col(i) = s.u.coeffs - m.u_g;
    m.S00.col(i) = s.sigma.flux - m.sigma_fg;
    ue.push_back(fe::make_primal(sp, m.U0.col(i)));
    se.push_back(fe::DualField{sp.stamp(), m.S00.col(i), fe::divergence(sp, fe::Vector(m.S00.col(i)))});
  }
  m.gap = fe::regionwise_gramians(sp, ops, ue, se);
  for (std::size_t q = 0; q < num_regions; ++q) {
    m.A[q] = m.gap.grad[q].bottomRightCorner(n, n);
    m.B[q] = m.gap.flux[q].bottomRightCorner(n, n);
    m.L[q] = m.gap.grad[q].row(0).tail(n).transpose();
    m.K[q] = m.gap.flux[q].row(0).tail(n).transpose();
  }
  m.F0 = m.U0.transpose() * primal_load(sp, disc.data());
  m.G0 = m.S00.transpose() * dirichlet_functional(sp, disc.data());
  return m;
}

/// The model restricted to its first `n` basis functions.
inline RBModel truncate(const RBModel& m, std::size_t n) {
  PDRB_THROW_IF(n > m.N(), ErrorCode::invalid_argument, "truncate: n exceeds the basis size");
  const auto k = static_cast<Eigen::Index>(n);
  RBModel t;
  t.problem = m.problem;
  t.mesh = m.mesh;
  t.stamp = m.stamp;
  t.mus.assign(m.mus.begin(), m.mus.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t q = 0; q < num_regions; ++q) {
    t.A[q] = m.A[q].topLeftCorner(k, k);
    t.B[q] = m.B[q].topLeftCorner(k, k);
    t.L[q] = m.L[q].head(k);
    t.K[q] = m.K[q].head(k);
    t.gap.grad[q] = m.gap.grad[q].topLeftCorner(k + 1, k + 1);
    t.gap.flux[q] = m.gap.flux[q].topLeftCorner(k + 1, k + 1);
  }
  t.gap.cross = m.gap.cross.topLeftCorner(k + 1, k + 1);
  t.F0 = m.F0.head(k);
  t.G0 = m.G0.head(k);
  t.U0 = m.U0.leftCols(k);
  t.S00 = m.S00.leftCols(k);
  t.u_g = m.u_g;
  t.sigma_fg = m.sigma_fg;
  return t;
}

struct OnlineSolution {
  Vector c;
  Vector d;
  Parameter mu;
  double eta_rb = 0.0;
  double cond_primal = 1.0;  // 1/rcond of the reduced matrices
  double cond_dual = 1.0;
};

/// Floating-point operations performed by online_solve, tallied in the loops
/// themselves. Only N and the region count enter.
struct OnlineCounters {
  std::uint64_t flops = 0;
};

namespace detail {

inline Vector reduced_solve(const DenseMatrix& a, const Vector& b, double& cond, const char* which,
                            OnlineCounters* cnt) {
  const Eigen::LDLT<DenseMatrix> f(a);
  // LDLT::rcond() skips zero pivots, so the pivot spread is folded in too
  const Vector dv = f.vectorD();
  const double dmax = dv.cwiseAbs().maxCoeff();
  const double dmin = dv.minCoeff();
  const double rc = std::min(f.rcond(), dmin > 0.0 ? dmin / dmax : 0.0);
  cond = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  PDRB_THROW_IF(f.info() != Eigen::Success || !(rc > std::numeric_limits<double>::epsilon()),
                ErrorCode::singular_reduced_system,
                std::string("online_solve: ") + which + " reduced matrix is numerically singular (condition estimate " +
                    std::to_string(cond) + ")");
  // snapshot bases are not orthonormalised, so one refinement step with the
  // residual in long double recovers the digits lost to conditioning
  Vector x = f.solve(b);
  Vector r(b.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    long double s = b[i];
    for (Eigen::Index j = 0; j < a.cols(); ++j) s -= static_cast<long double>(a(i, j)) * x[j];
    r[i] = static_cast<double>(s);
  }
  x += f.solve(r);
  if (cnt) {
    const auto n = static_cast<std::uint64_t>(a.rows());
    cnt->flops += n * n * n / 3 + 6 * n * n;
  }
  return x;
}

inline long double quad_form(const DenseMatrix& g, const Vector& x, const Vector& y, OnlineCounters* cnt) {
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    long double r = 0.0L;
    for (Eigen::Index j = 0; j < g.cols(); ++j) r += static_cast<long double>(g(i, j)) * y[j];
    s += static_cast<long double>(x[i]) * r;
  }
  if (cnt) cnt->flops += 2 * static_cast<std::uint64_t>(g.rows() * g.cols() + g.rows());
  return s;
}

}  // namespace detail

/// η_rb² from extended coefficient vectors (1, c) and (1, d).
inline double reduced_gap(const RBModel& m, const Vector& c, const Vector& d, const Parameter& mu,
                          OnlineCounters* cnt = nullptr) {
  const Eigen::Index n = c.size();
  Vector ce(n + 1), de(n + 1);
  ce << 1.0, c;
  de << 1.0, d;
  const auto th = thetas(mu);
  long double s = 2.0L * detail::quad_form(m.gap.cross, ce, de, cnt);
  for (std::size_t q = 0; q < num_regions; ++q) {
    s += th.theta_a[q] * detail::quad_form(m.gap.grad[q], ce, ce, cnt);
    s += th.theta_b[q] * detail::quad_form(m.gap.flux[q], de, de, cnt);
  }
  return static_cast<double>(std::max(s, 0.0L));
}

inline OnlineSolution online_solve(const RBModel& m, const Parameter& mu, OnlineCounters* cnt = nullptr) {
  PDRB_THROW_IF(m.N() == 0, ErrorCode::invalid_argument, "online_solve: empty reduced basis");
  const auto n = static_cast<Eigen::Index>(m.N());
  const auto th = thetas(mu);
  DenseMatrix a = DenseMatrix::Zero(n, n), b = DenseMatrix::Zero(n, n);
  Vector phi = m.F0, psi = -m.G0;
  for (std::size_t q = 0; q < num_regions; ++q) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        a(i, j) += th.theta_a[q] * m.A[q](i, j);
        b(i, j) += th.theta_b[q] * m.B[q](i, j);
      }
    for (Eigen::Index i = 0; i < n; ++i) {
      phi[i] -= th.theta_a[q] * m.L[q][i];
      psi[i] -= th.theta_b[q] * m.K[q][i];
    }
    if (cnt) cnt->flops += 4 * static_cast<std::uint64_t>(n * n + n);
  }
  OnlineSolution s;
  s.mu = mu;
  s.c = detail::reduced_solve(a, phi, s.cond_primal, "primal", cnt);
  s.d = detail::reduced_solve(b, psi, s.cond_dual, "dual", cnt);
  s.eta_rb = std::sqrt(reduced_gap(m, s.c, s.d, mu, cnt));
  return s;
}

/// u_rb = u_g + Σ c_i u0_i and σ_rb = σ_fg + Σ d_i σ00_i on `sp`.
inline std::pair<fe::PrimalField, fe::DualField> reconstruct(const RBModel& m, const OnlineSolution& s,
                                                              const fe::FESpaces& sp) {
  sp.require_stamp(m.stamp, "reduced model");
  PDRB_THROW_IF(s.c.size() != static_cast<Eigen::Index>(m.N()) || s.d.size() != static_cast<Eigen::Index>(m.N()),
                ErrorCode::invalid_argument, "reconstruct: coefficient length differs from N");
  Vector u = m.u_g, sig = m.sigma_fg;
  if (m.N() > 0) {
    u += m.U0 * s.c;
    sig += m.S00 * s.d;
  }
  return {fe::make_primal(sp, std::move(u)), fe::make_dual(sp, std::move(sig))};
}

}  // namespace pdrb::rb
