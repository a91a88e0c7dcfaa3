#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <utility>

#include "pdrb/fe/assembly.hpp"
#include "pdrb/fe/fields.hpp"
#include "pdrb/linalg/solvers.hpp"
#include "pdrb/primal.hpp"
#include "pdrb/problem.hpp"

namespace pdrb {

inline linalg::SparseMatrix dual_matrix(const fe::Operators& ops, const Parameter& mu) {
  return fe::combine(ops.mass, thetas(mu).theta_b);
}

/// G0_e = (φ_e·n, g_D)_{Γ_D} with the P1 interpolant of g_D.
inline fe::Vector dirichlet_functional(const fe::FESpaces& sp, const DiscreteData& d) {
  sp.require_stamp(d.stamp, "problem data");
  fe::Vector g = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_rt0()));
  for (std::size_t e = 0; e < sp.num_rt0(); ++e) {
    if (sp.edge_kind(e) != fe::EdgeKind::dirichlet) continue;
    const double ga = d.g_D[static_cast<Eigen::Index>(sp.edge(e)[0])];
    const double gb = d.g_D[static_cast<Eigen::Index>(sp.edge(e)[1])];
    g[static_cast<Eigen::Index>(e)] = sp.outward_sign(e) * sp.edge_length(e) * 0.5 * (ga + gb);
  }
  return g;
}

/// σ_{f0} (divergence f, zero Neumann trace) and σ_{0g} (divergence 0,
/// Neumann trace g_N), both solved at dual_lifting_reference().
struct DualLifting {
  fe::DualField f0;
  fe::DualField g0;
  [[nodiscard]] fe::DualField combined() const { return fe::axpy(1.0, f0, g0); }
};

namespace detail {

/// Mixed solve with unknown fluxes on free edges: M_ff x + B_fᵀ w = rhs_f, B_f x = div_rhs.
inline fe::Vector mixed_free_solve(const fe::FESpaces& sp, const linalg::SparseMatrix& mass, const linalg::SparseMatrix& div,
                                   const fe::Vector& rhs_full, const fe::Vector& div_rhs, fe::Vector fixed,
                                   const linalg::SolverOptions& opts) {
  const auto& free = sp.free_edges();
  std::vector<std::size_t> rows(sp.num_p0());
  for (std::size_t t = 0; t < rows.size(); ++t) rows[t] = t;
  const fe::Vector r1 = rhs_full - mass.multiply(fixed);
  const fe::Vector r2 = div_rhs - div.multiply(fixed);
  const auto mff = mass.submatrix(free, free);
  const auto bf = div.submatrix(rows, free);
  const auto sol = linalg::saddle_solve(mff, bf, gather(r1, free), r2, opts);
  scatter(sol.x, free, fixed);
  return fixed;
}

}  // namespace detail

/// Coefficient for the dual lifting solves. σ_h(μ) depends on μ only through
/// μ1 − μ2, so a reference inside the box would coincide with some σ_h(μ) and
/// make that snapshot's σ_{00,h} vanish. μ1 − μ2 = 5 lies outside [−4, 4].
inline Parameter dual_lifting_reference() { return {2.5, -2.5}; }

/// `f_h` per element, `g_N` per edge in global orientation (Neumann edges only).
inline DualLifting build_dual_lifting(const fe::FESpaces& sp, const fe::Operators& ops, const fe::Vector& f_h,
                                      const fe::Vector& g_N, const linalg::SolverOptions& opts = fe_solver_options(),
                                      const Parameter& reference = dual_lifting_reference()) {
  PDRB_THROW_IF(static_cast<std::size_t>(f_h.size()) != sp.num_p0() || static_cast<std::size_t>(g_N.size()) != sp.num_rt0(),
                ErrorCode::invalid_argument, "build_dual_lifting: data size mismatch");
  for (std::size_t e = 0; e < sp.num_rt0(); ++e)
    PDRB_THROW_IF(sp.edge_kind(e) != fe::EdgeKind::neumann && g_N[static_cast<Eigen::Index>(e)] != 0.0,
                  ErrorCode::trace_not_representable, "Neumann data given on a non-Neumann edge");
  const auto mass = dual_matrix(ops, reference);
  const fe::Vector zero_e = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_rt0()));
  DualLifting out;
  if (f_h.lpNorm<Eigen::Infinity>() == 0.0) {
    out.f0 = fe::zero_dual(sp);
  } else {
    const fe::Vector rhs = f_h.cwiseProduct(ops.area);
    out.f0 = fe::make_dual(sp, detail::mixed_free_solve(sp, mass, ops.div, zero_e, rhs, zero_e, opts));
  }
  if (g_N.lpNorm<Eigen::Infinity>() == 0.0) {
    out.g0 = fe::zero_dual(sp);
  } else {
    const fe::Vector zero_t = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_p0()));
    out.g0 = fe::make_dual(sp, detail::mixed_free_solve(sp, mass, ops.div, zero_e, zero_t, g_N, opts));
  }
  return out;
}

inline DualLifting build_dual_lifting(const fe::FESpaces& sp, const fe::Operators& ops, const DiscreteData& d,
                                      const linalg::SolverOptions& opts = fe_solver_options()) {
  sp.require_stamp(d.stamp, "problem data");
  return build_dual_lifting(sp, ops, d.f_h, d.g_N, opts);
}

/// Neumann data from a function; it must be constant on every Neumann edge
/// unless `policy` allows projection to edge means.
inline fe::Vector neumann_trace(const fe::FESpaces& sp, const fe::ScalarFunction& g,
                                TracePolicy policy = TracePolicy::require_exact) {
  fe::Vector out = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_rt0()));
  if (!g) return out;
  for (auto e : sp.neumann_edges()) {
    const double mean = fe::edge_average(sp, e, g);
    if (policy == TracePolicy::require_exact) {
      const auto& p = sp.mesh().vertices()[sp.edge(e)[0]];
      const auto& q = sp.mesh().vertices()[sp.edge(e)[1]];
      for (const auto& [t, w] : fe::edge_rule()) {
        (void)w;
        PDRB_THROW_IF(std::abs(g(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)) - mean) > 1e-12 * (1.0 + std::abs(mean)),
                      ErrorCode::trace_not_representable, "Neumann data is not constant on edge " + std::to_string(e));
      }
    }
    out[static_cast<Eigen::Index>(e)] = sp.outward_sign(e) * mean;
  }
  return out;
}

/// max_T |∇·σ − f_h| and the tolerance 1e-10·(1 + ‖f_h‖∞) used for feasibility.
/// Tolerance for max_T |∇·τ − f_h|: 1e-10·(1 + ‖f_h‖∞), widened on graded
/// meshes by the rounding floor of Σ_e |τ_e||e| / |T|, which grows like 1/h.
inline double divergence_tolerance(const fe::FESpaces& sp, const fe::Vector& flux, const fe::Vector& f_h) {
  double floor = 0.0;
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    double s = 0.0;
    for (auto e : sp.tri_edges(t)) s += std::abs(flux[static_cast<Eigen::Index>(e)]) * sp.edge_length(e);
    floor = std::max(floor, s / sp.mesh().area(t));
  }
  return 1e-10 * (1.0 + f_h.lpNorm<Eigen::Infinity>()) + 1e-12 * floor;
}

inline std::pair<double, double> feasibility_gap(const fe::FESpaces& sp, const fe::DualField& s, const fe::Vector& f_h) {
  const fe::Vector div = fe::divergence(sp, s.flux);
  return {(div - f_h).lpNorm<Eigen::Infinity>(), divergence_tolerance(sp, s.flux, f_h)};
}

/// σ_h = σ_{00,h} + σ_fg with σ_{00,h} divergence-free and vanishing on Γ_N.
inline fe::DualField solve_dual(const fe::FESpaces& sp, const fe::Operators& ops, const DiscreteData& d,
                                const Parameter& mu, const fe::DualField& sigma_fg,
                                const linalg::SolverOptions& opts = fe_solver_options()) {
  sp.require_stamp(d.stamp, "problem data");
  sp.require_stamp(sigma_fg.stamp, "dual lifting");
  {
    const auto [gap, tol] = feasibility_gap(sp, sigma_fg, d.f_h);
    PDRB_THROW_IF(gap > tol, ErrorCode::infeasible_lifting,
                  "solve_dual: lifting divergence differs from f_h by " + std::to_string(gap));
    for (auto e : sp.neumann_edges())
      PDRB_THROW_IF(std::abs(sigma_fg.flux[static_cast<Eigen::Index>(e)] - d.g_N[static_cast<Eigen::Index>(e)]) >
                        1e-12 * (1.0 + std::abs(d.g_N[static_cast<Eigen::Index>(e)])),
                    ErrorCode::infeasible_lifting, "solve_dual: lifting violates the Neumann trace");
  }
  const auto mass = dual_matrix(ops, mu);
  const fe::Vector rhs = -(mass.multiply(sigma_fg.flux) + dirichlet_functional(sp, d));
  const fe::Vector zero_e = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_rt0()));
  const fe::Vector zero_t = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_p0()));
  const fe::Vector s00 = detail::mixed_free_solve(sp, mass, ops.div, rhs, zero_t, zero_e, opts);
  fe::DualField out = fe::make_dual(sp, s00 + sigma_fg.flux);
  const auto [gap, tol] = feasibility_gap(sp, out, d.f_h);
  PDRB_THROW_IF(gap > tol, ErrorCode::non_convergence,
                "solve_dual: divergence constraint violated by " + std::to_string(gap) + " (tolerance " + std::to_string(tol) + ")");
  return out;
}

/// σ(x) on triangle t at barycentric point λ, in long double.
inline std::array<long double, 2> flux_at(const fe::FESpaces& sp, std::size_t t, const fe::Vector& flux,
                                          const std::array<double, 3>& lambda) {
  const auto c = sp.corners(t);
  const auto& s = sp.tri_signs(t);
  const auto& e = sp.tri_edges(t);
  const fe::Point x = fe::map_point(c, lambda);
  const long double area2 = 2.0L * mesh::signed_area(c[0], c[1], c[2]);
  std::array<long double, 2> out{0.0L, 0.0L};
  for (int k = 0; k < 3; ++k) {
    const long double scale = s[k] * static_cast<long double>(fe::edge_length(c, k)) / area2 *
                              flux[static_cast<Eigen::Index>(e[k])];
    out[0] += scale * (static_cast<long double>(x.x) - c[k].x);
    out[1] += scale * (static_cast<long double>(x.y) - c[k].y);
  }
  return out;
}

/// ∫_T |σ|² by the edge-midpoint rule (exact for RT0).
inline long double element_flux_norm2(const fe::FESpaces& sp, std::size_t t, const fe::Vector& flux) {
  long double s = 0.0L;
  for (const auto& q : fe::midpoint_rule()) {
    const auto v = flux_at(sp, t, flux, q.lambda);
    s += q.weight * (v[0] * v[0] + v[1] * v[1]);
  }
  return s * sp.mesh().area(t);
}

/// J^d(τ) = −½ b(τ,τ;μ) − (τ·n, g_D)_{Γ_D}, summed elementwise.
inline double dual_energy(const fe::FESpaces& sp, const DiscreteData& d, const fe::DualField& tau, const Parameter& mu) {
  sp.require_stamp(tau.stamp, "dual field");
  sp.require_stamp(d.stamp, "problem data");
  const auto th = thetas(mu);
  long double e = 0.0L;
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const long double ainv = th.theta_b[fe::region_index(sp.mesh().triangles()[t].region)];
    e -= 0.5L * ainv * element_flux_norm2(sp, t, tau.flux);
  }
  const fe::Vector g0 = dirichlet_functional(sp, d);
  for (Eigen::Index i = 0; i < g0.size(); ++i) e -= static_cast<long double>(g0[i]) * tau.flux[i];
  return static_cast<double>(e);
}

}  // namespace pdrb
