#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "pdrb/fe/assembly.hpp"
#include "pdrb/fe/fields.hpp"
#include "pdrb/linalg/solvers.hpp"
#include "pdrb/problem.hpp"

namespace pdrb {

/// FE solves default to sparse Cholesky; PCG stays available through the options.
inline linalg::SolverOptions fe_solver_options() {
  linalg::SolverOptions o;
  o.spd_method = linalg::SpdMethod::cholesky;
  return o;
}

enum class TracePolicy { require_exact, interpolate };

inline linalg::SparseMatrix primal_matrix(const fe::Operators& ops, const Parameter& mu) {
  return fe::combine(ops.stiffness, thetas(mu).theta_a);
}

/// F_i = (f_h, λ_i) − (g_N, λ_i)_{Γ_N}, so that a(u, λ_i) = F_i.
inline fe::Vector primal_load(const fe::FESpaces& sp, const DiscreteData& d) {
  sp.require_stamp(d.stamp, "problem data");
  fe::Vector f = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_p1()));
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const auto& tri = sp.mesh().triangles()[t];
    const double share = d.f_h[static_cast<Eigen::Index>(t)] * sp.mesh().area(t) / 3.0;
    for (auto v : tri.v) f[static_cast<Eigen::Index>(v)] += share;
  }
  for (auto e : sp.neumann_edges()) {
    const double out = sp.outward_sign(e) * d.g_N[static_cast<Eigen::Index>(e)];
    const double half = 0.5 * out * sp.edge_length(e);
    f[static_cast<Eigen::Index>(sp.edge(e)[0])] -= half;
    f[static_cast<Eigen::Index>(sp.edge(e)[1])] -= half;
  }
  return f;
}

namespace detail {

inline fe::Vector gather(const fe::Vector& x, const std::vector<std::size_t>& ids) {
  fe::Vector out(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) out[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(ids[i])];
  return out;
}

inline void scatter(const fe::Vector& src, const std::vector<std::size_t>& ids, fe::Vector& dst) {
  for (std::size_t i = 0; i < ids.size(); ++i) dst[static_cast<Eigen::Index>(ids[i])] = src[static_cast<Eigen::Index>(i)];
}

/// Solves K_II x_I = rhs_I − (K x)_I for the free DOFs, keeping x on the rest.
inline fe::Vector solve_free(const linalg::SparseMatrix& k, const fe::Vector& rhs, fe::Vector x,
                             const std::vector<std::size_t>& free, const linalg::SolverOptions& opts) {
  if (free.empty()) return x;
  const fe::Vector r = rhs - k.multiply(x);
  const auto kii = k.submatrix(free, free);
  const auto sol = linalg::spd_solve(kii, gather(r, free), opts);
  fe::Vector xi = gather(x, free) + sol.x;
  scatter(xi, free, x);
  return x;
}

}  // namespace detail

/// u_g: Dirichlet values on Γ_D, interior values solving the homogeneous
/// problem at μ_ref = (0,0).
inline fe::PrimalField build_primal_lifting(const fe::FESpaces& sp, const fe::Operators& ops,
                                            const fe::ScalarFunction& g_D,
                                            TracePolicy policy = TracePolicy::require_exact,
                                            const linalg::SolverOptions& opts = fe_solver_options()) {
  fe::Vector x = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_p1()));
  if (!g_D) return fe::make_primal(sp, std::move(x));
  double scale = 0.0;
  for (auto v : sp.dirichlet_vertices()) {
    const auto& p = sp.mesh().vertices()[v];
    x[static_cast<Eigen::Index>(v)] = g_D(p.x, p.y);
    scale = std::max(scale, std::abs(x[static_cast<Eigen::Index>(v)]));
  }
  if (policy == TracePolicy::require_exact) {
    for (std::size_t e = 0; e < sp.num_rt0(); ++e) {
      if (sp.edge_kind(e) != fe::EdgeKind::dirichlet) continue;
      const auto& p = sp.mesh().vertices()[sp.edge(e)[0]];
      const auto& q = sp.mesh().vertices()[sp.edge(e)[1]];
      const double ga = x[static_cast<Eigen::Index>(sp.edge(e)[0])], gb = x[static_cast<Eigen::Index>(sp.edge(e)[1])];
      for (const auto& [t, w] : fe::edge_rule()) {
        (void)w;
        const double exact = g_D(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
        PDRB_THROW_IF(std::abs(exact - ((1.0 - t) * ga + t * gb)) > 1e-12 * (1.0 + scale),
                      ErrorCode::trace_not_representable,
                      "Dirichlet data is not piecewise linear on edge " + std::to_string(e));
      }
    }
  }
  if (scale == 0.0) return fe::make_primal(sp, std::move(x));
  const auto k = primal_matrix(ops, Parameter{0.0, 0.0});
  const fe::Vector rhs = fe::Vector::Zero(x.size());
  x = detail::solve_free(k, rhs, std::move(x), sp.free_vertices(), opts);
  return fe::make_primal(sp, std::move(x));
}

/// Lifting from already-discretized nodal values (DiscreteData::g_D).
inline fe::PrimalField build_primal_lifting(const fe::FESpaces& sp, const fe::Operators& ops, const DiscreteData& d,
                                            const linalg::SolverOptions& opts = fe_solver_options()) {
  sp.require_stamp(d.stamp, "problem data");
  fe::Vector x = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_p1()));
  for (auto v : sp.dirichlet_vertices()) x[static_cast<Eigen::Index>(v)] = d.g_D[static_cast<Eigen::Index>(v)];
  if (x.lpNorm<Eigen::Infinity>() == 0.0) return fe::make_primal(sp, std::move(x));
  const auto k = primal_matrix(ops, Parameter{0.0, 0.0});
  const fe::Vector rhs = fe::Vector::Zero(x.size());
  x = detail::solve_free(k, rhs, std::move(x), sp.free_vertices(), opts);
  return fe::make_primal(sp, std::move(x));
}

/// u_h = u_{0,h} + u_g, the Galerkin solution of Σ_q θ_a^q a^q(u, v) = F(v).
inline fe::PrimalField solve_primal(const fe::FESpaces& sp, const fe::Operators& ops, const DiscreteData& d,
                                    const Parameter& mu, const std::optional<fe::PrimalField>& lifting = std::nullopt,
                                    const linalg::SolverOptions& opts = fe_solver_options()) {
  sp.require_stamp(d.stamp, "problem data");
  fe::Vector x = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_p1()));
  if (lifting) {
    sp.require_stamp(lifting->stamp, "primal lifting");
    x = lifting->coeffs;
    for (auto v : sp.dirichlet_vertices())
      PDRB_THROW_IF(x[static_cast<Eigen::Index>(v)] != d.g_D[static_cast<Eigen::Index>(v)], ErrorCode::invalid_argument,
                    "solve_primal: lifting trace differs from Dirichlet data");
  } else {
    PDRB_THROW_IF(d.g_D.lpNorm<Eigen::Infinity>() != 0.0, ErrorCode::invalid_argument,
                  "solve_primal: nonhomogeneous Dirichlet data needs a lifting");
  }
  const auto k = primal_matrix(ops, mu);
  x = detail::solve_free(k, primal_load(sp, d), std::move(x), sp.free_vertices(), opts);
  return fe::make_primal(sp, std::move(x));
}

/// ‖(F − K u)_I‖ / ‖F_I‖ over free DOFs (absolute when F_I = 0).
inline double galerkin_residual(const fe::FESpaces& sp, const fe::Operators& ops, const DiscreteData& d,
                                const fe::PrimalField& u, const Parameter& mu) {
  sp.require_stamp(u.stamp, "primal field");
  const auto k = primal_matrix(ops, mu);
  const fe::Vector f = primal_load(sp, d);
  const fe::Vector r = detail::gather(f - k.multiply(u.coeffs), sp.free_vertices());
  const double fn = detail::gather(f, sp.free_vertices()).norm();
  return fn > 0.0 ? r.norm() / fn : r.norm();
}

/// ∇v on triangle t, accumulated in long double.
inline std::array<long double, 2> element_gradient(const fe::FESpaces& sp, std::size_t t, const fe::Vector& v) {
  const auto g = fe::p1_gradients(sp.corners(t));
  const auto& tri = sp.mesh().triangles()[t];
  // differences first: Σ_k ∇λ_k = 0, and u_k − u_0 carries no offset
  const long double u0 = v[static_cast<Eigen::Index>(tri.v[0])];
  const long double d1 = v[static_cast<Eigen::Index>(tri.v[1])] - u0;
  const long double d2 = v[static_cast<Eigen::Index>(tri.v[2])] - u0;
  return {d1 * g[1][0] + d2 * g[2][0], d1 * g[1][1] + d2 * g[2][1]};
}

/// J^p(v) = ½ a(v,v;μ) − (f_h, v) + (g_N, v)_{Γ_N}, summed elementwise.
inline double primal_energy(const fe::FESpaces& sp, const DiscreteData& d, const fe::PrimalField& v,
                            const Parameter& mu) {
  sp.require_stamp(v.stamp, "primal field");
  sp.require_stamp(d.stamp, "problem data");
  const auto th = thetas(mu);
  const auto& c = v.coeffs;
  long double e = 0.0L;
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const auto& tri = sp.mesh().triangles()[t];
    const long double area = sp.mesh().area(t);
    const auto g = element_gradient(sp, t, c);
    const long double alpha = th.theta_a[fe::region_index(tri.region)];
    const long double mean = (static_cast<long double>(c[static_cast<Eigen::Index>(tri.v[0])]) +
                              c[static_cast<Eigen::Index>(tri.v[1])] + c[static_cast<Eigen::Index>(tri.v[2])]) / 3.0L;
    e += 0.5L * alpha * (g[0] * g[0] + g[1] * g[1]) * area - d.f_h[static_cast<Eigen::Index>(t)] * area * mean;
  }
  for (auto ed : sp.neumann_edges()) {
    const long double out = sp.outward_sign(ed) * d.g_N[static_cast<Eigen::Index>(ed)];
    e += out * sp.edge_length(ed) * 0.5L *
         (static_cast<long double>(c[static_cast<Eigen::Index>(sp.edge(ed)[0])]) + c[static_cast<Eigen::Index>(sp.edge(ed)[1])]);
  }
  return static_cast<double>(e);
}

}  // namespace pdrb
