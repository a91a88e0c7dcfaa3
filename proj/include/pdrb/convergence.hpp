#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pdrb/discretization.hpp"
#include "pdrb/mesh/refine.hpp"

namespace pdrb {

/// Energy-norm errors against the exact solution at α = 1.
struct TrueErrors {
  double primal = 0.0;  // ‖∇(u − u_h)‖
  double dual = 0.0;    // ‖σ − σ_h‖ with σ = −∇u
};

inline TrueErrors true_errors(const Discretization& disc, const SolvedPair& p) {
  const auto& prob = disc.problem();
  PDRB_THROW_IF(!prob.exact_grad, ErrorCode::invalid_argument,
                "true_errors: problem '" + prob.name + "' has no exact solution");
  const auto& sp = disc.spaces();
  long double ep = 0.0L, ed = 0.0L;
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const auto c = sp.corners(t);
    const auto gh = element_gradient(sp, t, p.u.coeffs);
    long double sp_t = 0.0L, sd_t = 0.0L;
    for (const auto& q : fe::high_order_rule()) {
      const auto x = fe::map_point(c, q.lambda);
      const auto g = prob.exact_grad(x.x, x.y);
      const long double a = g[0] - gh[0], b = g[1] - gh[1];
      sp_t += q.weight * (a * a + b * b);
      const auto s = flux_at(sp, t, p.sigma.flux, q.lambda);
      const long double u = -g[0] - s[0], v = -g[1] - s[1];
      sd_t += q.weight * (u * u + v * v);
    }
    const long double area = sp.mesh().area(t);
    ep += sp_t * area;
    ed += sd_t * area;
  }
  return {std::sqrt(static_cast<double>(ep)), std::sqrt(static_cast<double>(ed))};
}

struct ConvergenceRow {
  std::size_t level = 0;
  std::size_t triangles = 0;
  double h = 0.0;  // longest edge
  double err_primal = std::numeric_limits<double>::quiet_NaN();
  double err_dual = std::numeric_limits<double>::quiet_NaN();
  double eta = 0.0;       // η_h = sqrt(2(J^p − J^d))
  double identity = 0.0;  // |2(J^p − J^d) − η_h²| / η_h², η_h² summed from the local indicators
  double osc = 0.0;
  double div_gap = 0.0;  // max_T |∇·σ_h − f_h|
  double rate_primal = std::numeric_limits<double>::quiet_NaN();
  double rate_dual = std::numeric_limits<double>::quiet_NaN();
  double rate_eta = std::numeric_limits<double>::quiet_NaN();
};

inline double longest_edge(const mesh::Mesh& m) {
  double h = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& v = m.triangles()[t].v;
    for (int k = 0; k < 3; ++k) {
      const auto& a = m.vertices()[v[k]];
      const auto& b = m.vertices()[v[(k + 1) % 3]];
      h = std::max(h, std::hypot(a.x - b.x, a.y - b.y));
    }
  }
  return h;
}

/// Uniform refinement sequence levels first..last of the problem's initial
/// mesh at one parameter. Rates are log(e_{k−1}/e_k)/log(h_{k−1}/h_k).
inline std::vector<ConvergenceRow> convergence_study(const Problem& prob, std::size_t first, std::size_t last,
                                                     const Parameter& mu = {}) {
  PDRB_THROW_IF(first > last, ErrorCode::invalid_argument, "convergence_study: first level exceeds last");
  std::vector<ConvergenceRow> rows;
  mesh::Mesh m = mesh::refine_uniform(prob.initial_mesh(), first);
  for (std::size_t level = first; level <= last; ++level) {
    if (level > first) m = mesh::refine_uniform(m, 1);
    const Discretization d(prob, m);
    const auto p = d.solve(mu);
    ConvergenceRow r;
    r.level = level;
    r.triangles = m.num_triangles();
    r.h = longest_edge(m);
    const double gap2 = 2.0 * (d.primal_energy(p.u, mu) - d.dual_energy(p.sigma, mu));
    const double eta2 = std::pow(d.estimate(p).global, 2);
    r.eta = std::sqrt(std::max(gap2, 0.0));
    r.identity = eta2 > 0.0 ? std::abs(gap2 - eta2) / eta2 : std::abs(gap2);
    r.osc = oscillation(d.spaces(), prob.f, d.data().f_h);
    r.div_gap = feasibility_gap(d.spaces(), p.sigma, d.data().f_h).first;
    if (prob.exact_grad && mu == Parameter{}) {
      const auto e = true_errors(d, p);
      r.err_primal = e.primal;
      r.err_dual = e.dual;
    }
    if (!rows.empty()) {
      const auto& q = rows.back();
      const double lh = std::log(q.h / r.h);
      r.rate_primal = std::log(q.err_primal / r.err_primal) / lh;
      r.rate_dual = std::log(q.err_dual / r.err_dual) / lh;
      r.rate_eta = std::log(q.eta / r.eta) / lh;
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pdrb
