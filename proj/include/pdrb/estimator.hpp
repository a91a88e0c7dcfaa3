#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "pdrb/dual.hpp"
#include "pdrb/fe/fields.hpp"
#include "pdrb/primal.hpp"

namespace pdrb {

/// η_{h,T} per element (not squared) and η_h = (Σ η_{h,T}²)^{1/2}.
struct IndicatorField {
  fe::MeshStamp stamp;
  fe::Vector local;
  double global = 0.0;
};

inline IndicatorField make_indicator(const fe::MeshStamp& stamp, const std::vector<long double>& squares) {
  IndicatorField f;
  f.stamp = stamp;
  f.local.resize(static_cast<Eigen::Index>(squares.size()));
  long double total = 0.0L;
  for (std::size_t t = 0; t < squares.size(); ++t) {
    const long double s = std::max(squares[t], 0.0L);
    f.local[static_cast<Eigen::Index>(t)] = static_cast<double>(std::sqrt(s));
    total += s;
  }
  f.global = static_cast<double>(std::sqrt(total));
  return f;
}

/// ‖α^{1/2}∇u + α^{−1/2}σ‖²_{0,T} per element, without checks.
inline std::vector<long double> gap_squares(const fe::FESpaces& sp, const fe::Vector& u, const fe::Vector& sigma,
                                            const Parameter& mu) {
  const auto th = thetas(mu);
  std::vector<long double> out(sp.num_p0());
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const std::size_t q = fe::region_index(sp.mesh().triangles()[t].region);
    const long double sa = std::sqrt(static_cast<long double>(th.theta_a[q]));
    const long double sb = 1.0L / sa;
    const auto g = element_gradient(sp, t, u);
    long double s = 0.0L;
    for (const auto& qp : fe::midpoint_rule()) {
      const auto v = flux_at(sp, t, sigma, qp.lambda);
      const long double wx = sa * g[0] + sb * v[0];
      const long double wy = sa * g[1] + sb * v[1];
      s += qp.weight * (wx * wx + wy * wy);
    }
    out[t] = s * sp.mesh().area(t);
  }
  return out;
}

/// The primal-dual gap indicator. σ must be dual-feasible for `d`.
inline IndicatorField local_gap(const fe::FESpaces& sp, const DiscreteData& d, const fe::PrimalField& u,
                                const fe::DualField& sigma, const Parameter& mu) {
  sp.require_stamp(u.stamp, "primal field");
  sp.require_stamp(sigma.stamp, "dual field");
  sp.require_stamp(d.stamp, "problem data");
  const auto [gap, tol] = feasibility_gap(sp, sigma, d.f_h);
  PDRB_THROW_IF(gap > tol, ErrorCode::infeasible_lifting,
                "local_gap: flux is not dual-feasible (divergence error " + std::to_string(gap) + ")");
  return make_indicator(sp.stamp(), gap_squares(sp, u.coeffs, sigma.flux, mu));
}

/// Elementwise root-sum-square over several parameters on one mesh.
inline IndicatorField sum_indicator(std::span<const IndicatorField> fields) {
  PDRB_THROW_IF(fields.empty(), ErrorCode::invalid_argument, "sum_indicator: no indicator fields");
  const auto n = static_cast<std::size_t>(fields.front().local.size());
  std::vector<long double> sq(n, 0.0L);
  for (const auto& f : fields) {
    PDRB_THROW_IF(!(f.stamp == fields.front().stamp), ErrorCode::generation_mismatch,
                  "sum_indicator: indicators from different mesh generations");
    for (std::size_t t = 0; t < n; ++t) {
      const long double v = f.local[static_cast<Eigen::Index>(t)];
      sq[t] += v * v;
    }
  }
  return make_indicator(fields.front().stamp, sq);
}

struct SolvedPair {
  fe::PrimalField u;
  fe::DualField sigma;
  Parameter mu;
};

inline IndicatorField sum_indicator(const fe::FESpaces& sp, const DiscreteData& d, std::span<const SolvedPair> pairs) {
  std::vector<IndicatorField> f;
  f.reserve(pairs.size());
  for (const auto& p : pairs) f.push_back(local_gap(sp, d, p.u, p.sigma, p.mu));
  return sum_indicator(f);
}

/// Global data-oscillation term (h_T/π)‖f − f_h‖, reported next to η_h.
inline double oscillation(const fe::FESpaces& sp, const fe::ScalarFunction& f, const fe::Vector& f_h) {
  const fe::Vector o = fe::data_oscillation(sp, f, f_h);
  return o.norm();
}

}  // namespace pdrb
