#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "pdrb/discretization.hpp"
#include "pdrb/greedy/training.hpp"
#include "pdrb/mesh/refine.hpp"

namespace pdrb::greedy {

struct DofCount {
  std::size_t primal = 0;
  std::size_t dual = 0;  // RT0 edges + P0 elements
  [[nodiscard]] std::size_t binding() const noexcept { return std::max(primal, dual); }
};

/// DOF counts a Discretization on `m` would have. Every interior edge is
/// shared by two triangles, so #edges = (3·#triangles + #boundary edges)/2.
inline DofCount count_dofs(const mesh::Mesh& m) {
  const std::size_t edges = (3 * m.num_triangles() + m.boundary_edges().size()) / 2;
  return {m.num_vertices(), edges + m.num_triangles()};
}

struct AdaptiveOptions {
  double theta = 0.5;
  std::size_t max_steps = 100;
  unsigned threads = 0;
  linalg::SolverOptions solver = fe_solver_options();
};

struct AdaptiveResult {
  std::shared_ptr<const Discretization> disc;
  std::vector<SolvedPair> pairs;  // one per input parameter, on disc
  std::vector<double> eta;        // η_h per parameter
  bool enough = true;
  bool refined = false;
  std::size_t steps = 0;

  [[nodiscard]] double max_eta() const { return eta.empty() ? 0.0 : *std::max_element(eta.begin(), eta.end()); }
};

namespace detail {

inline void solve_all(const Discretization& d, std::span<const Parameter> mus, unsigned threads,
                      std::vector<SolvedPair>& pairs, std::vector<IndicatorField>& ind, std::vector<double>& eta) {
  pairs.assign(mus.size(), SolvedPair{});
  ind.assign(mus.size(), IndicatorField{});
  eta.assign(mus.size(), 0.0);
  parallel_for(0, mus.size(), threads, [&](std::size_t i) {
    pairs[i] = d.solve(mus[i]);
    ind[i] = d.estimate(pairs[i]);
    eta[i] = ind[i].global;
  });
}

/// The Dörfler set as a prefix of the descending-indicator order, so it can
/// be shortened while keeping the largest indicators.
inline std::vector<std::size_t> dorfler_prefix(const fe::Vector& local, double theta) {
  const std::span<const double> v(local.data(), static_cast<std::size_t>(local.size()));
  const std::size_t k = mesh::dorfler_mark(v, theta).size();
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
  order.resize(k);
  return order;
}

}  // namespace detail

/// Solve → estimate → Dörfler-mark → refine, starting from `start`, until
/// η_h(μ) ≤ eps_h for every μ in `mus`. With several parameters the marking
/// uses the elementwise root-sum-square of their indicators.
///
/// With a cap, a refinement whose exact DOF count would exceed it is retried
/// with the first half of the marked elements, down to a single element.
/// After such a shortened step the loop stops; enough reports whether the
/// tolerance was nevertheless met.
inline AdaptiveResult adaptive_fe_solve(std::shared_ptr<const Discretization> start, std::span<const Parameter> mus,
                                        double eps_h, std::optional<std::size_t> dof_cap = std::nullopt,
                                        const AdaptiveOptions& opts = {}) {
  PDRB_THROW_IF(!(eps_h > 0.0), ErrorCode::invalid_argument, "adaptive_fe_solve: eps_h must be positive");
  PDRB_THROW_IF(mus.empty(), ErrorCode::invalid_argument, "adaptive_fe_solve: no parameters");
  PDRB_THROW_IF(!start, ErrorCode::invalid_argument, "adaptive_fe_solve: no starting discretization");
  const unsigned threads = worker_count(opts.threads);
  const std::uint64_t gen0 = start->mesh().generation();

  AdaptiveResult r;
  r.disc = std::move(start);
  std::vector<IndicatorField> ind;
  detail::solve_all(*r.disc, mus, threads, r.pairs, ind, r.eta);
  while (r.max_eta() > eps_h) {
    if (r.steps >= opts.max_steps) {
      r.enough = false;
      break;
    }
    const IndicatorField total = sum_indicator(ind);
    auto marked = detail::dorfler_prefix(total.local, opts.theta);
    const auto& cur = r.disc->mesh();
    mesh::Mesh next = mesh::refine_nvb(cur, mesh::MarkedSet(marked));
    bool shortened = false;
    if (dof_cap) {
      while (count_dofs(next).binding() > *dof_cap && marked.size() > 1) {
        marked.resize(marked.size() / 2);
        next = mesh::refine_nvb(cur, mesh::MarkedSet(marked));
        shortened = true;
      }
      if (count_dofs(next).binding() > *dof_cap) {
        r.enough = false;
        break;
      }
    }
    r.disc = std::make_shared<const Discretization>(r.disc->problem(), std::move(next), opts.solver);
    detail::solve_all(*r.disc, mus, threads, r.pairs, ind, r.eta);
    ++r.steps;
    if (shortened) break;
  }
  if (r.max_eta() > eps_h) r.enough = false;
  r.refined = r.disc->mesh().generation() > gen0;
  return r;
}

inline AdaptiveResult adaptive_fe_solve(std::shared_ptr<const Discretization> start, const Parameter& mu, double eps_h,
                                        std::optional<std::size_t> dof_cap = std::nullopt,
                                        const AdaptiveOptions& opts = {}) {
  return adaptive_fe_solve(std::move(start), std::span<const Parameter>(&mu, 1), eps_h, dof_cap, opts);
}

}  // namespace pdrb::greedy
