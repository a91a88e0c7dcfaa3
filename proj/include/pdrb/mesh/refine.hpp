#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdrb/errors.hpp"
#include "pdrb/mesh/mesh.hpp"

namespace pdrb::mesh {

/// Element indices to refine. Stored sorted and unique.
class MarkedSet {
 public:
  MarkedSet() = default;
  explicit MarkedSet(std::vector<std::size_t> elements) : elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end());
    elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  }

  static MarkedSet all(const Mesh& m) {
    std::vector<std::size_t> e(m.num_triangles());
    std::iota(e.begin(), e.end(), std::size_t{0});
    return MarkedSet(std::move(e));
  }

  [[nodiscard]] std::span<const std::size_t> elements() const noexcept { return elements_; }
  [[nodiscard]] std::size_t size() const noexcept { return elements_.size(); }
  [[nodiscard]] bool empty() const noexcept { return elements_.empty(); }

 private:
  std::vector<std::size_t> elements_;
};

namespace detail {

/// Undirected edges of a mesh numbered by ascending (low, high) vertex pair.
struct EdgeTable {
  std::vector<std::uint64_t> keys;  // sorted
  std::vector<std::array<std::size_t, 3>> tri_edges;  // local edge k (opposite vertex k) -> edge id

  [[nodiscard]] std::size_t find(std::size_t a, std::size_t b) const {
    const auto k = edge_key(a, b);
    const auto it = std::lower_bound(keys.begin(), keys.end(), k);
    return static_cast<std::size_t>(it - keys.begin());
  }
};

inline EdgeTable build_edge_table(const Mesh& m) {
  EdgeTable et;
  et.keys.reserve(m.num_triangles() * 3);
  for (const auto& t : m.triangles())
    for (int k = 0; k < 3; ++k) et.keys.push_back(edge_key(t.v[(k + 1) % 3], t.v[(k + 2) % 3]));
  std::sort(et.keys.begin(), et.keys.end());
  et.keys.erase(std::unique(et.keys.begin(), et.keys.end()), et.keys.end());
  et.tri_edges.resize(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int k = 0; k < 3; ++k) et.tri_edges[t][k] = et.find(tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]);
  }
  return et;
}

}  // namespace detail

/// Newest-vertex bisection. Every marked triangle is bisected at least once;
/// closure keeps the result conforming. Each element is split into 2, 3 or 4
/// children and parents() maps children back to the input triangles.
inline Mesh refine_nvb(const Mesh& mesh, const MarkedSet& marked) {
  if (marked.empty()) return mesh;
  const std::size_t nt = mesh.num_triangles();
  for (auto t : marked.elements())
    PDRB_THROW_IF(t >= nt, ErrorCode::index_out_of_range, "marked element " + std::to_string(t));

  const auto et = detail::build_edge_table(mesh);
  const std::size_t ne = et.keys.size();
  std::vector<std::array<std::size_t, 2>> edge_tris(ne, {nt, nt});
  for (std::size_t t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      auto& slot = edge_tris[et.tri_edges[t][k]];
      (slot[0] == nt ? slot[0] : slot[1]) = t;
    }

  std::vector<char> edge_marked(ne, 0);
  std::vector<std::size_t> work;
  auto mark_edge = [&](std::size_t e) {
    if (edge_marked[e]) return;
    edge_marked[e] = 1;
    for (auto t : edge_tris[e])
      if (t != nt) work.push_back(t);
  };
  for (auto t : marked.elements()) mark_edge(et.tri_edges[t][mesh.triangles()[t].ref_edge]);
  // closure: a triangle with any marked edge must have its refinement edge marked
  while (!work.empty()) {
    const std::size_t t = work.back();
    work.pop_back();
    mark_edge(et.tri_edges[t][mesh.triangles()[t].ref_edge]);
  }

  auto vertices = mesh.vertices();
  std::vector<std::size_t> mid(ne, 0);
  for (std::size_t e = 0; e < ne; ++e) {
    if (!edge_marked[e]) continue;
    const auto a = static_cast<std::size_t>(et.keys[e] >> 32);
    const auto b = static_cast<std::size_t>(et.keys[e] & 0xffffffffULL);
    mid[e] = vertices.size();
    vertices.push_back(midpoint(vertices[a], vertices[b]));
  }
  auto midpoint_of = [&](std::size_t a, std::size_t b) -> std::size_t {
    const std::size_t e = et.find(a, b);
    return edge_marked[e] ? mid[e] : SIZE_MAX;
  };

  std::vector<Triangle> tris;
  std::vector<std::size_t> parents;
  tris.reserve(nt * 2);
  parents.reserve(nt * 2);
  auto emit = [&](std::size_t p, int region, std::size_t v0, std::size_t v1, std::size_t v2) {
    tris.push_back({{v0, v1, v2}, region, 0});
    parents.push_back(p);
  };
  // Bisect (m, x, y) again along xy if that edge is marked; children keep
  // the new vertex first so the refinement edge is always local edge 0.
  auto split_child = [&](std::size_t p, int region, std::size_t m, std::size_t x, std::size_t y) {
    const std::size_t m2 = midpoint_of(x, y);
    if (m2 == SIZE_MAX) {
      emit(p, region, m, x, y);
    } else {
      emit(p, region, m2, m, x);
      emit(p, region, m2, y, m);
    }
  };

  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles()[t];
    const int r = tri.ref_edge;
    const std::size_t c = tri.v[r], a = tri.v[(r + 1) % 3], b = tri.v[(r + 2) % 3];
    const std::size_t m = midpoint_of(a, b);
    if (m == SIZE_MAX) {
      emit(t, tri.region, tri.v[0], tri.v[1], tri.v[2]);
      tris.back().ref_edge = r;
      continue;
    }
    split_child(t, tri.region, m, c, a);
    split_child(t, tri.region, m, b, c);
  }

  std::vector<BoundaryEdge> boundary;
  boundary.reserve(mesh.boundary_edges().size() * 2);
  for (const auto& be : mesh.boundary_edges()) {
    const std::size_t m = midpoint_of(be.a, be.b);
    if (m == SIZE_MAX) {
      boundary.push_back(be);
    } else {
      boundary.push_back({be.a, m, be.marker});
      boundary.push_back({m, be.b, be.marker});
    }
  }
  return Mesh(std::move(vertices), std::move(tris), std::move(boundary), mesh.generation() + 1,
              std::move(parents));
}

/// `levels` uniform refinements; one level splits every triangle into 4
/// (two bisection rounds).
inline Mesh refine_uniform(const Mesh& mesh, std::size_t levels) {
  Mesh m = mesh;
  for (std::size_t k = 0; k < 2 * levels; ++k) m = refine_nvb(m, MarkedSet::all(m));
  return m;
}

/// Minimal set with Σ_marked η_T² ≥ θ²·Σ η_T², greedy by descending η_T
/// (ties to the lower index).
inline MarkedSet dorfler_mark(std::span<const double> indicators, double theta) {
  PDRB_THROW_IF(!(theta > 0.0 && theta <= 1.0), ErrorCode::invalid_argument, "dorfler_mark: theta must lie in (0,1]");
  std::vector<std::size_t> order(indicators.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double v : indicators)
    PDRB_THROW_IF(!(v >= 0.0), ErrorCode::invalid_argument, "dorfler_mark: indicators must be nonnegative");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return indicators[i] > indicators[j]; });
  // total summed in the same order as the prefix so theta=1 is reachable exactly
  long double total = 0.0L;
  for (auto i : order) total += static_cast<long double>(indicators[i]) * indicators[i];
  PDRB_THROW_IF(total <= 0.0L, ErrorCode::invalid_argument, "dorfler_mark: all indicators are zero");
  const long double target = static_cast<long double>(theta) * theta * total;
  std::vector<std::size_t> chosen;
  long double acc = 0.0L;
  for (auto i : order) {
    chosen.push_back(i);
    acc += static_cast<long double>(indicators[i]) * indicators[i];
    if (acc >= target) break;
  }
  return MarkedSet(std::move(chosen));
}

}  // namespace pdrb::mesh
