#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdrb/errors.hpp"

namespace pdrb::mesh {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline Point midpoint(const Point& a, const Point& b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

enum class BoundaryMarker : int { dirichlet = 1, neumann = 2 };

/// Coefficient regions: 1 where x·y > 0, 2 where x·y <= 0.
enum : int { region_positive = 1, region_negative = 2 };

struct Triangle {
  std::array<std::size_t, 3> v{};
  int region = region_positive;
  /// Local index k of the refinement edge; the edge is opposite vertex k.
  int ref_edge = 0;
  friend bool operator==(const Triangle&, const Triangle&) = default;
};

struct BoundaryEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  BoundaryMarker marker = BoundaryMarker::dirichlet;
  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// Identity of one mesh snapshot. Fields, spaces and reduced models carry the
/// stamp of the mesh they were computed on.
struct MeshStamp {
  std::uint64_t generation = 0;
  std::uint64_t fingerprint = 0;
  friend bool operator==(const MeshStamp&, const MeshStamp&) = default;
};

inline std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

inline int region_of(const Point& p) { return p.x * p.y > 0.0 ? region_positive : region_negative; }

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

/// Conforming triangulation. Immutable: refinement produces a new Mesh.
class Mesh {
 public:
  Mesh() = default;

  /// Validates positivity, boundary consistency, conformity and region tags.
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary,
       std::uint64_t generation = 0, std::vector<std::size_t> parents = {})
      : vertices_(std::move(vertices)),
        triangles_(std::move(triangles)),
        boundary_(std::move(boundary)),
        parents_(std::move(parents)),
        generation_(generation) {
    validate();
    fingerprint_ = compute_fingerprint();
  }

  [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_; }
  /// Parent triangle index in the previous generation; empty for an initial mesh.
  [[nodiscard]] const std::vector<std::size_t>& parents() const noexcept { return parents_; }
  [[nodiscard]] std::uint64_t generation() const noexcept { return generation_; }
  [[nodiscard]] MeshStamp stamp() const noexcept { return {generation_, fingerprint_}; }
  [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }
  [[nodiscard]] std::size_t num_triangles() const noexcept { return triangles_.size(); }

  [[nodiscard]] std::array<Point, 3> corners(std::size_t t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri.v[0]], vertices_[tri.v[1]], vertices_[tri.v[2]]};
  }

  [[nodiscard]] double area(std::size_t t) const {
    const auto c = corners(t);
    return signed_area(c[0], c[1], c[2]);
  }

  [[nodiscard]] double total_area() const {
    long double s = 0.0L;
    for (std::size_t t = 0; t < triangles_.size(); ++t) s += area(t);
    return static_cast<double>(s);
  }

  [[nodiscard]] Point barycenter(std::size_t t) const {
    const auto c = corners(t);
    return {(c[0].x + c[1].x + c[2].x) / 3.0, (c[0].y + c[1].y + c[2].y) / 3.0};
  }

  /// Number of triangles incident to each undirected edge.
  [[nodiscard]] std::unordered_map<std::uint64_t, int> edge_incidence() const {
    std::unordered_map<std::uint64_t, int> count;
    count.reserve(triangles_.size() * 2);
    for (const auto& t : triangles_)
      for (int k = 0; k < 3; ++k) ++count[edge_key(t.v[(k + 1) % 3], t.v[(k + 2) % 3])];
    return count;
  }

  friend bool operator==(const Mesh& a, const Mesh& b) {
    return a.vertices_ == b.vertices_ && a.triangles_ == b.triangles_ && a.boundary_ == b.boundary_ &&
           a.generation_ == b.generation_;
  }

 private:
  void validate() const {
    const std::size_t nv = vertices_.size();
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      const auto& tri = triangles_[t];
      for (auto v : tri.v)
        PDRB_THROW_IF(v >= nv, ErrorCode::index_out_of_range,
                      "triangle " + std::to_string(t) + " references vertex " + std::to_string(v));
      PDRB_THROW_IF(tri.ref_edge < 0 || tri.ref_edge > 2, ErrorCode::invalid_argument,
                    "triangle " + std::to_string(t) + " has invalid refinement edge");
      PDRB_THROW_IF(!(area(t) > 0.0), ErrorCode::invalid_argument,
                    "triangle " + std::to_string(t) + " has non-positive signed area");
      PDRB_THROW_IF(tri.region != region_positive && tri.region != region_negative, ErrorCode::invalid_argument,
                    "triangle " + std::to_string(t) + " has invalid region tag");
      PDRB_THROW_IF(tri.region != region_of(barycenter(t)), ErrorCode::invalid_argument,
                    "triangle " + std::to_string(t) + " region tag disagrees with sign of x*y");
      for (auto v : tri.v) {
        const double xy = vertices_[v].x * vertices_[v].y;
        const bool straddles = tri.region == region_positive ? xy < 0.0 : xy > 0.0;
        PDRB_THROW_IF(straddles, ErrorCode::invalid_argument,
                      "triangle " + std::to_string(t) + " straddles a coefficient interface");
      }
    }
    PDRB_THROW_IF(!parents_.empty() && parents_.size() != triangles_.size(), ErrorCode::invalid_argument,
                  "genealogy size mismatch");

    auto incidence = edge_incidence();
    for (const auto& [key, n] : incidence)
      PDRB_THROW_IF(n > 2, ErrorCode::invalid_argument, "edge shared by more than two triangles");
    std::size_t boundary_count = 0;
    for (const auto& [key, n] : incidence) boundary_count += (n == 1);
    PDRB_THROW_IF(boundary_count != boundary_.size(), ErrorCode::invalid_argument,
                  "boundary edge list does not match triangulation boundary (non-conforming mesh?)");
    for (const auto& e : boundary_) {
      PDRB_THROW_IF(e.a >= nv || e.b >= nv, ErrorCode::index_out_of_range, "boundary edge vertex");
      const auto it = incidence.find(edge_key(e.a, e.b));
      PDRB_THROW_IF(it == incidence.end() || it->second != 1, ErrorCode::invalid_argument,
                    "boundary edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                        ") is not on the triangulation boundary");
    }
  }

  [[nodiscard]] std::uint64_t compute_fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffU;
        h *= 1099511628211ULL;
      }
    };
    for (const auto& p : vertices_) {
      mix(std::bit_cast<std::uint64_t>(p.x));
      mix(std::bit_cast<std::uint64_t>(p.y));
    }
    for (const auto& t : triangles_) {
      for (auto v : t.v) mix(v);
      mix(static_cast<std::uint64_t>(t.region));
      mix(static_cast<std::uint64_t>(t.ref_edge));
    }
    for (const auto& e : boundary_) {
      mix(e.a);
      mix(e.b);
      mix(static_cast<std::uint64_t>(e.marker));
    }
    return h;
  }

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<std::size_t> parents_;
  std::uint64_t generation_ = 0;
  std::uint64_t fingerprint_ = 0;
};

/// The L-shaped domain (-1,1)² \ (-1,0]² split into 6 right triangles.
/// Every diagonal passes through the re-entrant corner and is the refinement
/// edge of both triangles sharing it.
inline Mesh make_lshape_initial() {
  std::vector<Point> v = {{-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}, {0, -1}, {1, -1}};
  std::vector<Triangle> t = {
      {{2, 5, 1}, region_positive, 0}, {{4, 1, 5}, region_positive, 0},
      {{0, 1, 3}, region_negative, 0}, {{4, 3, 1}, region_negative, 0},
      {{6, 7, 1}, region_negative, 0}, {{2, 1, 7}, region_negative, 0},
  };
  using enum BoundaryMarker;
  std::vector<BoundaryEdge> b = {{6, 7, dirichlet}, {7, 2, dirichlet}, {2, 5, dirichlet}, {5, 4, dirichlet},
                                 {4, 3, dirichlet}, {3, 0, dirichlet}, {0, 1, dirichlet}, {1, 6, dirichlet}};
  return Mesh(std::move(v), std::move(t), std::move(b));
}

/// Unit square [0,1]² with n×n cells, each split along its SW–NE diagonal.
inline Mesh make_unit_square(std::size_t n) {
  PDRB_THROW_IF(n == 0, ErrorCode::invalid_argument, "make_unit_square: n must be >= 1");
  const auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
  std::vector<Point> v;
  v.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      v.push_back({static_cast<double>(i) / static_cast<double>(n), static_cast<double>(j) / static_cast<double>(n)});
  std::vector<Triangle> t;
  t.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      t.push_back({{b, c, a}, region_positive, 0});
      t.push_back({{d, a, c}, region_positive, 0});
    }
  }
  std::vector<BoundaryEdge> bnd;
  using enum BoundaryMarker;
  for (std::size_t i = 0; i < n; ++i) bnd.push_back({id(i, 0), id(i + 1, 0), dirichlet});
  for (std::size_t j = 0; j < n; ++j) bnd.push_back({id(n, j), id(n, j + 1), dirichlet});
  for (std::size_t i = n; i > 0; --i) bnd.push_back({id(i, n), id(i - 1, n), dirichlet});
  for (std::size_t j = n; j > 0; --j) bnd.push_back({id(0, j), id(0, j - 1), dirichlet});
  return Mesh(std::move(v), std::move(t), std::move(bnd));
}

/// Copy of `m` with boundary markers reassigned by `marker_at(edge midpoint)`.
inline Mesh with_boundary_markers(const Mesh& m, const std::function<BoundaryMarker(const Point&)>& marker_at) {
  auto b = m.boundary_edges();
  for (auto& e : b) e.marker = marker_at(midpoint(m.vertices()[e.a], m.vertices()[e.b]));
  return Mesh(m.vertices(), m.triangles(), std::move(b), m.generation(), m.parents());
}

inline double min_angle(const Mesh& m) {
  double best = std::numbers::pi;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto c = m.corners(t);
    for (int k = 0; k < 3; ++k) {
      const Point& p = c[k];
      const Point& q = c[(k + 1) % 3];
      const Point& r = c[(k + 2) % 3];
      const double ux = q.x - p.x, uy = q.y - p.y, wx = r.x - p.x, wy = r.y - p.y;
      const double ang = std::atan2(std::abs(ux * wy - uy * wx), ux * wx + uy * wy);
      best = std::min(best, ang);
    }
  }
  return best;
}

}  // namespace pdrb::mesh
