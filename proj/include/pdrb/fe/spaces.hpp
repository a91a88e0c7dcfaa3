#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "pdrb/errors.hpp"
#include "pdrb/fe/local.hpp"
#include "pdrb/mesh/mesh.hpp"
#include "pdrb/mesh/refine.hpp"

namespace pdrb::fe {

using mesh::Mesh;
using mesh::MeshStamp;

enum class EdgeKind : unsigned char { interior, dirichlet, neumann };

/// DOF maps of P1 (vertices), RT0 (edges) and P0 (triangles) on one mesh.
/// Edges are numbered by ascending (low, high) vertex pair and oriented
/// low → high; the global unit normal is the tangent rotated clockwise.
class FESpaces {
 public:
  explicit FESpaces(Mesh m) : FESpaces(std::make_shared<const Mesh>(std::move(m))) {}

  explicit FESpaces(std::shared_ptr<const Mesh> m) : mesh_(std::move(m)) {
    const auto& msh = *mesh_;
    const auto et = mesh::detail::build_edge_table(msh);
    const std::size_t ne = et.keys.size();
    edges_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e)
      edges_[e] = {static_cast<std::size_t>(et.keys[e] >> 32), static_cast<std::size_t>(et.keys[e] & 0xffffffffULL)};
    tri_edges_ = et.tri_edges;
    tri_signs_.resize(msh.num_triangles());
    edge_tris_.assign(ne, {none, none});
    for (std::size_t t = 0; t < msh.num_triangles(); ++t) {
      const auto& v = msh.triangles()[t].v;
      for (int k = 0; k < 3; ++k) {
        // local edge k runs v[k+1] → v[k+2] counter-clockwise, so the
        // global orientation agrees with the outward normal iff v[k+1] < v[k+2]
        tri_signs_[t][k] = v[(k + 1) % 3] < v[(k + 2) % 3] ? 1 : -1;
        auto& slot = edge_tris_[tri_edges_[t][k]];
        (slot[0] == none ? slot[0] : slot[1]) = t;
      }
    }

    edge_kind_.assign(ne, EdgeKind::interior);
    vertex_dirichlet_.assign(msh.num_vertices(), 0);
    for (const auto& be : msh.boundary_edges()) {
      const std::size_t e = et.find(be.a, be.b);
      edge_kind_[e] = be.marker == mesh::BoundaryMarker::dirichlet ? EdgeKind::dirichlet : EdgeKind::neumann;
      if (be.marker == mesh::BoundaryMarker::dirichlet) vertex_dirichlet_[be.a] = vertex_dirichlet_[be.b] = 1;
    }
    for (std::size_t v = 0; v < msh.num_vertices(); ++v)
      (vertex_dirichlet_[v] ? dirichlet_vertices_ : free_vertices_).push_back(v);
    for (std::size_t e = 0; e < ne; ++e)
      (edge_kind_[e] == EdgeKind::neumann ? neumann_edges_ : free_edges_).push_back(e);
  }

  static constexpr std::size_t none = static_cast<std::size_t>(-1);

  [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  [[nodiscard]] MeshStamp stamp() const noexcept { return mesh_->stamp(); }

  [[nodiscard]] std::size_t num_p1() const noexcept { return mesh_->num_vertices(); }
  [[nodiscard]] std::size_t num_rt0() const noexcept { return edges_.size(); }
  [[nodiscard]] std::size_t num_p0() const noexcept { return mesh_->num_triangles(); }
  /// Unknowns of the mixed system (flux + multiplier).
  [[nodiscard]] std::size_t num_dual_dofs() const noexcept { return num_rt0() + num_p0(); }

  [[nodiscard]] const std::array<std::size_t, 2>& edge(std::size_t e) const { return edges_[e]; }
  [[nodiscard]] const std::array<std::size_t, 3>& tri_edges(std::size_t t) const { return tri_edges_[t]; }
  [[nodiscard]] const Signs& tri_signs(std::size_t t) const { return tri_signs_[t]; }
  /// Adjacent triangles; the second is `none` on the boundary.
  [[nodiscard]] const std::array<std::size_t, 2>& edge_triangles(std::size_t e) const { return edge_tris_[e]; }
  [[nodiscard]] EdgeKind edge_kind(std::size_t e) const { return edge_kind_[e]; }
  [[nodiscard]] bool is_dirichlet_vertex(std::size_t v) const { return vertex_dirichlet_[v] != 0; }

  [[nodiscard]] const std::vector<std::size_t>& free_vertices() const noexcept { return free_vertices_; }
  [[nodiscard]] const std::vector<std::size_t>& dirichlet_vertices() const noexcept { return dirichlet_vertices_; }
  /// RT0 DOFs not fixed by a Neumann trace.
  [[nodiscard]] const std::vector<std::size_t>& free_edges() const noexcept { return free_edges_; }
  [[nodiscard]] const std::vector<std::size_t>& neumann_edges() const noexcept { return neumann_edges_; }

  [[nodiscard]] double edge_length(std::size_t e) const {
    const auto& p = mesh_->vertices()[edges_[e][0]];
    const auto& q = mesh_->vertices()[edges_[e][1]];
    return std::hypot(q.x - p.x, q.y - p.y);
  }

  /// +1 if the global normal of boundary edge e points out of Ω.
  [[nodiscard]] int outward_sign(std::size_t e) const {
    const auto t = edge_tris_[e][0];
    for (int k = 0; k < 3; ++k)
      if (tri_edges_[t][k] == e) return tri_signs_[t][k];
    return 0;
  }

  [[nodiscard]] Corners corners(std::size_t t) const { return mesh_->corners(t); }

  void require_stamp(const MeshStamp& s, const char* what) const {
    PDRB_THROW_IF(!(s == stamp()), ErrorCode::generation_mismatch,
                  std::string(what) + " belongs to mesh generation " + std::to_string(s.generation) +
                      ", spaces are at generation " + std::to_string(stamp().generation));
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<std::array<std::size_t, 2>> edges_;
  std::vector<std::array<std::size_t, 3>> tri_edges_;
  std::vector<Signs> tri_signs_;
  std::vector<std::array<std::size_t, 2>> edge_tris_;
  std::vector<EdgeKind> edge_kind_;
  std::vector<char> vertex_dirichlet_;
  std::vector<std::size_t> free_vertices_;
  std::vector<std::size_t> dirichlet_vertices_;
  std::vector<std::size_t> free_edges_;
  std::vector<std::size_t> neumann_edges_;
};

inline FESpaces build_spaces(const Mesh& m) { return FESpaces(m); }

}  // namespace pdrb::fe
