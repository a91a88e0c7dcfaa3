#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "pdrb/errors.hpp"
#include "pdrb/mesh/mesh.hpp"

namespace pdrb::mesh {

// Text format:
//   nv nt nbe
//   x y                       (nv lines, shortest round-trip decimal)
//   v0 v1 v2 region ref_edge  (nt lines)
//   v0 v1 marker              (nbe lines, marker D or N)

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  PDRB_THROW_IF(res.ec != std::errc{} || res.ptr != tok.data() + tok.size(), ErrorCode::parse_error,
                "mesh: bad coordinate '" + tok + "'");
  return v;
}

inline std::size_t parse_index(const std::string& tok) {
  std::size_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  PDRB_THROW_IF(res.ec != std::errc{} || res.ptr != tok.data() + tok.size(), ErrorCode::parse_error,
                "mesh: bad integer '" + tok + "'");
  return v;
}

}  // namespace detail

inline void write_mesh(std::ostream& os, const Mesh& m) {
  os << m.num_vertices() << ' ' << m.num_triangles() << ' ' << m.boundary_edges().size() << '\n';
  for (const auto& p : m.vertices()) os << detail::shortest(p.x) << ' ' << detail::shortest(p.y) << '\n';
  for (const auto& t : m.triangles())
    os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.region << ' ' << t.ref_edge << '\n';
  for (const auto& e : m.boundary_edges())
    os << e.a << ' ' << e.b << ' ' << (e.marker == BoundaryMarker::dirichlet ? 'D' : 'N') << '\n';
}

inline std::string mesh_to_string(const Mesh& m) {
  std::ostringstream os;
  write_mesh(os, m);
  return os.str();
}

/// Generation is not part of the text format; the caller supplies it.
inline Mesh read_mesh(std::istream& is, std::uint64_t generation = 0) {
  auto next = [&is](const char* what) {
    std::string tok;
    PDRB_THROW_IF(!(is >> tok), ErrorCode::parse_error, std::string("mesh: truncated while reading ") + what);
    return tok;
  };
  const std::size_t nv = detail::parse_index(next("header"));
  const std::size_t nt = detail::parse_index(next("header"));
  const std::size_t nb = detail::parse_index(next("header"));
  std::vector<Point> v(nv);
  for (auto& p : v) {
    p.x = detail::parse_double(next("vertex"));
    p.y = detail::parse_double(next("vertex"));
  }
  std::vector<Triangle> t(nt);
  for (auto& tri : t) {
    for (auto& i : tri.v) i = detail::parse_index(next("triangle"));
    tri.region = static_cast<int>(detail::parse_index(next("triangle")));
    tri.ref_edge = static_cast<int>(detail::parse_index(next("triangle")));
  }
  std::vector<BoundaryEdge> b(nb);
  for (auto& e : b) {
    e.a = detail::parse_index(next("boundary edge"));
    e.b = detail::parse_index(next("boundary edge"));
    const auto mk = next("boundary edge");
    PDRB_THROW_IF(mk != "D" && mk != "N", ErrorCode::parse_error, "mesh: bad boundary marker '" + mk + "'");
    e.marker = mk == "D" ? BoundaryMarker::dirichlet : BoundaryMarker::neumann;
  }
  std::string extra;
  PDRB_THROW_IF(static_cast<bool>(is >> extra), ErrorCode::parse_error, "mesh: trailing data '" + extra + "'");
  return Mesh(std::move(v), std::move(t), std::move(b), generation);
}

inline Mesh mesh_from_string(const std::string& s, std::uint64_t generation = 0) {
  std::istringstream is(s);
  return read_mesh(is, generation);
}

inline void save_mesh(const std::string& path, const Mesh& m) {
  std::ofstream os(path);
  PDRB_THROW_IF(!os, ErrorCode::io_error, "cannot open " + path + " for writing");
  write_mesh(os, m);
  PDRB_THROW_IF(!os, ErrorCode::io_error, "write failed: " + path);
}

inline Mesh load_mesh(const std::string& path, std::uint64_t generation = 0) {
  std::ifstream is(path);
  PDRB_THROW_IF(!is, ErrorCode::io_error, "cannot open " + path);
  return read_mesh(is, generation);
}

}  // namespace pdrb::mesh
