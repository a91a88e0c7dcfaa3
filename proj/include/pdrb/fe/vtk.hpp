#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pdrb/errors.hpp"
#include "pdrb/fe/fields.hpp"
#include "pdrb/fe/local.hpp"

namespace pdrb::fe {

/// Legacy ASCII unstructured grid. Point data: P1 field "u". Cell data: region,
/// flux at the centroid "sigma", its divergence "div_sigma", and any extra
/// named cell scalars (indicators).
struct VtkOutput {
  const PrimalField* primal = nullptr;
  const DualField* dual = nullptr;
  std::vector<std::pair<std::string, const Vector*>> cell_scalars;
};

inline void write_vtk(std::ostream& os, const FESpaces& sp, const VtkOutput& out, const std::string& title = "pdrb") {
  const auto& m = sp.mesh();
  os << std::setprecision(17);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.num_vertices() << " double\n";
  for (const auto& p : m.vertices()) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << m.num_triangles() << ' ' << 4 * m.num_triangles() << '\n';
  for (const auto& t : m.triangles()) os << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  os << "CELL_TYPES " << m.num_triangles() << '\n';
  for (std::size_t t = 0; t < m.num_triangles(); ++t) os << "5\n";

  if (out.primal != nullptr) {
    sp.require_stamp(out.primal->stamp, "primal field");
    os << "POINT_DATA " << m.num_vertices() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < out.primal->coeffs.size(); ++i) os << out.primal->coeffs[i] << '\n';
  }

  os << "CELL_DATA " << m.num_triangles() << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (const auto& t : m.triangles()) os << t.region << '\n';
  if (out.dual != nullptr) {
    sp.require_stamp(out.dual->stamp, "dual field");
    os << "VECTORS sigma double\n";
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      const auto c = sp.corners(t);
      const Point xc{(c[0].x + c[1].x + c[2].x) / 3.0, (c[0].y + c[1].y + c[2].y) / 3.0};
      double vx = 0.0, vy = 0.0;
      for (int k = 0; k < 3; ++k) {
        const auto phi = rt0_basis(c, sp.tri_signs(t), k, xc);
        const double coef = out.dual->flux[static_cast<Eigen::Index>(sp.tri_edges(t)[k])];
        vx += coef * phi[0];
        vy += coef * phi[1];
      }
      os << vx << ' ' << vy << " 0\n";
    }
    os << "SCALARS div_sigma double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index t = 0; t < out.dual->div.size(); ++t) os << out.dual->div[t] << '\n';
  }
  for (const auto& [name, values] : out.cell_scalars) {
    PDRB_THROW_IF(static_cast<std::size_t>(values->size()) != m.num_triangles(), ErrorCode::invalid_argument,
                  "vtk: cell array '" + name + "' has wrong length");
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index t = 0; t < values->size(); ++t) os << (*values)[t] << '\n';
  }
}

inline void save_vtk(const std::string& path, const FESpaces& sp, const VtkOutput& out) {
  std::ofstream os(path);
  PDRB_THROW_IF(!os, ErrorCode::io_error, "cannot open " + path);
  write_vtk(os, sp, out);
  PDRB_THROW_IF(!os, ErrorCode::io_error, "write failed: " + path);
}

}  // namespace pdrb::fe
