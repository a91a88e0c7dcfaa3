#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "pdrb/fe/assembly.hpp"
#include "pdrb/fe/spaces.hpp"
#include "pdrb/mesh/mesh.hpp"

namespace pdrb {

/// μ = (μ1, μ2): log10 of the conductivity on region 1 (xy>0) and region 2.
struct Parameter {
  std::array<double, 2> mu{0.0, 0.0};
  Parameter() = default;
  Parameter(double m1, double m2) : mu{m1, m2} {}
  double operator[](std::size_t i) const { return mu[i]; }
  friend bool operator==(const Parameter&, const Parameter&) = default;
};

struct ParameterBox {
  std::array<double, 2> lo{-2.0, -2.0};
  std::array<double, 2> hi{2.0, 2.0};
  [[nodiscard]] bool contains(const Parameter& p) const {
    return p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1];
  }
};

/// θ_a = α per region, θ_b = 1/α per region.
struct AffineThetas {
  std::array<double, fe::num_regions> theta_a;
  std::array<double, fe::num_regions> theta_b;
};

inline AffineThetas thetas(const Parameter& p) {
  AffineThetas t{};
  for (std::size_t q = 0; q < fe::num_regions; ++q) {
    t.theta_a[q] = std::pow(10.0, p[q]);
    t.theta_b[q] = std::pow(10.0, -p[q]);
  }
  return t;
}

/// Analytic description of a test problem: −∇·(α∇u) = f, u = g_D on Γ_D,
/// −α∇u·n = g_N on Γ_N (so σ·n = g_N with σ = −α∇u).
struct Problem {
  std::string name;
  fe::ScalarFunction f;
  fe::ScalarFunction g_D;  // empty = homogeneous
  fe::ScalarFunction g_N;  // empty = homogeneous
  std::function<mesh::Mesh()> initial_mesh;
  /// Exact solution at μ = (0,0), when known.
  fe::ScalarFunction exact_u;
  std::function<std::array<double, 2>(double, double)> exact_grad;
};

/// The flagship test: L-shape, f = 1, homogeneous Dirichlet data.
inline Problem lshape_problem() {
  Problem p;
  p.name = "lshape";
  p.f = [](double, double) { return 1.0; };
  p.initial_mesh = [] { return mesh::make_lshape_initial(); };
  return p;
}

/// u = sin(πx) sin(πy) on the unit square with α = 1.
inline Problem manufactured_problem() {
  using std::numbers::pi;
  Problem p;
  p.name = "unit_square";
  p.f = [](double x, double y) { return 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y); };
  p.initial_mesh = [] { return mesh::make_unit_square(2); };
  p.exact_u = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  p.exact_grad = [](double x, double y) {
    return std::array<double, 2>{pi * std::cos(pi * x) * std::sin(pi * y), pi * std::sin(pi * x) * std::cos(pi * y)};
  };
  return p;
}

inline Problem problem_by_name(const std::string& name) {
  if (name == "lshape") return lshape_problem();
  if (name == "unit_square") return manufactured_problem();
  throw Error(ErrorCode::invalid_argument, "unknown problem '" + name + "' (expected lshape or unit_square)");
}

/// Problem data on one mesh. f_h is the P0 projection, g_D the nodal values
/// on Dirichlet vertices (zero elsewhere), g_N the edge-constant normal flux
/// in global edge orientation on Neumann edges (zero elsewhere).
struct DiscreteData {
  fe::MeshStamp stamp;
  fe::Vector f_h;
  fe::Vector g_D;
  fe::Vector g_N;
};

inline DiscreteData discretize(const Problem& p, const fe::FESpaces& sp) {
  DiscreteData d;
  d.stamp = sp.stamp();
  d.f_h = p.f ? fe::p0_project(sp, p.f) : fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_p0()));
  d.g_D = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_p1()));
  if (p.g_D)
    for (auto v : sp.dirichlet_vertices()) {
      const auto& x = sp.mesh().vertices()[v];
      d.g_D[static_cast<Eigen::Index>(v)] = p.g_D(x.x, x.y);
    }
  d.g_N = fe::Vector::Zero(static_cast<Eigen::Index>(sp.num_rt0()));
  if (p.g_N)
    for (auto e : sp.neumann_edges())
      d.g_N[static_cast<Eigen::Index>(e)] = sp.outward_sign(e) * fe::edge_average(sp, e, p.g_N);
  return d;
}

}  // namespace pdrb
