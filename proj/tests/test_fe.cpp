#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "pdrb/fe/assembly.hpp"
#include "pdrb/fe/gramians.hpp"
#include "pdrb/fe/local.hpp"
#include "pdrb/fe/quadrature.hpp"
#include "pdrb/fe/spaces.hpp"
#include "pdrb/fe/vtk.hpp"
#include "pdrb/mesh/refine.hpp"
#include "support.hpp"

using namespace pdrb;
using namespace pdrb::fe;
using std::numbers::pi;

namespace {

using oracle::P;
using oracle::Tri;
using oracle::OracleRt;
using oracle::oracle_gradients;

Corners to_corners(const Tri& t) { return {Point{t[0][0], t[0][1]}, Point{t[1][0], t[1][1]}, Point{t[2][0], t[2][1]}}; }

Tri random_triangle(oracle::Gen& g) {
  for (;;) {
    Tri t;
    for (auto& p : t) p = {g.uniform(-2, 2), g.uniform(-2, 2)};
    const double a = 0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]));
    if (a > 0.2) return t;
    if (a < -0.2) return {t[0], t[2], t[1]};
  }
}

}  // namespace

TEST(Spaces, Counts) {
  const auto l = build_spaces(mesh::make_lshape_initial());
  EXPECT_EQ(l.num_p1(), 8u);
  EXPECT_EQ(l.num_rt0(), 13u);
  EXPECT_EQ(l.num_p0(), 6u);
  const auto s = build_spaces(mesh::make_unit_square(1));
  EXPECT_EQ(s.num_p1(), 4u);
  EXPECT_EQ(s.num_rt0(), 5u);
  EXPECT_EQ(s.num_p0(), 2u);
  const auto r = build_spaces(mesh::refine_uniform(mesh::make_unit_square(1), 1));
  EXPECT_EQ(r.num_p1(), 9u);
  EXPECT_EQ(r.num_rt0(), 16u);
  EXPECT_EQ(r.num_p0(), 8u);
}

TEST(Spaces, EulerCountAndSharedOrientation) {
  oracle::Gen gen(1);
  mesh::Mesh m = mesh::make_lshape_initial();
  for (int k = 0; k < 5; ++k) {
    std::vector<std::size_t> mk;
    for (std::size_t t = 0; t < m.num_triangles(); ++t)
      if (gen.uniform(0, 1) < 0.3) mk.push_back(t);
    m = mesh::refine_nvb(m, mesh::MarkedSet(mk.empty() ? std::vector<std::size_t>{0} : mk));
  }
  const auto sp = build_spaces(m);
  EXPECT_EQ(sp.num_rt0(), sp.num_p1() + sp.num_p0() - 1);
  // each interior edge: the two adjacent triangles see opposite local signs
  // relative to their own outward normals, i.e. one shared global normal
  for (std::size_t e = 0; e < sp.num_rt0(); ++e) {
    const auto [t0, t1] = sp.edge_triangles(e);
    EXPECT_LT(sp.edge(e)[0], sp.edge(e)[1]);
    if (t1 == FESpaces::none) {
      EXPECT_EQ(sp.edge_kind(e), EdgeKind::dirichlet);
      continue;
    }
    int s0 = 0, s1 = 0;
    for (int k = 0; k < 3; ++k) {
      if (sp.tri_edges(t0)[k] == e) s0 = sp.tri_signs(t0)[k];
      if (sp.tri_edges(t1)[k] == e) s1 = sp.tri_signs(t1)[k];
    }
    EXPECT_EQ(s0, -s1);
  }
}

TEST(LocalStiffness, UnitTriangle) {
  const Corners c{Point{0, 0}, Point{1, 0}, Point{0, 1}};
  const auto k = local_p1_stiffness(c, 1.0);
  const double expect[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(k[i][j], expect[i][j]);
  const auto k10 = local_p1_stiffness(c, 10.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(k10[i][j], 10 * expect[i][j], 1e-15);
}

TEST(LocalStiffness, DegenerateThrows) {
  const Corners c{Point{0, 0}, Point{1, 1}, Point{2, 2}};
  EXPECT_THROW((void)local_p1_stiffness(c, 1.0), Error);
}

TEST(LocalStiffnessProperty, MatchesQuadratureOracle) {
  oracle::Gen gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_triangle(gen);
    const double alpha = std::pow(10.0, gen.uniform(-2, 2));
    const auto k = local_p1_stiffness(to_corners(t), alpha);
    const auto g = oracle_gradients(t);
    for (int i = 0; i < 3; ++i) {
      double row = 0;
      for (int j = 0; j < 3; ++j) {
        const double ref = static_cast<double>(oracle::integrate(
            t, [&](double, double) { return alpha * (g[i][0] * g[j][0] + g[i][1] * g[j][1]); }));
        EXPECT_NEAR(k[i][j], ref, 1e-13 * std::max(1.0, std::abs(ref)));
        EXPECT_EQ(k[i][j], k[j][i]);
        row += k[i][j];
      }
      EXPECT_NEAR(row, 0.0, 1e-13 * alpha);
    }
  }
}

TEST(LocalRt0Mass, UnitTriangleMatchesOracle) {
  const Tri t = {P{0, 0}, P{1, 0}, P{0, 1}};
  const std::array<int, 3> s = {1, -1, 1};
  const auto m = local_rt0_mass(to_corners(t), s, 1.0);
  const OracleRt rt(t, s);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double ref = static_cast<double>(oracle::integrate(t, [&](double x, double y) {
        const auto a = rt.eval(i, x, y), b = rt.eval(j, x, y);
        return a[0] * b[0] + a[1] * b[1];
      }));
      EXPECT_NEAR(m[i][j], ref, 1e-13);
    }
  const auto m001 = local_rt0_mass(to_corners(t), s, 0.01);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(m001[i][j], 0.01 * m[i][j], 1e-17);
}

TEST(LocalRt0Mass, SignFlip) {
  oracle::Gen gen(8);
  const auto t = to_corners(random_triangle(gen));
  const Signs s = {1, 1, 1};
  const Signs f = {1, -1, 1};
  const auto a = local_rt0_mass(t, s, 1.0);
  const auto b = local_rt0_mass(t, f, 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(b[i][j], s[i] * f[i] * s[j] * f[j] * a[i][j]);
}

TEST(LocalRt0MassProperty, SpdAndMatchesOracle) {
  oracle::Gen gen(32);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_triangle(gen);
    Signs s;
    for (auto& v : s) v = gen.uniform(0, 1) < 0.5 ? -1 : 1;
    const auto m = local_rt0_mass(to_corners(t), s, 1.0);
    const OracleRt rt(t, s);
    Eigen::Matrix3d em;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        em(i, j) = m[i][j];
        EXPECT_EQ(m[i][j], m[j][i]);
        const double ref = static_cast<double>(oracle::integrate(t, [&](double x, double y) {
          const auto a = rt.eval(i, x, y), b = rt.eval(j, x, y);
          return a[0] * b[0] + a[1] * b[1];
        }));
        EXPECT_NEAR(m[i][j], ref, 1e-12 * std::max(1.0, std::abs(ref)));
      }
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(em).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(LocalDiv, UnitTriangleAndDivergenceTheorem) {
  oracle::Gen gen(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Tri t = trial == 0 ? Tri{P{0, 0}, P{1, 0}, P{0, 1}} : random_triangle(gen);
    const Signs s = {1, -1, 1};
    const auto c = to_corners(t);
    const auto d = local_div(c, s);
    const double area = mesh::signed_area(c[0], c[1], c[2]);
    const OracleRt rt(t, s);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(std::abs(d[k]), edge_length(c, k) / area, 1e-13 * std::abs(d[k]));
      // ∮ φ_k·n over the three edges; φ·n is constant on each edge
      double flux = 0;
      for (int j = 0; j < 3; ++j) {
        const auto& a = t[(j + 1) % 3];
        const auto& b = t[(j + 2) % 3];
        const double nx = b[1] - a[1], ny = -(b[0] - a[0]);  // outward, length |e|
        for (double xi : {0.1, 0.3, 0.5, 0.7, 0.9}) {
          const auto v = rt.eval(k, a[0] + xi * (b[0] - a[0]), a[1] + xi * (b[1] - a[1]));
          flux += 0.2 * (v[0] * nx + v[1] * ny);
        }
      }
      EXPECT_NEAR(d[k] * area, flux, 1e-12);
    }
  }
  const Corners c{Point{0, 0}, Point{1, 0}, Point{0, 1}};
  const auto d = local_div(c, {1, 1, 1});
  EXPECT_NEAR(d[0], std::sqrt(2.0) / 0.5, 1e-14);
  EXPECT_NEAR(d[1], 2.0, 1e-15);
  EXPECT_NEAR(d[2], 2.0, 1e-15);
}

TEST(Quadrature, MidpointRuleExactForQuadratics) {
  oracle::Gen gen(34);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = random_triangle(gen);
    double a[6];
    for (auto& v : a) v = gen.uniform(-1, 1);
    auto f = [&](double x, double y) { return a[0] + a[1] * x + a[2] * y + a[3] * x * x + a[4] * x * y + a[5] * y * y; };
    const auto c = to_corners(t);
    const double area = mesh::signed_area(c[0], c[1], c[2]);
    double s = 0;
    for (const auto& q : midpoint_rule()) {
      const auto x = map_point(c, q.lambda);
      s += q.weight * area * f(x.x, x.y);
    }
    EXPECT_NEAR(s, static_cast<double>(oracle::integrate(t, f)), 1e-12 * std::max(1.0, std::abs(s)));
  }
}

TEST(Quadrature, HighOrderRuleExactToDegreeFourteen) {
  // ∫_{ref} x^i y^j = i! j! / (i+j+2)!
  auto fact = [](int n) { double r = 1; for (int k = 2; k <= n; ++k) r *= k; return r; };
  for (int i = 0; i <= 14; ++i)
    for (int j = 0; i + j <= 14; ++j) {
      double s = 0;
      for (const auto& q : high_order_rule()) s += 0.5 * q.weight * std::pow(q.lambda[1], i) * std::pow(q.lambda[2], j);
      EXPECT_NEAR(s, fact(i) * fact(j) / fact(i + j + 2), 1e-15) << i << "," << j;
    }
}

TEST(P0Project, Examples) {
  const auto l = build_spaces(mesh::make_lshape_initial());
  const auto one = p0_project(l, [](double, double) { return 1.0; });
  for (Eigen::Index t = 0; t < one.size(); ++t) EXPECT_NEAR(one[t], 1.0, 1e-15);
  std::vector<Point> v = {{0, 0}, {1, 0}, {0, 1}};
  mesh::Mesh tri(v, {{{0, 1, 2}, mesh::region_positive, 0}}, {{0, 1}, {1, 2}, {2, 0}});
  const auto sp = build_spaces(tri);
  EXPECT_NEAR(p0_project(sp, [](double x, double) { return x; })[0], 1.0 / 3.0, 1e-15);
}

TEST(P0Project, SmoothFunctionMatchesOracle) {
  const auto sp = build_spaces(mesh::refine_uniform(mesh::make_unit_square(1), 3));
  auto f = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  const auto ph = p0_project(sp, f);
  for (std::size_t t = 0; t < sp.num_p0(); ++t) {
    const auto c = sp.corners(t);
    const Tri tr = {P{c[0].x, c[0].y}, P{c[1].x, c[1].y}, P{c[2].x, c[2].y}};
    const double ref = static_cast<double>(oracle::integrate(tr, f, 2)) / sp.mesh().area(t);
    EXPECT_NEAR(ph[static_cast<Eigen::Index>(t)], ref, 1e-6);
  }
}

TEST(Operators, AffineStiffnessConsistency) {
  oracle::Gen gen(35);
  auto m = mesh::refine_uniform(mesh::make_lshape_initial(), 2);
  const auto sp = build_spaces(m);
  const auto ops = build_operators(sp);
  for (int trial = 0; trial < 5; ++trial) {
    const std::array<double, 2> th = {std::pow(10.0, gen.uniform(-2, 2)), std::pow(10.0, gen.uniform(-2, 2))};
    const auto direct = assemble_stiffness_direct(sp, th);
    const auto affine = combine(ops.stiffness, th);
    ASSERT_EQ(direct.rows(), affine.rows());
    EXPECT_LE((direct.to_dense() - affine.to_dense()).cwiseAbs().maxCoeff(), 1e-13 * std::max(th[0], th[1]));
    EXPECT_TRUE(affine.is_symmetric());
  }
}

TEST(Operators, EnergyScalesExactly) {
  oracle::Gen gen(36);
  const auto sp = build_spaces(mesh::refine_uniform(mesh::make_lshape_initial(), 2));
  const auto ops = build_operators(sp);
  Vector v(static_cast<Eigen::Index>(sp.num_p1()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gen.uniform(-1, 1);
  const std::array<double, 2> th = {3.0, 0.25};
  const double e1 = v.dot(combine(ops.stiffness, th).multiply(v));
  const double e10 = v.dot(combine(ops.stiffness, {10 * th[0], 10 * th[1]}).multiply(v));
  EXPECT_NEAR(e10, 10 * e1, 1e-13 * e10);
}

TEST(Gramians, ZeroGradientAndRegionSum) {
  const auto sp = build_spaces(mesh::refine_uniform(mesh::make_lshape_initial(), 2));
  const auto ops = build_operators(sp);
  const auto c = make_primal(sp, Vector::Constant(static_cast<Eigen::Index>(sp.num_p1()), 3.0));
  oracle::Gen gen(37);
  Vector r(static_cast<Eigen::Index>(sp.num_p1()));
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = gen.uniform(-1, 1);
  const auto u = make_primal(sp, r);
  Vector sflux(static_cast<Eigen::Index>(sp.num_rt0()));
  for (Eigen::Index i = 0; i < sflux.size(); ++i) sflux[i] = gen.uniform(-1, 1);
  const auto g = regionwise_gramians(sp, ops, {c, u}, {make_dual(sp, sflux)});
  for (std::size_t q = 0; q < num_regions; ++q) {
    EXPECT_NEAR(g.grad[q].row(0).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_EQ(g.grad[q], g.grad[q].transpose());
    EXPECT_EQ(g.flux[q], g.flux[q].transpose());
  }
  const auto whole = combine(ops.stiffness, {1.0, 1.0});
  EXPECT_NEAR(g.grad[0](1, 1) + g.grad[1](1, 1), r.dot(whole.multiply(r)), 1e-13 * r.dot(whole.multiply(r)));
}

TEST(Gramians, CrossOfLinearFieldAndItsFlux) {
  // u = x + 2y, σ = −∇u = (−1, −2) is exactly representable in RT0
  const auto sp = build_spaces(mesh::refine_uniform(mesh::make_lshape_initial(), 1));
  const auto ops = build_operators(sp);
  const auto u = make_primal(sp, p1_interpolate(sp, [](double x, double y) { return x + 2 * y; }));
  Vector f(static_cast<Eigen::Index>(sp.num_rt0()));
  for (std::size_t e = 0; e < sp.num_rt0(); ++e) {
    const auto& a = sp.mesh().vertices()[sp.edge(e)[0]];
    const auto& b = sp.mesh().vertices()[sp.edge(e)[1]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const double nx = (b.y - a.y) / len, ny = -(b.x - a.x) / len;
    f[static_cast<Eigen::Index>(e)] = -1.0 * nx - 2.0 * ny;
  }
  const auto s = make_dual(sp, f);
  const auto g = regionwise_gramians(sp, ops, {u}, {s});
  const double grad = g.grad[0](0, 0) + g.grad[1](0, 0);
  EXPECT_NEAR(grad, 5.0 * 3.0, 1e-12);
  EXPECT_NEAR(g.cross(0, 0), -grad, 1e-12);
  EXPECT_NEAR(g.flux[0](0, 0) + g.flux[1](0, 0), grad, 1e-12);
  // divergence of a constant field is zero
  EXPECT_LE(divergence(sp, s).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Gramians, StaleFieldRejected) {
  const auto m = mesh::make_lshape_initial();
  const auto sp = build_spaces(m);
  const auto sp2 = build_spaces(mesh::refine_uniform(m, 1));
  const auto u = zero_primal(sp2);
  try {
    (void)regionwise_gramians(sp, {u}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::generation_mismatch);
  }
}

TEST(Divergence, ZeroField) {
  const auto sp = build_spaces(mesh::make_lshape_initial());
  EXPECT_EQ(divergence(sp, zero_dual(sp)), Vector::Zero(6));
}

TEST(Vtk, WritesSections) {
  const auto sp = build_spaces(mesh::make_lshape_initial());
  const auto u = make_primal(sp, p1_interpolate(sp, [](double x, double) { return x; }));
  const auto s = zero_dual(sp);
  const Vector eta = Vector::Ones(6);
  std::ostringstream os;
  write_vtk(os, sp, {&u, &s, {{"eta", &eta}}});
  const auto text = os.str();
  for (const char* key : {"POINTS 8 double", "CELLS 6 24", "CELL_TYPES 6", "POINT_DATA 8", "SCALARS u double",
                          "CELL_DATA 6", "VECTORS sigma double", "SCALARS div_sigma", "SCALARS eta", "SCALARS region int"})
    EXPECT_NE(text.find(key), std::string::npos) << key;
}
