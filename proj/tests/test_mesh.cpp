#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "pdrb/mesh/mesh.hpp"
#include "pdrb/mesh/mesh_io.hpp"
#include "pdrb/mesh/refine.hpp"
#include "support.hpp"

using namespace pdrb;
using namespace pdrb::mesh;

namespace {

// Exhaustive conformity oracle: count every edge over all triangles and check
// no vertex lies strictly inside another triangle's edge.
void expect_conforming(const Mesh& m) {
  std::map<std::pair<std::size_t, std::size_t>, int> count;
  for (const auto& t : m.triangles())
    for (int k = 0; k < 3; ++k) {
      auto a = t.v[k], b = t.v[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  std::size_t boundary = 0;
  for (const auto& [e, n] : count) {
    ASSERT_LE(n, 2);
    boundary += n == 1;
  }
  EXPECT_EQ(boundary, m.boundary_edges().size());
  // hanging nodes: a vertex at the midpoint of some edge must split that edge
  std::map<std::pair<double, double>, std::size_t> at;
  for (std::size_t i = 0; i < m.num_vertices(); ++i) at[{m.vertices()[i].x, m.vertices()[i].y}] = i;
  for (const auto& [e, n] : count) {
    const auto p = midpoint(m.vertices()[e.first], m.vertices()[e.second]);
    EXPECT_EQ(at.count({p.x, p.y}), 0u) << "hanging node on edge " << e.first << "-" << e.second;
  }
}

}  // namespace

TEST(LShape, Counts) {
  const auto m = make_lshape_initial();
  EXPECT_EQ(m.num_triangles(), 6u);
  EXPECT_EQ(m.num_vertices(), 8u);
  EXPECT_DOUBLE_EQ(m.total_area(), 3.0);
  for (const auto& e : m.boundary_edges()) EXPECT_EQ(e.marker, BoundaryMarker::dirichlet);
  EXPECT_EQ(m.boundary_edges().size(), 8u);
}

TEST(LShape, RegionTagsFollowBarycenterSign) {
  // The quadrant x>0,y>0 is the only xy>0 part of the L-shape; it holds 2 of
  // the 6 congruent triangles, the other two quadrants hold 4.
  const auto m = make_lshape_initial();
  int r1 = 0, r2 = 0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto c = m.corners(t);
    const double bx = (c[0].x + c[1].x + c[2].x) / 3, by = (c[0].y + c[1].y + c[2].y) / 3;
    const int expect = bx * by > 0 ? 1 : 2;
    EXPECT_EQ(m.triangles()[t].region, expect);
    (expect == 1 ? r1 : r2)++;
  }
  EXPECT_EQ(r1, 2);
  EXPECT_EQ(r2, 4);
}

TEST(LShape, PositiveAreasAndRightAngles) {
  const auto m = make_lshape_initial();
  for (std::size_t t = 0; t < 6; ++t) EXPECT_DOUBLE_EQ(m.area(t), 0.5);
  EXPECT_NEAR(min_angle(m), M_PI / 4, 1e-15);
}

TEST(UnitSquare, Counts) {
  EXPECT_EQ(make_unit_square(1).num_triangles(), 2u);
  EXPECT_EQ(make_unit_square(1).num_vertices(), 4u);
  EXPECT_EQ(make_unit_square(2).num_triangles(), 8u);
  EXPECT_EQ(make_unit_square(2).num_vertices(), 9u);
  EXPECT_NEAR(make_unit_square(4).total_area(), 1.0, 1e-14);
  EXPECT_THROW((void)make_unit_square(0), Error);
}

TEST(MeshValidation, RejectsBadInput) {
  std::vector<Point> v = {{0, 0}, {1, 0}, {0, 1}};
  // clockwise
  EXPECT_THROW(Mesh(v, {{{0, 2, 1}, region_negative, 0}}, {{0, 1}, {1, 2}, {2, 0}}), Error);
  // region disagrees with barycenter sign (xy>0 here)
  std::vector<Point> q = {{0.1, 0.1}, {1, 0.1}, {0.1, 1}};
  EXPECT_THROW(Mesh(q, {{{0, 1, 2}, region_negative, 0}}, {{0, 1}, {1, 2}, {2, 0}}), Error);
  // boundary list incomplete
  EXPECT_THROW(Mesh(q, {{{0, 1, 2}, region_positive, 0}}, {{0, 1}, {1, 2}}), Error);
  // straddling the x axis
  std::vector<Point> s = {{0.5, -0.5}, {1, 0.5}, {0.2, 0.5}};
  EXPECT_THROW(Mesh(s, {{{0, 1, 2}, region_positive, 0}}, {{0, 1}, {1, 2}, {2, 0}}), Error);
}

TEST(Refine, SquareBothMarked) {
  const auto m = make_unit_square(1);
  const auto r = refine_nvb(m, MarkedSet({0, 1}));
  EXPECT_EQ(r.num_triangles(), 4u);
  EXPECT_EQ(r.num_vertices(), 5u);
  EXPECT_EQ(r.generation(), 1u);
  expect_conforming(r);
}

TEST(Refine, ClosureBisectsNeighbour) {
  const auto m = make_unit_square(1);
  const auto r = refine_nvb(m, MarkedSet({0}));
  EXPECT_EQ(r.num_triangles(), 4u);
  std::set<std::size_t> parents(r.parents().begin(), r.parents().end());
  EXPECT_EQ(parents, (std::set<std::size_t>{0, 1}));
  expect_conforming(r);
}

TEST(Refine, EmptyMarkedSetIsIdentity) {
  const auto m = make_lshape_initial();
  const auto r = refine_nvb(m, MarkedSet{});
  EXPECT_EQ(r, m);
  EXPECT_EQ(r.generation(), 0u);
}

TEST(Refine, UniformLShape) {
  const auto m = make_lshape_initial();
  const auto r1 = refine_uniform(m, 1);
  EXPECT_EQ(r1.num_triangles(), 24u);
  EXPECT_EQ(r1.num_vertices(), 21u);
  EXPECT_EQ(r1.generation(), 2u);
  const auto r3 = refine_uniform(m, 3);
  EXPECT_EQ(r3.num_triangles(), 6u * 64u);
  expect_conforming(r3);
  const auto r6 = refine_uniform(m, 6);
  EXPECT_EQ(r6.num_triangles(), 24576u);
  EXPECT_EQ(r6.num_vertices(), 12545u);
}

TEST(Refine, OutOfRangeMarkThrows) {
  EXPECT_THROW((void)refine_nvb(make_lshape_initial(), MarkedSet({6})), Error);
}

TEST(RefineProperty, RandomMarkingKeepsInvariants) {
  oracle::Gen gen(424242);
  for (int run = 0; run < 4; ++run) {
    Mesh m = run % 2 == 0 ? make_lshape_initial() : make_unit_square(2);
    const double area0 = m.total_area();
    const double angle0 = min_angle(m);
    std::set<std::pair<long long, long long>> shapes;
    for (int gen_i = 0; gen_i < 10; ++gen_i) {
      std::vector<std::size_t> mk;
      for (std::size_t t = 0; t < m.num_triangles(); ++t)
        if (gen.uniform(0, 1) < 0.2) mk.push_back(t);
      if (mk.empty()) mk.push_back(gen.index(m.num_triangles()));
      const Mesh r = refine_nvb(m, MarkedSet(mk));
      expect_conforming(r);
      EXPECT_NEAR(r.total_area(), area0, 1e-13 * area0);
      EXPECT_GE(min_angle(r), angle0 - 1e-12);
      EXPECT_EQ(r.generation(), m.generation() + 1);
      ASSERT_EQ(r.parents().size(), r.num_triangles());
      // every marked triangle was split; children partition the parent
      std::vector<double> child_area(m.num_triangles(), 0.0);
      std::vector<int> nchild(m.num_triangles(), 0);
      for (std::size_t t = 0; t < r.num_triangles(); ++t) {
        const auto p = r.parents()[t];
        child_area[p] += r.area(t);
        ++nchild[p];
        EXPECT_EQ(r.triangles()[t].region, m.triangles()[p].region);
      }
      for (std::size_t p = 0; p < m.num_triangles(); ++p) {
        EXPECT_NEAR(child_area[p], m.area(p), 1e-14);
        EXPECT_LE(nchild[p], 4);
      }
      for (auto t : mk) EXPECT_GE(nchild[t], 2);
      m = r;
      // similarity class by sorted squared side ratios
      for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto c = m.corners(t);
        double s[3];
        for (int k = 0; k < 3; ++k) {
          const auto& p = c[k];
          const auto& q = c[(k + 1) % 3];
          s[k] = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
        }
        std::sort(s, s + 3);
        shapes.insert({std::llround(1e6 * s[1] / s[2]), std::llround(1e6 * s[0] / s[2])});
      }
    }
    // all initial triangles are congruent right isosceles triangles
    EXPECT_LE(shapes.size(), 4u);
  }
}

TEST(Dorfler, Examples) {
  const double a[] = {3, 2, 1};
  EXPECT_EQ(dorfler_mark(a, 1.0).size(), 3u);
  const double b[] = {3, 0, 0};
  auto mb = dorfler_mark(b, 0.5);
  ASSERT_EQ(mb.size(), 1u);
  EXPECT_EQ(mb.elements()[0], 0u);
  const double c[] = {1, 1, 1, 1};
  auto mc = dorfler_mark(c, 0.5);
  ASSERT_EQ(mc.size(), 1u);
  EXPECT_EQ(mc.elements()[0], 0u);
  const double z[] = {0, 0};
  EXPECT_THROW((void)dorfler_mark(z, 0.5), Error);
}

TEST(DorflerProperty, MinimalAndSufficient) {
  oracle::Gen gen(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> eta(1 + gen.index(60));
    for (auto& e : eta) e = gen.uniform(0, 1) < 0.2 ? 0.0 : gen.uniform(0, 2);
    eta[0] = 1.0;
    const double theta = gen.uniform(0.05, 1.0);
    const auto ms = dorfler_mark(eta, theta);
    double total = 0, marked = 0;
    for (auto e : eta) total += e * e;
    for (auto i : ms.elements()) marked += eta[i] * eta[i];
    EXPECT_GE(marked, theta * theta * total * (1 - 1e-14));
    // minimality: the |M|-1 largest indicators are not enough
    std::vector<double> sorted = eta;
    std::sort(sorted.rbegin(), sorted.rend());
    double best = 0;
    for (std::size_t i = 0; i + 1 < ms.size(); ++i) best += sorted[i] * sorted[i];
    EXPECT_LT(best, theta * theta * total * (1 + 1e-14));
  }
}

TEST(MeshIo, RoundTripBitExact) {
  auto m = refine_nvb(make_lshape_initial(), MarkedSet({0, 3}));
  m = refine_nvb(m, MarkedSet({1, 5, 7}));
  m = with_boundary_markers(m, [](const Point& p) { return p.x > 0.5 ? BoundaryMarker::neumann : BoundaryMarker::dirichlet; });
  const auto text = mesh_to_string(m);
  const auto back = mesh_from_string(text, m.generation());
  EXPECT_EQ(back, m);
  EXPECT_EQ(mesh_to_string(back), text);
  // non-dyadic coordinates survive too
  std::vector<Point> v = {{0.1, 0.2}, {1.0 / 3.0, 0.2}, {0.1, 2.0 / 7.0}};
  Mesh t(v, {{{0, 1, 2}, region_positive, 0}}, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_EQ(mesh_from_string(mesh_to_string(t)), t);
}

TEST(MeshIo, TruncatedInputRejected) {
  auto text = mesh_to_string(make_lshape_initial());
  text.resize(text.size() / 2);
  try {
    (void)mesh_from_string(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
  }
}
