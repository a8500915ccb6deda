#include "foldsim/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace foldsim;

namespace {

int count_tag(const Mesh& m, EdgeTag tag) { return static_cast<int>(m.edges_with_tag(tag).size()); }

}  // namespace

TEST(ReferenceCrease, EndpointsOnUnitCircle) {
  for (auto s : {CreaseSetting::S1, CreaseSetting::S2, CreaseSetting::S3}) {
    const CreaseSpec c = reference_crease(s);
    EXPECT_NEAR(c.point(0.0).x(), 1.0, 1e-15);
    EXPECT_NEAR(c.point(0.0).y(), 0.0, 1e-15);
    EXPECT_NEAR(c.point(c.length()).x(), std::sqrt(3.0) / 2.0, 1e-15);
    EXPECT_NEAR(c.point(c.length()).y(), -0.5, 1e-15);
    EXPECT_NEAR(c.length(), kPi / 6.0, 1e-15);
    for (const auto& v : c.vertices()) EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  }
}

TEST(ReferenceCrease, PolygonalPathStartsOnChord) {
  const CreaseSpec c = reference_crease(CreaseSetting::S2, 4);
  ASSERT_EQ(c.path.size(), 3u);
  EXPECT_FALSE(c.path_is_vertex[0]);
  EXPECT_NEAR(c.path[0].x(), std::cos(kPi / 18.0), 1e-14);
  EXPECT_NEAR(c.path[1].y(), -std::sin(kPi / 18.0), 1e-14);
  EXPECT_EQ(c.vertices().size(), 2u);

  const CreaseSpec odd = reference_crease(CreaseSetting::S2, 5);
  EXPECT_TRUE(odd.path_is_vertex[0]);
  EXPECT_NEAR(odd.path[0].x(), 1.0, 1e-15);
}

TEST(ReferenceCrease, DerivativeIsUnitTangent) {
  const CreaseSpec c = reference_crease(CreaseSetting::S1);
  for (double s : {0.0, 0.1, 0.3, c.length()}) {
    const Vec2 d = c.derivative(s);
    EXPECT_NEAR(d.norm(), 1.0, 1e-14);
    const Vec2 fd = (c.point(s + 1e-6) - c.point(s - 1e-6)) / 2e-6;
    EXPECT_NEAR((fd - d).norm(), 0.0, 1e-8);
  }
}

TEST(CreasePolyline, ChordSagittaQuadratic) {
  const CreaseSpec c = reference_crease(CreaseSetting::S1);
  double prev = 0.0;
  for (int n : {1, 3, 7, 15}) {  // 2, 4, 8, 16 segments
    const auto pts = crease_polyline(c, n);
    ASSERT_EQ(static_cast<int>(pts.size()), n + 2);
    double sag = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      sag = std::max(sag, 1.0 - (0.5 * (pts[i] + pts[i + 1])).norm());
    }
    if (prev > 0.0) EXPECT_NEAR(prev / sag, 4.0, 0.5);
    prev = sag;
  }
}

TEST(ScenarioMesh, AreaTagsAndComponents) {
  for (auto s : {CreaseSetting::S1, CreaseSetting::S2, CreaseSetting::S3}) {
    const Mesh m = build_scenario_mesh(0.2, reference_crease(s), 2);
    EXPECT_NEAR(m.area(), 1.0, 1e-12) << to_string(s);
    EXPECT_EQ(m.components_without_crease(), 2);
    EXPECT_GT(count_tag(m, EdgeTag::Dirichlet), 0);
    EXPECT_GT(count_tag(m, EdgeTag::Symmetry), 0);
    double dirichlet_length = 0.0;
    for (int e : m.edges_with_tag(EdgeTag::Dirichlet)) {
      const auto& ed = m.edge(e);
      dirichlet_length += (m.vertices()[static_cast<std::size_t>(ed.v[1])] -
                           m.vertices()[static_cast<std::size_t>(ed.v[0])]).norm();
      EXPECT_NEAR(m.vertices()[static_cast<std::size_t>(ed.v[0])].y(), -0.5, 1e-15);
    }
    EXPECT_NEAR(dirichlet_length, 0.2, 1e-12);
    for (int t = 0; t < m.num_triangles(); ++t) {
      Point2 c = Point2::Zero();
      for (int v : m.triangles()[static_cast<std::size_t>(t)]) c += m.vertices()[static_cast<std::size_t>(v)];
      c /= 3.0;
      EXPECT_EQ(m.subdomain(t), c.norm() < 1.0 ? 1 : 2);
    }
  }
}

TEST(ScenarioMesh, CreaseEndpointsAndVertices) {
  const Mesh m = build_scenario_mesh(0.1, reference_crease(CreaseSetting::S1), 3);
  const auto path = m.crease_path_vertices();
  bool top = false, bottom = false;
  for (int v : path) {
    const Point2& p = m.vertices()[static_cast<std::size_t>(v)];
    EXPECT_NEAR(p.norm(), 1.0, 1e-14);
    top = top || (p - Point2(1.0, 0.0)).norm() < 1e-14;
    bottom = bottom || (p - Point2(std::sqrt(3.0) / 2.0, -0.5)).norm() < 1e-14;
  }
  EXPECT_TRUE(top);
  EXPECT_TRUE(bottom);
  EXPECT_EQ(m.crease_vertices().size(), 2u);
  // curved edge nodes lie on the circle
  for (int e : m.edges_with_tag(EdgeTag::Crease)) {
    EXPECT_NEAR(m.edge_point(e, 1.0 / 3.0).norm(), 1.0, 1e-14);
    EXPECT_NEAR(m.edge_point(e, 0.5).norm(), 1.0, 1e-6);
  }
}

TEST(ScenarioMesh, ProbeIsVertex) {
  const Mesh m = build_scenario_mesh(0.2, reference_crease(CreaseSetting::S2), 1);
  bool found = false;
  for (const auto& p : m.vertices()) found = found || (p - Point2(2.0, 0.0)).norm() < 1e-15;
  EXPECT_TRUE(found);
}

TEST(ScenarioMesh, RejectsBadInput) {
  EXPECT_THROW(build_scenario_mesh(0.0, reference_crease(CreaseSetting::S1), 2), InvalidInput);
  EXPECT_THROW(build_scenario_mesh(0.1, reference_crease(CreaseSetting::S1), 4), InvalidInput);
  CreaseSpec bad = reference_crease(CreaseSetting::S2);
  bad.path[1] *= 1.01;
  EXPECT_THROW(build_scenario_mesh(0.1, bad, 1), InvalidInput);
}

TEST(Refinement, UniformCountsAndArea) {
  const Mesh m = build_scenario_mesh(0.2, reference_crease(CreaseSetting::S1), 2);
  const Mesh r = refine_uniform(m);
  EXPECT_EQ(r.num_triangles(), 4 * m.num_triangles());
  int interior = 0;
  for (const auto& e : m.edges()) interior += e.on_boundary() ? 0 : 1;
  int interior_r = 0;
  for (const auto& e : r.edges()) interior_r += e.on_boundary() ? 0 : 1;
  EXPECT_EQ(interior_r, 2 * interior + 3 * m.num_triangles());
  EXPECT_NEAR(r.area(), 1.0, 1e-12);
  EXPECT_EQ(r.components_without_crease(), 2);
  EXPECT_EQ(count_tag(r, EdgeTag::Crease), 2 * count_tag(m, EdgeTag::Crease));
  for (int v : r.crease_path_vertices()) {
    EXPECT_NEAR(r.vertices()[static_cast<std::size_t>(v)].norm(), 1.0, 1e-14);
  }
}

TEST(Refinement, GeometricShrinksCenterElements) {
  const Mesh m = build_rectangle_mesh(Point2(0, 0), Point2(1, 1), 4, 4);
  const Mesh r = refine_geometric(m, {Point2(0.5, 0.5)}, 0.125, 2);
  EXPECT_NEAR(r.area(), 1.0, 1e-13);
  double h = 0.0;
  for (int t = 0; t < r.num_triangles(); ++t) {
    const auto& tri = r.triangles()[static_cast<std::size_t>(t)];
    bool touches = false;
    for (int v : tri) touches = touches || (r.vertices()[static_cast<std::size_t>(v)] - Point2(0.5, 0.5)).norm() < 1e-12;
    if (!touches) continue;
    for (int i = 0; i < 3; ++i) {
      h = std::max(h, (r.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])] -
                       r.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>((i + 1) % 3)])]).norm());
    }
  }
  EXPECT_NEAR(h, 0.25 * std::sqrt(2.0) / 64.0, 1e-12);
  EXPECT_THROW(refine_geometric(m, {}, 1.5, 1), InvalidInput);
}

TEST(Refinement, TowardsCreaseKeepsTopology) {
  const Mesh m = build_scenario_mesh(0.2, reference_crease(CreaseSetting::S3), 1);
  const Mesh r = refine_towards_crease(m, 0.5, 2);
  EXPECT_NEAR(r.area(), 1.0, 1e-12);
  EXPECT_EQ(r.components_without_crease(), 2);
  EXPECT_EQ(r.crease_vertices(), m.crease_vertices());
}

TEST(PolygonMesh, CornersAndDisk) {
  const Mesh p = build_polygon_mesh(8, 1);
  EXPECT_EQ(p.crease_vertices().size(), 8u);
  EXPECT_NEAR(p.area(), 0.5 * 8 * std::sin(2 * kPi / 8), 1e-12);
  // cubic arcs: area error drops at least eightfold per refinement
  const double e2 = std::abs(build_polygon_mesh(8, 2, true, 3).area() - kPi);
  const double e3 = std::abs(build_polygon_mesh(8, 3, true, 3).area() - kPi);
  EXPECT_LT(e2, 5e-5);
  EXPECT_GT(e2 / e3, 8.0);
}

TEST(MeshIO, RoundTrip) {
  const Mesh m = build_scenario_mesh(0.2, reference_crease(CreaseSetting::S1), 3);
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  EXPECT_EQ(r.num_triangles(), m.num_triangles());
  EXPECT_EQ(r.num_edges(), m.num_edges());
  EXPECT_EQ(count_tag(r, EdgeTag::Crease), count_tag(m, EdgeTag::Crease));
  EXPECT_NEAR(r.area(), m.area(), 1e-14);
}

TEST(MeshIO, RejectsInconsistentControlPoints) {
  const Mesh m = build_scenario_mesh(0.2, reference_crease(CreaseSetting::S1), 2);
  std::stringstream ss;
  write_mesh(ss, m);
  std::string text = ss.str();
  text.replace(text.find("c 0 0 1"), 7, "c 0 0 1.1");
  std::stringstream bad(text);
  EXPECT_THROW(read_mesh(bad), InvalidInput);
}

TEST(Mesh, RejectsNonConforming) {
  MeshData d;
  d.vertices = {Point2(0, 0), Point2(1, 0), Point2(0, 1), Point2(1, 1), Point2(-1, 0)};
  d.triangles = {{0, 1, 2}, {1, 3, 2}, {0, 2, 1}};
  EXPECT_THROW(Mesh{d}, InvalidInput);
}
