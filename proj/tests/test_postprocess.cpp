#include "foldsim/postprocess.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace foldsim;

namespace {

std::shared_ptr<const Mesh> scenario(CreaseSetting s, int g = 1, double h = 0.25) {
  return std::make_shared<const Mesh>(build_scenario_mesh(h, reference_crease(s), g));
}

Vec3 cylinder(const Point2& x) { return {std::sin(x.x()), x.y(), std::cos(x.x())}; }

}  // namespace

TEST(LpNorm, ConstantField) {
  const FoldProblem p(scenario(CreaseSetting::S1, 2), 3, false);
  const double c = 2.5;
  // a constant moment violates the boundary constraints of the scenario, so
  // use an unconstrained rectangle of area 1
  MeshData d = build_rectangle_mesh(Point2(0, 0), Point2(2, 0.5), 4, 2).data();
  const Mesh tmp(d);
  for (const auto& e : tmp.edges()) {
    if (e.on_boundary()) d.edge_info[edge_key(e.v[0], e.v[1])] = {EdgeTag::Symmetry, -1};
  }
  const HhjSpace free(std::make_shared<const Mesh>(d), 2);
  const Eigen::VectorXd m = free.interpolate([&](const Point2&) { return Eigen::Vector3d(c, 0, 0); });
  for (double q : {2.0, 64.0}) EXPECT_NEAR(lp_norm(free, m, q), c, 1e-12);
  EXPECT_EQ(lp_norm(p.hhj(), Eigen::VectorXd::Zero(p.num_m()), 64.0), 0.0);
}

TEST(LpNorm, RescaledMatchesNaive) {
  const Mesh mesh = build_rectangle_mesh(Point2(0, 0), Point2(1, 1), 3, 3);
  const auto f = [&](int t, const Point2& xi) {
    const Point2 x = map_point(mesh, t, xi).x;
    return 1.0 + std::sin(3.0 * x.x()) * x.y();
  };
  const auto rule = [](int) { return subdivided_triangle_rule(10, 2); };
  for (double p : {2.0, 8.0, 64.0}) {
    double naive = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      for (const auto& q : rule(t)) naive += q.weight * map_point(mesh, t, q.xi).det * std::pow(f(t, q.xi), p);
    }
    naive = std::pow(naive, 1.0 / p);
    EXPECT_NEAR(lp_norm(mesh, f, p, rule), naive, 1e-10 * naive);
  }
  // no overflow where the naive power would
  const auto big = [](int, const Point2&) { return 1e300; };
  EXPECT_NEAR(lp_norm(mesh, big, 64.0, rule) / 1e300, 1.0, 1e-12);
}

TEST(LpNorm, DominatesSubdomain) {
  const FoldProblem p(scenario(CreaseSetting::S2), 2, false);
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd m(p.num_m());
  for (int i = 0; i < m.size(); ++i) m[i] = u(gen);
  const Mesh& mesh = p.mesh();
  const auto rule = [&](int t) { return lp_rule(p.hhj(), t, 64.0); };
  const auto full = [&](int t, const Point2& xi) { return evaluate_moment(p.hhj(), m, t, xi).norm(); };
  const auto part = [&](int t, const Point2& xi) { return mesh.subdomain(t) == 1 ? full(t, xi) : 0.0; };
  for (double q : {2.0, 64.0}) {
    EXPECT_GE(lp_norm(mesh, full, q, rule), lp_norm(mesh, part, q, rule));
  }
  EXPECT_NEAR(lp_norm(mesh, full, 64.0, rule), lp_norm(p.hhj(), m, 64.0), 1e-12);
  EXPECT_THROW(lp_norm(mesh, full, 0.5, rule), InvalidInput);
}

TEST(PointProbe, RestStateAtProbe) {
  for (auto s : {CreaseSetting::S1, CreaseSetting::S2, CreaseSetting::S3}) {
    const FoldProblem p(scenario(s, s == CreaseSetting::S1 ? 3 : 1), 3, s == CreaseSetting::S3);
    const Vec3 x = point_probe(p.lagrange(), p.rest_state().v, Point2(2, 0));
    EXPECT_NEAR((x - Vec3(2, 0, 0)).norm(), 0.0, 1e-14);
  }
}

TEST(PointProbe, NodalValues) {
  const FoldProblem p(scenario(CreaseSetting::S1, 3), 3, false);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd v(p.num_v());
  for (int i = 0; i < v.size(); ++i) v[i] = u(gen);
  const auto pts = p.lagrange().dof_points();
  for (std::size_t d = 0; d < pts.size(); d += 7) {
    const Vec3 x = point_probe(p.lagrange(), v, pts[d]);
    EXPECT_NEAR((x - v.segment<3>(3 * static_cast<Eigen::Index>(d))).norm(), 0.0, 1e-12) << d;
  }
}

TEST(PointProbe, CurvedElementsInverted) {
  const auto mesh = scenario(CreaseSetting::S1, 3);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    if (mesh->triangle_geometry_order(t) == 1) continue;
    for (const Point2 xi : {Point2(0.2, 0.3), Point2(0.6, 0.1), Point2(0.05, 0.9)}) {
      const Point2 x = map_point(*mesh, t, xi).x;
      const auto loc = locate(*mesh, x);
      ASSERT_TRUE(loc.has_value());
      EXPECT_LT((map_point(*mesh, loc->triangle, loc->xi).x - x).norm(), 1e-12);
    }
  }
}

TEST(PointProbe, OutsideRejected) {
  const FoldProblem p(scenario(CreaseSetting::S2), 2, false);
  EXPECT_THROW(point_probe(p.lagrange(), p.rest_state().v, Point2(2.1, 0)), InvalidInput);
  EXPECT_THROW(point_probe(p.lagrange(), p.rest_state().v, Point2(1, 0.1)), InvalidInput);
}

TEST(EnergyDensity, FlatAndCylinder) {
  const FoldProblem p(scenario(CreaseSetting::S2), 3, false);
  for (double e : energy_density(p, p.rest_state(), 10.0)) EXPECT_EQ(e, 0.0);
  EXPECT_EQ(isometry_violation(p, p.rest_state()), 0.0);

  State s = p.rest_state();
  s.v = p.lagrange().interpolate(cylinder);
  for (double e : energy_density(p, s, 10.0)) EXPECT_NEAR(e, 10.0 / 24.0, 5e-3);
  EXPECT_LT(isometry_violation(p, s), 1e-3);
}

TEST(EnergyDensity, CurvedGeometryRestState) {
  // the identity lies in the isoparametric space only when k >= geometry order
  EXPECT_LT(isometry_violation(FoldProblem(scenario(CreaseSetting::S1, 3), 3, false),
                               FoldProblem(scenario(CreaseSetting::S1, 3), 3, false).rest_state()),
            1e-12);
  const FoldProblem p(scenario(CreaseSetting::S1, 3), 2, false);
  EXPECT_GT(isometry_violation(p, p.rest_state()), 1e-6);
}

TEST(Export, NormsCsvAndVtu) {
  const FoldProblem p(scenario(CreaseSetting::S3), 2, true);
  State s = p.rest_state();
  s.v = p.lagrange().interpolate(cylinder);
  std::ostringstream csv;
  write_norms_csv(csv, p, {p.rest_state(), s}, Point2(2, 0));
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "step,t,deflection,L2,L64,violation");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 2);

  std::ostringstream vtu;
  write_vtu(vtu, p, s, 10.0);
  const std::string x = vtu.str();
  const std::size_t cells = 4u * static_cast<std::size_t>(p.mesh().num_triangles());
  EXPECT_NE(x.find("NumberOfCells=\"" + std::to_string(cells) + "\""), std::string::npos);
  EXPECT_NE(x.find("energy_density"), std::string::npos);
  EXPECT_EQ(x.substr(x.size() - 11), "</VTKFile>\n");
}
