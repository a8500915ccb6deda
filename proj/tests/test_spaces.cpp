#include "foldsim/spaces.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace foldsim;

namespace {

MeshData single_triangle(EdgeTag tag) {
  MeshData d;
  d.vertices = {Point2(0, 0), Point2(1, 0), Point2(0, 1)};
  d.triangles = {{0, 1, 2}};
  d.edge_info[edge_key(0, 1)] = {tag, -1};
  d.edge_info[edge_key(1, 2)] = {tag, -1};
  d.edge_info[edge_key(0, 2)] = {tag, -1};
  return d;
}

// Rectangle whose boundary edges are all free for the HHJ space.
std::shared_ptr<const Mesh> free_rectangle(int nx, int ny) {
  MeshData d = build_rectangle_mesh(Point2(0, 0), Point2(1, 1), nx, ny).data();
  const Mesh m(d);
  for (const auto& e : m.edges()) {
    if (e.on_boundary()) d.edge_info[edge_key(e.v[0], e.v[1])] = {EdgeTag::Symmetry, -1};
  }
  return std::make_shared<const Mesh>(d);
}

// Two unit squares side by side, crease along x = 1, sides in subdomains 1 and 2.
std::shared_ptr<const Mesh> creased_pair() {
  MeshData d = build_rectangle_mesh(Point2(0, 0), Point2(2, 1), 2, 1).data();
  d.subdomains = {1, 1, 2, 2};
  d.edge_info[edge_key(1, 4)] = {EdgeTag::Crease, -1};
  d.crease_vertices = {1, 4};
  return std::make_shared<const Mesh>(d);
}

std::shared_ptr<const Mesh> curved_scenario(double h) {
  return std::make_shared<const Mesh>(build_scenario_mesh(h, reference_crease(CreaseSetting::S1), 3));
}

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

double scalar_value(const LagrangeSpace& s, const Eigen::VectorXd& c, int t, const Point2& xi) {
  const LagrangeValues b = s.evaluate(t, xi);
  double u = 0.0;
  for (std::size_t a = 0; a < s.element_dofs(t).size(); ++a) {
    u += b.phi[static_cast<Eigen::Index>(a)] * c[s.element_dofs(t)[a]];
  }
  return u;
}

}  // namespace

TEST(Quadrature, ClosedForms) {
  double sum = 0.0, lin = 0.0, x3y3 = 0.0;
  for (const auto& q : triangle_rule(2)) {
    sum += q.weight;
    lin += q.weight * (q.xi.x() + q.xi.y());
    EXPECT_GT(q.weight, 0.0);
  }
  for (const auto& q : triangle_rule(6)) x3y3 += q.weight * std::pow(q.xi.x() * q.xi.y(), 3);
  EXPECT_NEAR(sum, 0.5, 1e-15);
  EXPECT_NEAR(lin, 1.0 / 3.0, 1e-14);
  // 3! 3! / 8!
  EXPECT_NEAR(x3y3, 36.0 / 40320.0, 1e-16);
  EXPECT_THROW(triangle_rule(kMaxQuadratureDegree + 1), InvalidInput);
  double sub = 0.0;
  for (const auto& q : subdivided_triangle_rule(4, 2)) sub += q.weight * q.xi.x() * q.xi.x() * q.xi.y();
  EXPECT_NEAR(sub, 2.0 / 120.0, 1e-15);
}

TEST(Lagrange, SingleTriangleDofs) {
  auto mesh = std::make_shared<const Mesh>(single_triangle(EdgeTag::Boundary));
  EXPECT_EQ(build_lagrange(mesh, 1, false).num_dofs(), 3);
  EXPECT_EQ(build_lagrange(mesh, 3, false).num_dofs(), 10);
  EXPECT_THROW(build_lagrange(mesh, 1, true), InvalidInput);
  EXPECT_THROW(build_lagrange(mesh, 4, false), InvalidInput);
}

TEST(Lagrange, SlitDuplicatesInteriorEdgeNodes) {
  auto mesh = creased_pair();
  const auto plain = build_lagrange(mesh, 3, false);
  const auto slit = build_lagrange(mesh, 3, true);
  EXPECT_EQ(slit.num_dofs(), plain.num_dofs() + 2);
}

TEST(Lagrange, AffineReproduction) {
  auto mesh = curved_scenario(0.2);
  const auto s = build_lagrange(mesh, 1, false);
  const Eigen::VectorXd c = s.interpolate([](const Point2& p) { return Vec3(p.x(), p.y(), 0.0); });
  for (int t = 0; t < mesh->num_triangles(); t += 7) {
    if (mesh->triangle_geometry_order(t) > 1) continue;
    const Point2 xi(0.2, 0.3);
    const DeformationValues d = evaluate_deformation(s, c, t, xi);
    const Point2 x = map_point(*mesh, t, xi).x;
    EXPECT_NEAR((d.v.head<2>() - x).norm(), 0.0, 1e-12);
  }
}

TEST(Lagrange, QuadraticHessian) {
  auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(Point2(0, 0), Point2(1, 1), 3, 3));
  const auto s = build_lagrange(mesh, 2, false);
  const Eigen::VectorXd c = s.interpolate([](const Point2& p) { return Vec3(p.x() * p.x(), 0, 0); });
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    const DeformationValues d = evaluate_deformation(s, c, t, Point2(0.25, 0.25));
    EXPECT_NEAR((d.hess[0] - Mat2{{2, 0}, {0, 0}}).norm(), 0.0, 1e-12);
  }
}

TEST(Lagrange, CurvedJacobianPositive) {
  auto mesh = curved_scenario(0.1);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    for (const auto& q : triangle_rule(element_quadrature_degree(*mesh, t, 3))) {
      EXPECT_GT(map_point(*mesh, t, q.xi).det, 0.0);
    }
  }
  EXPECT_THROW(map_point(*mesh, 0, Point2(0.8, 0.8)), InvalidInput);
}

TEST(Lagrange, ChainRuleHessianMatchesFiniteDifferences) {
  auto mesh = curved_scenario(0.2);
  const auto s = build_lagrange(mesh, 3, false);
  const Eigen::VectorXd c = random_vector(s.num_dofs(), 3);
  const double h = 1e-5;
  int checked = 0;
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    if (mesh->triangle_geometry_order(t) == 1) continue;
    const Point2 xi(0.3, 0.4);
    const auto grad_at = [&](const Point2& p) {
      const LagrangeValues b = s.evaluate(t, p);
      Vec2 g = Vec2::Zero();
      for (std::size_t a = 0; a < s.element_dofs(t).size(); ++a) {
        g += c[s.element_dofs(t)[a]] * b.grad.row(static_cast<Eigen::Index>(a)).transpose();
      }
      return g;
    };
    Mat2 dg;  // d(grad)/dxi
    dg.col(0) = (grad_at(xi + Vec2(h, 0)) - grad_at(xi - Vec2(h, 0))) / (2 * h);
    dg.col(1) = (grad_at(xi + Vec2(0, h)) - grad_at(xi - Vec2(0, h))) / (2 * h);
    const Mat2 fd = dg * map_point(*mesh, t, xi).Finv;
    const LagrangeValues b = s.evaluate(t, xi);
    Eigen::Vector3d hc = Eigen::Vector3d::Zero();
    for (std::size_t a = 0; a < s.element_dofs(t).size(); ++a) {
      hc += c[s.element_dofs(t)[a]] * b.hess.row(static_cast<Eigen::Index>(a)).transpose();
    }
    EXPECT_LT((fd - sym_from(hc)).norm() / sym_from(hc).norm(), 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(Lagrange, CylinderInterpolationConvergesCubically) {
  const auto cyl = [](const Point2& p) { return Vec3(std::sin(p.x()), p.y(), std::cos(p.x())); };
  std::vector<double> err;
  for (int n : {2, 4, 8}) {
    auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(Point2(0, 0), Point2(1, 1), n, n));
    const auto s = build_lagrange(mesh, 3, false);
    const Eigen::VectorXd c = s.interpolate(cyl);
    double e2 = 0.0;
    for (int t = 0; t < mesh->num_triangles(); ++t) {
      for (const auto& q : triangle_rule(8)) {
        const MappedPoint mp = map_point(*mesh, t, q.xi);
        const DeformationValues d = evaluate_deformation(s, c, t, q.xi);
        Mat32 g;
        g << std::cos(mp.x.x()), 0, 0, 1, -std::sin(mp.x.x()), 0;
        e2 += q.weight * mp.det * ((d.v - cyl(mp.x)).squaredNorm() + (d.grad - g).squaredNorm());
      }
    }
    err.push_back(std::sqrt(e2));
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 2.7);
  EXPECT_GE(std::log2(err[1] / err[2]), 2.7);
}

TEST(Lagrange, TracesAgreeAcrossInteriorEdges) {
  auto mesh = curved_scenario(0.2);
  const auto s = build_lagrange(mesh, 3, false);
  const Eigen::VectorXd c = random_vector(s.num_dofs(), 5);
  for (int e = 0; e < mesh->num_edges(); ++e) {
    if (mesh->edge(e).on_boundary()) continue;
    for (double sp : {0.1, 0.5, 0.87}) {
      const EdgePoint a = edge_point(*mesh, e, 0, sp);
      const EdgePoint b = edge_point(*mesh, e, 1, sp);
      EXPECT_NEAR((a.map.x - b.map.x).norm(), 0.0, 1e-12);
      EXPECT_NEAR(scalar_value(s, c, mesh->edge(e).tri[0], a.xi), scalar_value(s, c, mesh->edge(e).tri[1], b.xi), 1e-10);
    }
  }
}

TEST(Lagrange, SlitTracesCoupleOnlyAtCreaseVertices) {
  auto mesh = std::make_shared<const Mesh>(build_scenario_mesh(0.2, reference_crease(CreaseSetting::S3), 1));
  const auto s = build_lagrange(mesh, 3, true);
  const Eigen::VectorXd c = random_vector(s.num_dofs(), 9);
  const auto& cv = mesh->crease_vertices();
  int differ = 0;
  for (int e : mesh->edges_with_tag(EdgeTag::Crease)) {
    const Edge& ed = mesh->edge(e);
    for (int end = 0; end < 2; ++end) {
      const double sp = end;
      const double a = scalar_value(s, c, ed.tri[0], edge_point(*mesh, e, 0, sp).xi);
      const double b = scalar_value(s, c, ed.tri[1], edge_point(*mesh, e, 1, sp).xi);
      if (std::find(cv.begin(), cv.end(), ed.v[static_cast<std::size_t>(end)]) != cv.end()) {
        EXPECT_NEAR(a, b, 1e-10);
      }
    }
    const double a = scalar_value(s, c, ed.tri[0], edge_point(*mesh, e, 0, 0.5).xi);
    const double b = scalar_value(s, c, ed.tri[1], edge_point(*mesh, e, 1, 0.5).xi);
    differ += std::abs(a - b) > 1e-6 ? 1 : 0;
  }
  EXPECT_EQ(differ, static_cast<int>(mesh->edges_with_tag(EdgeTag::Crease).size()));
}

TEST(Hhj, DofCounts) {
  auto free_tri = std::make_shared<const Mesh>(single_triangle(EdgeTag::Symmetry));
  auto clamped = std::make_shared<const Mesh>(single_triangle(EdgeTag::Boundary));
  EXPECT_EQ(build_hhj(free_tri, 0).num_dofs(), 3);
  EXPECT_EQ(build_hhj(clamped, 0).num_dofs(), 0);
  EXPECT_EQ(build_hhj(free_tri, 2).num_dofs(), 18);
  EXPECT_EQ(build_hhj(clamped, 2).num_dofs(), 9);
  EXPECT_THROW(build_hhj(free_tri, -1), InvalidInput);
}

TEST(Hhj, ReproducesPolynomials) {
  auto mesh = free_rectangle(3, 2);
  const auto f0 = [](const Point2&) { return Eigen::Vector3d(1.5, -0.25, 2.0); };
  const auto f2 = [](const Point2& p) {
    return Eigen::Vector3d(1 + p.x() * p.y(), p.x() - 2 * p.y() * p.y(), 0.5 * p.x() * p.x() + p.y());
  };
  for (int q : {0, 1, 2}) {
    const auto s = build_hhj(mesh, q);
    const auto& f = q == 2 ? std::function<Eigen::Vector3d(const Point2&)>(f2) : f0;
    const Eigen::VectorXd c = s.interpolate(f);
    for (int t = 0; t < mesh->num_triangles(); ++t) {
      for (const auto& qp : triangle_rule(3)) {
        const Mat2 m = evaluate_moment(s, c, t, qp.xi);
        EXPECT_NEAR((m - sym_from(f(map_point(*mesh, t, qp.xi).x))).norm(), 0.0, 1e-12);
      }
    }
  }
}

TEST(Hhj, NormalNormalContinuityAndConstraints) {
  for (auto setting : {CreaseSetting::S1, CreaseSetting::S3}) {
    auto mesh = std::make_shared<const Mesh>(build_scenario_mesh(0.2, reference_crease(setting), 3));
    const auto s = build_hhj(mesh, 2);
    const Eigen::VectorXd c = random_vector(s.num_dofs(), 11);
    for (int e = 0; e < mesh->num_edges(); ++e) {
      const Edge& ed = mesh->edge(e);
      for (double sp : {0.0, 0.3, 0.77}) {
        const EdgePoint a = edge_point(*mesh, e, 0, sp);
        const double mnn_a = a.normal.dot(evaluate_moment(s, c, ed.tri[0], a.xi) * a.normal);
        if (HhjSpace::edge_constrained(ed.tag)) {
          EXPECT_NEAR(mnn_a, 0.0, 1e-10);
          if (!ed.on_boundary()) {
            const EdgePoint b = edge_point(*mesh, e, 1, sp);
            EXPECT_NEAR(b.normal.dot(evaluate_moment(s, c, ed.tri[1], b.xi) * b.normal), 0.0, 1e-10);
          }
        } else if (!ed.on_boundary()) {
          const EdgePoint b = edge_point(*mesh, e, 1, sp);
          const double mnn_b = b.normal.dot(evaluate_moment(s, c, ed.tri[1], b.xi) * b.normal);
          EXPECT_NEAR(mnn_a, mnn_b, 1e-10);
        }
      }
    }
  }
}

TEST(Lagrange, InterpolationRoundTrip) {
  auto mesh = curved_scenario(0.2);
  const auto s = build_lagrange(mesh, 3, false);
  const Eigen::VectorXd c = random_vector(s.num_dofs(), 13);
  // evaluate the field at every node through its owning element, re-interpolate
  Eigen::VectorXd back(s.num_dofs());
  const auto& nodes = LagrangeBasis::get(3).nodes();
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    for (std::size_t n = 0; n < nodes.size(); ++n) back[s.element_dofs(t)[n]] = scalar_value(s, c, t, nodes[n]);
  }
  EXPECT_LT((back - c).cwiseAbs().maxCoeff(), 1e-12);
}
