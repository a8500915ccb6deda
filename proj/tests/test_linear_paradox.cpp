#include "foldsim/linear_paradox.hpp"

#include "plate_oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace foldsim;

namespace {

constexpr double kPiTest = std::numbers::pi;

AnalyticField bubble_disk() {
  return {[](const Point2& x) { return 1.0 - x.squaredNorm(); },
          [](const Point2& x) { return Vec2(-2.0 * x); },
          [](const Point2&) { return Eigen::Vector3d(-2.0, 0.0, -2.0); }};
}

AnalyticField sine_square() {
  return {[](const Point2& x) { return std::sin(kPiTest * x.x()) * std::sin(kPiTest * x.y()); },
          [](const Point2& x) {
            return Vec2(kPiTest * std::cos(kPiTest * x.x()) * std::sin(kPiTest * x.y()),
                        kPiTest * std::sin(kPiTest * x.x()) * std::cos(kPiTest * x.y()));
          },
          [](const Point2& x) {
            const double s = std::sin(kPiTest * x.x()) * std::sin(kPiTest * x.y());
            const double c = std::cos(kPiTest * x.x()) * std::cos(kPiTest * x.y());
            return Eigen::Vector3d(-kPiTest * kPiTest * s, kPiTest * kPiTest * c, -kPiTest * kPiTest * s);
          }};
}

// Product of the edge functions 1 - x.n_i / cos(pi/m) of the regular m-gon,
// zero on its boundary.
AnalyticField polygon_bubble(int m) {
  std::vector<Vec2> n;
  const double c = std::cos(kPiTest / m);
  for (int i = 0; i < m; ++i) {
    const double phi = kPiTest * (2 * i + 1) / m;
    n.emplace_back(std::cos(phi) / c, std::sin(phi) / c);
  }
  const auto factors = [n](const Point2& x) {
    std::vector<double> f;
    for (const auto& ni : n) f.push_back(1.0 - x.dot(ni));
    return f;
  };
  AnalyticField v;
  v.value = [factors](const Point2& x) {
    double p = 1.0;
    for (double f : factors(x)) p *= f;
    return p;
  };
  v.grad = [factors, n](const Point2& x) {
    const auto f = factors(x);
    Vec2 g = Vec2::Zero();
    for (std::size_t i = 0; i < f.size(); ++i) {
      double p = 1.0;
      for (std::size_t j = 0; j < f.size(); ++j) {
        if (j != i) p *= f[j];
      }
      g -= p * n[i];
    }
    return g;
  };
  v.hess = [factors, n](const Point2& x) {
    const auto f = factors(x);
    Eigen::Vector3d h = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < f.size(); ++i) {
      for (std::size_t j = 0; j < f.size(); ++j) {
        if (j == i) continue;
        double p = 1.0;
        for (std::size_t l = 0; l < f.size(); ++l) {
          if (l != i && l != j) p *= f[l];
        }
        h += p * Eigen::Vector3d(n[i].x() * n[j].x(), n[i].x() * n[j].y(), n[i].y() * n[j].y());
      }
    }
    return h;
  };
  return v;
}

PlateProblem polygon(int sides, int refinements, SupportMode mode = SupportMode::FullBoundary) {
  PlateProblem p;
  p.sides = sides;
  p.refinements = refinements;
  p.mode = mode;
  return p;
}

}  // namespace

TEST(HessianIdentity, DiskBubble) {
  const IdentityReport r = hessian_identity(bubble_disk(), IdentityDomain::disk());
  EXPECT_NEAR(r.hessian / (8 * kPiTest), 1.0, 1e-6);
  EXPECT_NEAR(r.laplacian / (16 * kPiTest), 1.0, 1e-6);
  EXPECT_NEAR(r.boundary / (8 * kPiTest), 1.0, 1e-6);
  EXPECT_LT(r.residual(), 1e-8);
}

TEST(HessianIdentity, SineOnUnitSquare) {
  const IdentityReport r = hessian_identity(sine_square(), IdentityDomain::rectangle({0, 0}, {1, 1}), 30);
  const double pi4 = std::pow(kPiTest, 4);
  EXPECT_NEAR(r.hessian / pi4, 1.0, 1e-8);
  EXPECT_NEAR(r.laplacian / pi4, 1.0, 1e-8);
  EXPECT_EQ(r.boundary, 0.0);
  EXPECT_LT(r.residual() / r.hessian, 1e-8);
}

TEST(HessianIdentity, StraightPolygonsHaveNoBoundaryTerm) {
  for (int m : {3, 5, 6}) {
    const AnalyticField v = polygon_bubble(m);
    const IdentityReport r = hessian_identity(v, IdentityDomain::polygon(m), 2 * m);
    EXPECT_EQ(r.boundary, 0.0);
    EXPECT_LT(r.residual() / r.hessian, 1e-10) << m;
  }
}

TEST(HessianIdentity, PolygonBubbleVanishesOnEdges) {
  const AnalyticField v = polygon_bubble(6);
  for (int i = 0; i < 6; ++i) {
    const double a0 = kPiTest * i / 3, a1 = kPiTest * (i + 1) / 3;
    const Point2 mid = 0.5 * (Point2(std::cos(a0), std::sin(a0)) + Point2(std::cos(a1), std::sin(a1)));
    EXPECT_NEAR(v.value(mid), 0.0, 1e-14);
  }
  // derivatives against central differences
  const Point2 x(0.2, -0.3);
  const double h = 1e-5;
  const Vec2 fd((v.value(x + Vec2(h, 0)) - v.value(x - Vec2(h, 0))) / (2 * h),
                (v.value(x + Vec2(0, h)) - v.value(x - Vec2(0, h))) / (2 * h));
  EXPECT_NEAR((fd - v.grad(x)).norm(), 0.0, 1e-8);
  const Vec2 gx = (v.grad(x + Vec2(h, 0)) - v.grad(x - Vec2(h, 0))) / (2 * h);
  const Vec2 gy = (v.grad(x + Vec2(0, h)) - v.grad(x - Vec2(0, h))) / (2 * h);
  EXPECT_NEAR((Eigen::Vector3d(gx.x(), gx.y(), gy.y()) - v.hess(x)).norm(), 0.0, 1e-8);
}

TEST(HessianIdentity, ResidualDecaysWithDegree) {
  // non-polynomial field vanishing on the unit circle
  AnalyticField v;
  v.grad = [](const Point2& x) {
    const double e = std::exp(x.x()), b = 1.0 - x.squaredNorm();
    return Vec2(e * (b - 2 * x.x()), e * (-2 * x.y()));
  };
  v.hess = [](const Point2& x) {
    const double e = std::exp(x.x()), b = 1.0 - x.squaredNorm();
    return Eigen::Vector3d(e * (b - 4 * x.x() - 2), -2 * x.y() * e, -2 * e);
  };
  double prev = 1e300;
  for (int degree : {2, 6, 12}) {
    const double res = hessian_identity(v, IdentityDomain::disk(), degree).residual();
    EXPECT_LT(res, prev) << degree;
    prev = res;
  }
  const IdentityReport r = hessian_identity(v, IdentityDomain::disk(), 30);
  EXPECT_LT(r.residual() / r.hessian, 1e-10);
  EXPECT_GT(r.boundary, 0.0);
}

TEST(HessianIdentity, EnergySplitAndErrors) {
  const IdentityReport r = hessian_identity(bubble_disk(), IdentityDomain::disk());
  EXPECT_NEAR(r.energy(0.0), 4 * kPiTest, 1e-9);
  EXPECT_NEAR(r.energy(1.0), 8 * kPiTest, 1e-9);
  EXPECT_THROW(hessian_identity(bubble_disk(), IdentityDomain::polygon(2)), InvalidInput);
  EXPECT_THROW(hessian_identity(AnalyticField{}, IdentityDomain::disk()), InvalidInput);
  EXPECT_THROW(hessian_identity(bubble_disk(), IdentityDomain::disk(), 0), InvalidInput);
}

TEST(PlateOracles, ClosedForms) {
  EXPECT_DOUBLE_EQ(navier_center_deflection(), 3.0 / 64.0);
  EXPECT_DOUBLE_EQ(disk_center_deflection(), 5.0 / 64.0);
  for (double sigma : {0.0, 0.3, 0.5}) {
    EXPECT_NEAR(disk_center_deflection(2.0, sigma), oracle::radial_disk_center(2.0, sigma), 1e-15);
  }
  // tabulated Navier square coefficient 0.00406 q a^4 / D
  EXPECT_NEAR(navier_square_center_deflection(1.0), 0.00406235, 1e-8);
  EXPECT_NEAR(navier_square_center_deflection(2.0, 3.0) / navier_square_center_deflection(1.0), 48.0, 1e-9);
}

TEST(Plate, DiskConvergesToClosedForm) {
  PlateProblem p;
  p.disk = true;
  p.sides = 16;
  double prev = 1.0;
  for (int r = 0; r <= 1; ++r) {
    p.refinements = r;
    const double err = std::abs(solve_plate(p).center - disk_center_deflection());
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Plate, SquareMatchesNavierSeries) {
  // the 4-gon is a square of side sqrt(2); right angles carry no singularity
  const PlateSolution s = solve_plate(polygon(4, 2));
  EXPECT_NEAR(s.center / navier_square_center_deflection(std::sqrt(2.0)), 1.0, 1e-4);
}

TEST(Plate, PolygonConvergesSlowlyToNavierSplit) {
  // Corner singularity r^(pi/omega) with omega = 3 pi / 4: the center value
  // converges from above at about h^(2 (pi/omega - 1)) = h^(2/3).
  const double ref = oracle::navier_split_center(8, 3);
  std::vector<double> err;
  for (int r = 0; r <= 2; ++r) err.push_back(solve_plate(polygon(8, r)).center - ref);
  for (std::size_t i = 0; i < err.size(); ++i) EXPECT_GT(err[i], 0.0);
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double rate = std::log2(err[i - 1] / err[i]);
    EXPECT_GT(rate, 0.5);
    EXPECT_LT(rate, 0.9);
  }
}

TEST(Plate, CornerGradientConstraintBoundsFromBelow) {
  const double ref = oracle::navier_split_center(8, 3);
  PlateProblem lo = polygon(8, 1);
  lo.corner_gradient = true;
  const double below = solve_plate(lo).center;
  const double above = solve_plate(polygon(8, 1)).center;
  EXPECT_LT(below, ref);
  EXPECT_GT(above, ref);
  // no effect in corners_only mode
  PlateProblem c = polygon(8, 0, SupportMode::CornersOnly);
  const double free_corner = solve_plate(c).center;
  c.corner_gradient = true;
  EXPECT_EQ(solve_plate(c).center, free_corner);
}

TEST(Plate, RotationSymmetry) {
  for (auto mode : {SupportMode::FullBoundary, SupportMode::CornersOnly}) {
    const PlateSolution s = solve_plate(polygon(8, 1, mode));
    // the refined fan has the quarter-turn symmetry of its base square
    for (const Point2 x : {Point2(0.3, 0.1), Point2(-0.5, 0.2), Point2(0.05, 0.61)}) {
      const Point2 y(-x.y(), x.x());
      EXPECT_NEAR(plate_deflection(s, x), plate_deflection(s, y), 1e-10);
    }
  }
}

TEST(Plate, EnergyApproachesMonotonically) {
  // HHJ is a complementary-energy method: the discrete potential energy
  // -(1/2) int q w rises towards its limit under uniform refinement.
  for (int sides : {4, 8}) {
    double prev = -1e300;
    for (int r = 0; r <= 2; ++r) {
      const PlateSolution s = solve_plate(polygon(sides, r));
      EXPECT_GT(s.energy, prev) << sides << " " << r;
      prev = s.energy;
    }
  }
}

TEST(Plate, EnergyMatchesLoadWork) {
  const PlateSolution s = solve_plate(polygon(8, 1));
  // -(1/2) int w by the element rule
  double work = 0.0;
  for (int t = 0; t < s.mesh->num_triangles(); ++t) {
    const auto& dofs = s.space->element_dofs(t);
    for (const auto& qp : triangle_rule(6)) {
      const MappedPoint mp = map_point(*s.mesh, t, qp.xi);
      const LagrangeValues L = s.space->evaluate(t, mp, qp.xi);
      double w = 0.0;
      for (int a = 0; a < L.phi.size(); ++a) w += L.phi[a] * s.w[dofs[static_cast<std::size_t>(a)]];
      work += qp.weight * mp.det * w;
    }
  }
  EXPECT_NEAR(s.energy, -0.5 * work, 1e-14);
}

TEST(Plate, LoadScalesLinearly) {
  PlateProblem p = polygon(8, 0);
  const double w1 = solve_plate(p).center;
  p.load = -2.5;
  EXPECT_NEAR(solve_plate(p).center, -2.5 * w1, 1e-12);
}

TEST(Plate, MomentsSatisfyBoundaryCondition) {
  // m_nn = 0 on boundary edges; m = -D^2 w has positive diagonal at the crest
  const PlateSolution s = solve_plate(polygon(8, 1));
  const HhjSpace hhj(s.mesh, s.space->order() - 1);
  for (int e : s.mesh->edges_with_tag(EdgeTag::Boundary)) {
    const EdgePoint ep = edge_point(*s.mesh, e, 0, 0.37);
    const Mat2 m = evaluate_moment(hhj, s.m, s.mesh->edge(e).tri[0], ep.xi);
    EXPECT_NEAR(ep.normal.dot(m * ep.normal), 0.0, 1e-12);
  }
  const auto loc = locate(*s.mesh, Point2(0.01, 0.02));
  const Mat2 m0 = evaluate_moment(hhj, s.m, loc->triangle, loc->xi);
  EXPECT_GT(m0(0, 0), 0.0);
  EXPECT_GT(m0(1, 1), 0.0);
}

TEST(Plate, CornersOnlyApproachesDisk) {
  const auto rows = paradox_sweep({8, 16, 32}, SupportMode::CornersOnly);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].err_disk, rows[i - 1].err_disk);
  EXPECT_LT(rows.back().err_disk / disk_center_deflection(), 0.1);
  EXPECT_GT(rows.back().err_navier, 0.02);
}

TEST(Plate, SweepIsThreadIndependent) {
  const auto a = paradox_sweep({8, 16}, SupportMode::FullBoundary, 2, 0, 1);
  const auto b = paradox_sweep({8, 16}, SupportMode::FullBoundary, 2, 0, 2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sides, b[i].sides);
    EXPECT_EQ(a[i].w_center, b[i].w_center);
  }
  EXPECT_THROW(paradox_sweep({4}, SupportMode::FullBoundary), InvalidInput);
}

TEST(Plate, SweepCsvColumns) {
  const auto rows = paradox_sweep({8}, SupportMode::FullBoundary, 2);
  std::ostringstream out;
  write_sweep_csv(out, rows);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "m,h,w_center,err_navier,err_disk");
  std::getline(in, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
  EXPECT_EQ(line.substr(0, 2), "8,");
}

TEST(Plate, VtuHasOnePointPerSubTriangleCorner) {
  const PlateSolution s = solve_plate(polygon(8, 0));
  std::ostringstream out;
  write_plate_vtu(out, s);
  const std::string text = out.str();
  const int cells = s.mesh->num_triangles() * s.space->order() * s.space->order();
  EXPECT_NE(text.find("NumberOfCells=\"" + std::to_string(cells) + "\""), std::string::npos);
  EXPECT_NE(text.find("NumberOfPoints=\"" + std::to_string(3 * cells) + "\""), std::string::npos);
  EXPECT_NE(text.find("Name=\"w\""), std::string::npos);
}

TEST(Plate, Validation) {
  PlateProblem p;
  p.sigma = 0.3;
  EXPECT_THROW(solve_plate(p), InvalidInput);
  p = PlateProblem{};
  p.disk = true;
  p.mode = SupportMode::CornersOnly;
  EXPECT_THROW(solve_plate(p), InvalidInput);
  p = PlateProblem{};
  p.sides = 2;
  EXPECT_THROW(solve_plate(p), InvalidInput);
  p = PlateProblem{};
  p.order = 4;
  EXPECT_THROW(solve_plate(p), InvalidInput);
  EXPECT_THROW(support_mode_from_string("edges"), InvalidInput);
  EXPECT_EQ(support_mode_from_string(to_string(SupportMode::CornersOnly)), SupportMode::CornersOnly);
  const PlateSolution s = solve_plate(polygon(8, 0));
  EXPECT_THROW(plate_deflection(s, Point2(2, 0)), InvalidInput);
}
