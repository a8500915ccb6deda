#include "foldsim/fold_geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace foldsim;

namespace {

struct Samples {
  std::vector<Vec3> points, n1, n2;
  double ds = 0.0;
};

template <class Curve>
Samples sample(int n, double length, Curve c) {
  Samples s;
  s.ds = length / (n - 1);
  for (int i = 0; i < n; ++i) {
    const auto [x, a, b] = c(i * s.ds);
    s.points.push_back(x);
    s.n1.push_back(a);
    s.n2.push_back(b);
  }
  return s;
}

DarbouxData frames(const Samples& s) { return darboux_from_samples(s.points, s.n1, s.n2, s.ds); }

double max_error(const std::vector<double>& got, const std::function<double(std::size_t)>& want) {
  double e = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) e = std::max(e, std::abs(got[i] - want(i)));
  return e;
}

// Flat unit square with a straight crease along x = 1/2; the right half is
// rotated about the crease line by phi.
std::shared_ptr<const Mesh> straight_crease_mesh() {
  MeshData d = build_rectangle_mesh(Point2(0, 0), Point2(1, 1), 4, 4).data();
  d.subdomains.clear();
  for (const auto& t : d.triangles) {
    double cx = 0.0;
    for (int v : t) cx += d.vertices[static_cast<std::size_t>(v)].x() / 3.0;
    d.subdomains.push_back(cx < 0.5 ? 1 : 2);
  }
  const Mesh m(d);
  for (const auto& e : m.edges()) {
    const Point2& a = m.vertices()[static_cast<std::size_t>(e.v[0])];
    const Point2& b = m.vertices()[static_cast<std::size_t>(e.v[1])];
    if (!e.on_boundary() && a.x() == 0.5 && b.x() == 0.5) d.edge_info[edge_key(e.v[0], e.v[1])] = {EdgeTag::Crease, -1};
  }
  return std::make_shared<const Mesh>(d);
}

}  // namespace

TEST(Darboux, FlatCircle) {
  const double R = 2.0;
  const Samples s = sample(200, 5.0, [&](double u) {
    return std::tuple{Vec3(R * std::cos(u / R), R * std::sin(u / R), 0.0), Vec3::UnitZ().eval(), Vec3::UnitZ().eval()};
  });
  const DarbouxData d = frames(s);
  // counter-clockwise, m = n x t points to the center
  EXPECT_LT(max_error(d.kappa1, [&](std::size_t) { return 1.0 / R; }), 1e-8);
  EXPECT_LT(max_error(d.kappa2, [&](std::size_t) { return 1.0 / R; }), 1e-8);
  for (const auto* f : {&d.mu1, &d.mu2, &d.tau1, &d.tau2, &d.theta}) EXPECT_LT(max_error(*f, [](std::size_t) { return 0.0; }), 1e-12);
  const RelationReport r = verify_relations(d, 1e-10);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.curvature_angle, 0.0);
  EXPECT_EQ(r.normal_curvature, 0.0);
}

TEST(Darboux, StraightDihedral) {
  const double phi = 1.1;
  const Vec3 n2(0.0, -std::sin(phi), std::cos(phi));
  const Samples s = sample(50, 1.0, [&](double u) { return std::tuple{Vec3(u, 0, 0), Vec3::UnitZ().eval(), n2}; });
  const DarbouxData d = frames(s);
  for (const auto* f : {&d.kappa1, &d.kappa2, &d.mu1, &d.mu2, &d.tau1, &d.tau2, &d.dtheta}) {
    EXPECT_LT(max_error(*f, [](std::size_t) { return 0.0; }), 1e-10);
  }
  EXPECT_LT(max_error(d.theta, [&](std::size_t) { return phi; }), 1e-14);
  EXPECT_TRUE(verify_relations(d, 1e-10).pass);
}

TEST(Darboux, HelixOnCylinder) {
  // geodesic of the cylinder of radius a with inward normal: kappa = 0,
  // mu = a / c^2, tau = b / c^2
  const double a = 0.7, b = 0.4, c = std::hypot(a, b), th = -0.3;
  const Samples s = sample(400, 6.0, [&](double u) {
    const double p = u / c;
    const Vec3 x(a * std::cos(p), a * std::sin(p), b * p);
    const Vec3 t(-a / c * std::sin(p), a / c * std::cos(p), b / c);
    const Vec3 n(-std::cos(p), -std::sin(p), 0.0);
    return std::tuple{x, n, Vec3(rotation(th, t) * n)};
  });
  const DarbouxData d = frames(s);
  const double mu = a / (c * c), tau = b / (c * c);
  EXPECT_LT(max_error(d.kappa1, [](std::size_t) { return 0.0; }), 1e-7);
  EXPECT_LT(max_error(d.mu1, [&](std::size_t) { return mu; }), 1e-7);
  EXPECT_LT(max_error(d.tau1, [&](std::size_t) { return tau; }), 1e-7);
  // side 2 sees the same curvature vector in the rotated frame
  EXPECT_LT(max_error(d.kappa2, [&](std::size_t) { return std::sin(th) * mu; }), 1e-7);
  EXPECT_LT(max_error(d.mu2, [&](std::size_t) { return std::cos(th) * mu; }), 1e-7);
  EXPECT_LT(max_error(d.tau2, [&](std::size_t) { return tau; }), 1e-7);
  EXPECT_LT(max_error(d.theta, [&](std::size_t) { return th; }), 1e-12);
}

TEST(Darboux, FrameInvariants) {
  const SyntheticFold f = random_synthetic_fold(7);
  const CurveSamples c = synthetic_fold(f, 300);
  const DarbouxData d = darboux_from_samples(c.points, c.n1, c.n2, c.ds);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (const auto& [m, n] : {std::pair{d.m1[i], d.n1[i]}, std::pair{d.m2[i], d.n2[i]}}) {
      Mat3 r;
      r << d.t[i], m, n;
      EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-8);
      EXPECT_LT((m - n.cross(d.t[i])).norm(), 1e-8);
      EXPECT_NEAR(r.determinant(), 1.0, 1e-8);
    }
    // the rotation relation for the conormals as well
    EXPECT_LT((d.m2[i] - (std::cos(d.theta[i]) * d.m1[i] + std::sin(d.theta[i]) * d.n1[i])).norm(), 1e-8);
  }
}

TEST(Darboux, RejectsBadSamples) {
  const SyntheticFold f = random_synthetic_fold(1);
  CurveSamples c = synthetic_fold(f, 100);
  std::vector<Vec3> stretched = c.points;
  for (auto& x : stretched) x *= 1.01;
  EXPECT_THROW(darboux_from_samples(stretched, c.n1, c.n2, c.ds), InvalidInput);
  EXPECT_NO_THROW(darboux_from_samples(stretched, c.n1, c.n2, c.ds, 0.0, 0.02));
  EXPECT_NO_THROW(darboux_from_samples(c.points, c.n1, c.n2, c.ds));
  const std::vector<Vec3> four(c.points.begin(), c.points.begin() + 4);
  EXPECT_THROW(darboux_from_samples(four, four, four, c.ds), InvalidInput);
  const std::vector<Vec3> five(c.points.begin(), c.points.begin() + 5), n5(c.n1.begin(), c.n1.begin() + 5);
  EXPECT_NO_THROW(darboux_from_samples(five, n5, n5, c.ds, 0.0, 0.01));
  c.n2.pop_back();
  EXPECT_THROW(darboux_from_samples(c.points, c.n1, c.n2, c.ds), InvalidInput);
}

TEST(FoldingAngle, Examples) {
  EXPECT_NEAR(folding_angle(1.0, 1.0), kPi / 2.0, 1e-15);
  EXPECT_EQ(folding_angle(3.0, 0.0), 0.0);
  EXPECT_THROW(folding_angle(0.0, 1.0), InvalidInput);
}

TEST(FoldingAngle, ResidualAndDoubleAngle) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double k = u(gen), mu = u(gen);
    if (k == 0.0) continue;
    const double th = folding_angle(k, mu);
    EXPECT_GT(th, -kPi);
    EXPECT_LT(th, kPi);
    EXPECT_NEAR(k * std::sin(th / 2) - mu * std::cos(th / 2), 0.0, 1e-12 * (1.0 + std::abs(k) + std::abs(mu)));
    // mu_1 = mu and mu_2 = -mu satisfy the identity with opposite signs
    const double lhs = 2.0 * std::pow(std::sin(th / 2), 2) * k;
    EXPECT_NEAR(lhs, 2.0 * std::sin(th / 2) * std::cos(th / 2) * mu, 1e-11 * (1.0 + std::abs(k) + std::abs(mu)));
    EXPECT_NEAR(lhs, -2.0 * std::sin(th / 2) * std::cos(th / 2) * (-mu), 1e-11 * (1.0 + std::abs(k) + std::abs(mu)));
  }
}

class SyntheticFrames : public ::testing::TestWithParam<unsigned> {};

TEST_P(SyntheticFrames, RecoversInputs) {
  const SyntheticFold f = random_synthetic_fold(GetParam());
  const CurveSamples c = synthetic_fold(f, 1000);
  const DarbouxData d = darboux_from_samples(c.points, c.n1, c.n2, c.ds);
  const auto at = [&](std::size_t i) { return d.s[i]; };
  EXPECT_LT(max_error(d.kappa1, [&](std::size_t i) { return f.kappa(at(i)); }), 1e-5);
  EXPECT_LT(max_error(d.kappa2, [&](std::size_t i) { return f.kappa(at(i)); }), 1e-5);
  EXPECT_LT(max_error(d.mu1, [&](std::size_t i) { return f.mu1(at(i)); }), 1e-5);
  EXPECT_LT(max_error(d.mu2, [&](std::size_t i) { return -f.mu1(at(i)); }), 1e-5);
  EXPECT_LT(max_error(d.tau1, [&](std::size_t i) { return f.tau1(at(i)); }), 1e-5);
  EXPECT_LT(max_error(d.tau2, [&](std::size_t i) { return f.tau1(at(i)) + f.dtheta(at(i)); }), 1e-5);
  EXPECT_LT(max_error(d.theta, [&](std::size_t i) { return f.theta(at(i)); }), 1e-5);
  EXPECT_LT(max_error(d.dtheta, [&](std::size_t i) { return f.dtheta(at(i)); }), 1e-5);

  const RelationReport r = verify_relations(d, 1e-5);
  EXPECT_TRUE(r.pass) << r.curvature_angle << ' ' << r.normal_curvature << ' ' << r.torsion << ' ' << r.rotation;

  // double-angle identity on both sides, opposite signs
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double h = d.theta[i] / 2, lhs = 2.0 * std::sin(h) * std::sin(h) * d.kappa(i);
    EXPECT_NEAR(lhs, 2.0 * std::sin(h) * std::cos(h) * d.mu1[i], 1e-5);
    EXPECT_NEAR(lhs, -2.0 * std::sin(h) * std::cos(h) * d.mu2[i], 1e-5);
  }
}

TEST_P(SyntheticFrames, FourthOrderConvergence) {
  // least-squares slope of log residual against log spacing over five
  // halvings; single ratios wobble before the asymptotic range
  const SyntheticFold f = random_synthetic_fold(GetParam());
  std::vector<double> logh;
  std::vector<RelationReport> reps;
  for (int n : {126, 251, 501, 1001, 2001}) {
    const CurveSamples c = synthetic_fold(f, n);
    logh.push_back(std::log(c.ds));
    reps.push_back(verify_relations(darboux_from_samples(c.points, c.n1, c.n2, c.ds), 1.0));
  }
  const auto slope = [&](double RelationReport::*field) {
    double mx = 0.0, my = 0.0;
    for (std::size_t j = 0; j < reps.size(); ++j) {
      mx += logh[j] / reps.size();
      my += std::log(reps[j].*field) / reps.size();
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t j = 0; j < reps.size(); ++j) {
      sxy += (logh[j] - mx) * (std::log(reps[j].*field) - my);
      sxx += (logh[j] - mx) * (logh[j] - mx);
    }
    return sxy / sxx;
  };
  EXPECT_GE(slope(&RelationReport::curvature_angle), 3.5);
  EXPECT_GE(slope(&RelationReport::normal_curvature), 3.5);
  EXPECT_GE(slope(&RelationReport::torsion), 3.5);
  EXPECT_GE(slope(&RelationReport::rotation), 3.5);
  EXPECT_LT(reps[3].max(), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Seeds, SyntheticFrames, ::testing::Values(1u, 2u, 3u));

TEST(SyntheticFold, GeneratorIsArclengthAndOrthonormal) {
  const SyntheticFold f = random_synthetic_fold(4);
  const CurveSamples c = synthetic_fold(f, 101);
  EXPECT_NEAR(c.ds, 0.1, 1e-15);
  for (std::size_t i = 0; i < c.n1.size(); ++i) {
    EXPECT_NEAR(c.n1[i].norm(), 1.0, 1e-10);
    EXPECT_NEAR(c.n2[i].norm(), 1.0, 1e-10);
  }
  double chord = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) chord += (c.points[i] - c.points[i - 1]).norm();
  EXPECT_LE(chord, f.length + 1e-12);
  EXPECT_GT(chord, f.length - 1e-2);
}

TEST(CreaseTrace, FlatRestState) {
  const auto mesh = std::make_shared<const Mesh>(build_scenario_mesh(0.25, reference_crease(CreaseSetting::S1), 3));
  const FoldProblem p(mesh, 3, false);
  const DarbouxData d = crease_trace_from_fem(p, p.rest_state(), 40);
  ASSERT_EQ(d.size(), 40u);
  EXPECT_NEAR(d.s.back() - d.s.front(), 39.0 / 40.0 * kPi / 6.0, 1e-6);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.theta[i], 0.0);
    // the arc runs clockwise from the symmetry line; the curvature of the
    // cubic edges only approximates the circle's
    EXPECT_NEAR(d.kappa(i), -1.0, 5e-2);
    EXPECT_NEAR(d.mu1[i], 0.0, 1e-12);
  }
  EXPECT_TRUE(verify_relations(d, 1e-8).pass);
}

TEST(CreaseTrace, StraightDihedralFold) {
  const FoldProblem p(straight_crease_mesh(), 2, false);
  const double phi = 0.8;
  State s = p.rest_state();
  s.v = p.lagrange().interpolate([&](const Point2& x) {
    if (x.x() <= 0.5) return Vec3(x.x(), x.y(), 0.0);
    return Vec3(0.5 + (x.x() - 0.5) * std::cos(phi), x.y(), (x.x() - 0.5) * std::sin(phi));
  });
  // samples from y = 1 down to y = 0; 12 samples avoid the vertices at y = k/4
  const DarbouxData d = crease_trace_from_fem(p, s, 12);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_NEAR(d.theta[i], phi, 1e-12);
    EXPECT_NEAR((d.t[i] + Vec3::UnitY()).norm(), 0.0, 1e-12);
    EXPECT_NEAR(d.point[i].x(), 0.5, 1e-14);
  }
  const RelationReport r = verify_relations(d, 1e-10);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(d.s.front(), 0.5 / 12.0, 1e-14);
  // with 10 samples the half-spacing grid hits the vertex at arclength 1/4
  const DarbouxData e = crease_trace_from_fem(p, s, 10);
  EXPECT_NEAR(e.s.front(), 0.25 / 10.0, 1e-14);
  EXPECT_NEAR(e.theta.front(), phi, 1e-12);
}

TEST(CreaseTrace, RejectsMeshWithoutCrease) {
  const FoldProblem p(std::make_shared<const Mesh>(build_rectangle_mesh(Point2(0, 0), Point2(1, 1), 2, 2)), 1, false);
  EXPECT_THROW(crease_trace_from_fem(p, p.rest_state(), 10), InvalidInput);
}

TEST(DarbouxCsv, Columns) {
  const CurveSamples c = synthetic_fold(random_synthetic_fold(2), 100);
  const DarbouxData d = darboux_from_samples(c.points, c.n1, c.n2, c.ds);
  std::ostringstream out;
  write_darboux_csv(out, d);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "s,kappa,mu1,mu2,tau1,tau2,theta");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    ++rows;
  }
  EXPECT_EQ(rows, 100);
}
