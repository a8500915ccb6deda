#include "foldsim/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace foldsim {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

constexpr double kFlatTol = 1e-12;

bool inside_reference(const Point2& xi, double tol) {
  return xi.x() >= -tol && xi.y() >= -tol && xi.x() + xi.y() <= 1.0 + tol;
}

Point2 clamp_reference(Point2 xi) {
  xi.x() = std::max(xi.x(), 0.0);
  xi.y() = std::max(xi.y(), 0.0);
  const double s = xi.x() + xi.y();
  if (s > 1.0) xi /= s;
  return xi;
}

}  // namespace

std::optional<Point2> inverse_map(const Mesh& mesh, int t, const Point2& x, double tol) {
  const auto& tri = mesh.triangles()[idx(t)];
  const Point2& a = mesh.vertices()[idx(tri[0])];
  Mat2 A;
  A.col(0) = mesh.vertices()[idx(tri[1])] - a;
  A.col(1) = mesh.vertices()[idx(tri[2])] - a;
  Point2 xi = A.inverse() * (x - a);
  if (mesh.triangle_geometry_order(t) > 1) {
    for (int it = 0; it < 30; ++it) {
      const MappedPoint mp = map_point(mesh, t, clamp_reference(xi));
      const Point2 step = mp.Finv * (x - mp.x);
      xi = clamp_reference(xi) + step;
      if (step.norm() < 1e-15) break;
    }
    if (!inside_reference(xi, tol)) return std::nullopt;
    xi = clamp_reference(xi);
    if ((map_point(mesh, t, xi).x - x).norm() > 1e-10) return std::nullopt;
    return xi;
  }
  if (!inside_reference(xi, tol)) return std::nullopt;
  return clamp_reference(xi);
}

std::optional<Location> locate(const Mesh& mesh, const Point2& x, double tol) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& nodes = mesh.geometry_nodes(t);
    Eigen::AlignedBox2d box;
    for (const auto& n : nodes) box.extend(n);
    // curved edges bulge at most a little beyond their nodes' hull
    const double pad = 0.25 * box.diagonal().norm() + tol;
    if (x.x() < box.min().x() - pad || x.x() > box.max().x() + pad || x.y() < box.min().y() - pad ||
        x.y() > box.max().y() + pad) {
      continue;
    }
    if (const auto xi = inverse_map(mesh, t, x, tol)) return Location{t, *xi};
  }
  return std::nullopt;
}

Vec3 point_probe(const LagrangeSpace& space, const Eigen::VectorXd& v, const Point2& x) {
  const auto loc = locate(space.mesh(), x);
  if (!loc) throw InvalidInput("probe point outside the mesh");
  return evaluate_deformation(space, v, loc->triangle, loc->xi).v;
}

QuadRule lp_rule(const HhjSpace& space, int t, double p) {
  if (p > 8.0) return subdivided_triangle_rule(10, 2);
  const int q = space.order();
  const int curved = space.mesh().triangle_geometry_order(t) > 1 ? 2 : 0;
  const int degree = std::min(kMaxQuadratureDegree, static_cast<int>(std::ceil(p)) * std::max(q, 1) + curved);
  return triangle_rule(degree);
}

double lp_norm(const Mesh& mesh, const std::function<double(int, const Point2&)>& f, double p,
               const std::function<QuadRule(int)>& rule) {
  if (!(p >= 1.0)) throw InvalidInput("lp_norm: p must be >= 1");
  struct Sample {
    double value, weight;
  };
  std::vector<Sample> samples;
  double peak = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (const auto& q : rule(t)) {
      const double w = q.weight * map_point(mesh, t, q.xi).det;
      const double val = std::abs(f(t, q.xi));
      samples.push_back({val, w});
      peak = std::max(peak, val);
    }
  }
  if (!std::isfinite(peak)) throw InvalidInput("lp_norm: non-finite field");
  if (peak == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& s : samples) sum += s.weight * std::pow(s.value / peak, p);
  return peak * std::pow(sum, 1.0 / p);
}

double lp_norm(const HhjSpace& space, const Eigen::VectorXd& m, double p) {
  return lp_norm(
      space.mesh(), [&](int t, const Point2& xi) { return evaluate_moment(space, m, t, xi).norm(); }, p,
      [&](int t) { return lp_rule(space, t, p); });
}

double isometry_violation(const FoldProblem& p, const State& s) {
  const Mesh& mesh = p.mesh();
  const Eigen::VectorXd u = s.v - p.reference();
  Mat32 id = Mat32::Zero();
  id(0, 0) = id(1, 1) = 1.0;
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const bool exact = p.identity_exact(t);
    for (const auto& q : triangle_rule(element_quadrature_degree(mesh, t, p.k()))) {
      const double w = q.weight * map_point(mesh, t, q.xi).det;
      Mat32 gu = evaluate_deformation(p.lagrange(), u, t, q.xi).grad;
      if (!exact) gu += evaluate_deformation(p.lagrange(), p.reference(), t, q.xi).grad - id;
      const Mat2 c = gu.topRows<2>() + gu.topRows<2>().transpose() + gu.transpose() * gu;
      sum += w * c.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

std::vector<double> energy_density(const FoldProblem& p, const State& s, double E) {
  const Mesh& mesh = p.mesh();
  std::vector<double> out(idx(mesh.num_triangles()), 0.0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double e = 0.0, area = 0.0;
    for (const auto& q : triangle_rule(element_quadrature_degree(mesh, t, p.k()))) {
      const double w = q.weight * map_point(mesh, t, q.xi).det;
      const DeformationValues d = evaluate_deformation(p.lagrange(), s.v, t, q.xi);
      const Vec3 c = d.grad.col(0).cross(d.grad.col(1));
      // flat regions of a rest state have H = 0 even where the normal is ill-defined
      const Mat2 H = c.norm() > kFlatTol ? second_form(d) : Mat2::Zero();
      e += w * (E / 24.0) * H.squaredNorm();
      area += w;
    }
    out[idx(t)] = e / area;
  }
  return out;
}

RunReport make_report(const FoldProblem& p, const std::vector<State>& states, const Point2& probe, double E) {
  RunReport r;
  for (const auto& s : states) r.deflection.push_back(point_probe(p.lagrange(), s.v, probe).z());
  if (states.empty()) return r;
  const State& last = states.back();
  r.m_l2 = lp_norm(p.hhj(), last.m, 2.0);
  r.m_l64 = lp_norm(p.hhj(), last.m, 64.0);
  r.violation = isometry_violation(p, last);
  r.density = energy_density(p, last, E);
  return r;
}

void write_norms_csv(std::ostream& out, const FoldProblem& p, const std::vector<State>& states,
                     const Point2& probe) {
  out << "step,t,deflection,L2,L64,violation\n";
  char buf[256];
  for (std::size_t i = 0; i < states.size(); ++i) {
    const State& s = states[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i, s.t,
                  point_probe(p.lagrange(), s.v, probe).z(), lp_norm(p.hhj(), s.m, 2.0),
                  lp_norm(p.hhj(), s.m, 64.0), isometry_violation(p, s));
    out << buf;
  }
}

void write_vtu(std::ostream& out, const FoldProblem& p, const State& s, double E) {
  const Mesh& mesh = p.mesh();
  const int k = p.k();
  const std::vector<double> density = energy_density(p, s, E);
  // sub-triangles of the reference triangle on the k-lattice
  std::vector<std::array<Point2, 3>> sub;
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i + j < k; ++i) {
      const Point2 a(double(i) / k, double(j) / k), b(double(i + 1) / k, double(j) / k),
          c(double(i) / k, double(j + 1) / k);
      sub.push_back({a, b, c});
      if (i + j + 1 < k) sub.push_back({b, Point2(double(i + 1) / k, double(j + 1) / k), c});
    }
  }
  const std::size_t ncell = sub.size() * idx(mesh.num_triangles());
  out << "<?xml version=\"1.0\"?>\n"
         "<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n"
         "<UnstructuredGrid>\n"
      << "<Piece NumberOfPoints=\"" << 3 * ncell << "\" NumberOfCells=\"" << ncell << "\">\n"
      << "<Points>\n<DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n";
  char buf[128];
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (const auto& tri : sub) {
      for (const auto& xi : tri) {
        const Vec3 x = evaluate_deformation(p.lagrange(), s.v, t, xi).v;
        std::snprintf(buf, sizeof buf, "%.10g %.10g %.10g\n", x.x(), x.y(), x.z());
        out << buf;
      }
    }
  }
  out << "</DataArray>\n</Points>\n<Cells>\n<DataArray type=\"Int32\" Name=\"connectivity\" format=\"ascii\">\n";
  for (std::size_t c = 0; c < ncell; ++c) out << 3 * c << ' ' << 3 * c + 1 << ' ' << 3 * c + 2 << '\n';
  out << "</DataArray>\n<DataArray type=\"Int32\" Name=\"offsets\" format=\"ascii\">\n";
  for (std::size_t c = 0; c < ncell; ++c) out << 3 * (c + 1) << '\n';
  out << "</DataArray>\n<DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n";
  for (std::size_t c = 0; c < ncell; ++c) out << "5\n";
  out << "</DataArray>\n</Cells>\n<CellData Scalars=\"energy_density\">\n"
         "<DataArray type=\"Float64\" Name=\"energy_density\" format=\"ascii\">\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    std::snprintf(buf, sizeof buf, "%.10g\n", density[idx(t)]);
    for (std::size_t i = 0; i < sub.size(); ++i) out << buf;
  }
  out << "</DataArray>\n<DataArray type=\"Int32\" Name=\"subdomain\" format=\"ascii\">\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (std::size_t i = 0; i < sub.size(); ++i) out << mesh.subdomain(t) << '\n';
  }
  out << "</DataArray>\n</CellData>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n";
}

}  // namespace foldsim
