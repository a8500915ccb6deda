#include "foldsim/linear_paradox.hpp"

#include "foldsim/postprocess.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <mutex>
#include <ostream>
#include <thread>

namespace foldsim {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

using Triplets = std::vector<Eigen::Triplet<double>>;

double frob2(const Eigen::Vector3d& h) { return h[0] * h[0] + 2.0 * h[1] * h[1] + h[2] * h[2]; }

// Adds the three volume terms over the straight triangle (a, b, c).
void integrate_triangle(const AnalyticField& v, const Point2& a, const Point2& b, const Point2& c,
                        int degree, IdentityReport& r) {
  const double det = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  for (const auto& qp : triangle_rule(degree)) {
    const Point2 x = a + qp.xi.x() * (b - a) + qp.xi.y() * (c - a);
    const Eigen::Vector3d h = v.hess(x);
    const double w = qp.weight * det;
    r.hessian += w * frob2(h);
    r.laplacian += w * (h[0] + h[2]) * (h[0] + h[2]);
  }
}

}  // namespace

double IdentityReport::residual() const { return std::abs(hessian - (laplacian - boundary)); }

double IdentityReport::energy(double sigma) const {
  return 0.5 * sigma * laplacian + 0.5 * (1.0 - sigma) * hessian;
}

IdentityReport hessian_identity(const AnalyticField& v, const IdentityDomain& domain, int degree) {
  if (!v.hess) throw InvalidInput("hessian_identity: field without hessian");
  if (degree < 1 || degree > kMaxQuadratureDegree) throw InvalidInput("hessian_identity: degree out of range");
  IdentityReport r;
  switch (domain.kind) {
    case IdentityDomain::Kind::Disk: {
      if (!v.grad) throw InvalidInput("hessian_identity: field without gradient");
      const int n_phi = degree + 2;
      const double dphi = 2.0 * std::numbers::pi / n_phi;
      const LineRule radial = gauss_legendre(degree / 2 + 2);
      for (int j = 0; j < n_phi; ++j) {
        const double phi = j * dphi;
        const Vec2 e(std::cos(phi), std::sin(phi));
        for (const auto& lp : radial) {
          const Eigen::Vector3d h = v.hess(lp.s * e);
          const double w = lp.weight * lp.s * dphi;
          r.hessian += w * frob2(h);
          r.laplacian += w * (h[0] + h[2]) * (h[0] + h[2]);
        }
        const double dn = v.grad(e).dot(e);
        r.boundary += dphi * dn * dn;  // unit curvature and unit speed
      }
      break;
    }
    case IdentityDomain::Kind::Polygon: {
      if (domain.sides < 3) throw InvalidInput("hessian_identity: polygon needs >= 3 sides");
      const int m = domain.sides;
      for (int j = 0; j < m; ++j) {
        const double a0 = 2.0 * std::numbers::pi * j / m, a1 = 2.0 * std::numbers::pi * (j + 1) / m;
        integrate_triangle(v, Point2(0, 0), Point2(std::cos(a0), std::sin(a0)),
                           Point2(std::cos(a1), std::sin(a1)), degree, r);
      }
      break;
    }
    case IdentityDomain::Kind::Rectangle: {
      const Point2 lo = domain.lower, hi = domain.upper;
      if (!(hi.x() > lo.x() && hi.y() > lo.y())) throw InvalidInput("hessian_identity: empty rectangle");
      integrate_triangle(v, lo, Point2(hi.x(), lo.y()), hi, degree, r);
      integrate_triangle(v, lo, hi, Point2(lo.x(), hi.y()), degree, r);
      break;
    }
  }
  return r;
}

std::string to_string(SupportMode m) {
  return m == SupportMode::FullBoundary ? "full_boundary" : "corners_only";
}

SupportMode support_mode_from_string(const std::string& s) {
  if (s == "full_boundary" || s == "full") return SupportMode::FullBoundary;
  if (s == "corners_only" || s == "corners") return SupportMode::CornersOnly;
  throw InvalidInput("unknown support mode '" + s + "'");
}

void PlateProblem::validate() const {
  if (sigma != 0.0) throw InvalidInput("plate: only sigma = 0 is discretized");
  if (sides < 3) throw InvalidInput("plate: sides must be >= 3");
  if (order < 1 || order > 3) throw InvalidInput("plate: order must be in {1,2,3}");
  if (geometry_order < 1 || geometry_order > 3) throw InvalidInput("plate: geometry_order must be in {1,2,3}");
  if (refinements < 0) throw InvalidInput("plate: refinements must be >= 0");
  if (disk && mode == SupportMode::CornersOnly) throw InvalidInput("plate: the disk has no corners");
  if (!std::isfinite(load)) throw InvalidInput("plate: load must be finite");
}

PlateSolution solve_plate(const PlateProblem& problem) {
  problem.validate();
  auto mesh = std::make_shared<const Mesh>(
      build_polygon_mesh(problem.sides, problem.refinements, problem.disk, problem.disk ? problem.geometry_order : 1));
  auto space = std::make_shared<const LagrangeSpace>(mesh, problem.order, false);
  const HhjSpace hhj(mesh, problem.order - 1);
  const int nw = space->num_dofs(), nm = hhj.num_dofs();

  Triplets trip;
  Eigen::VectorXd load = Eigen::VectorXd::Zero(nw);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    const auto& wd = space->element_dofs(t);
    const auto& md = hhj.element_dofs(t);
    for (const auto& qp : triangle_rule(element_quadrature_degree(*mesh, t, problem.order))) {
      const MappedPoint mp = map_point(*mesh, t, qp.xi);
      const LagrangeValues L = space->evaluate(t, mp, qp.xi);
      const Eigen::MatrixX3d H = hhj.evaluate(t, mp, qp.xi);
      const double w = qp.weight * mp.det;
      for (int B = 0; B < H.rows(); ++B) {
        if (md[idx(B)] < 0) continue;
        for (int C = 0; C < H.rows(); ++C) {
          if (md[idx(C)] < 0) continue;
          double s = 0.0;
          for (int c = 0; c < 3; ++c) s += kSymWeight[c] * H(B, c) * H(C, c);
          trip.emplace_back(md[idx(B)], md[idx(C)], w * s);
        }
        for (int A = 0; A < L.hess.rows(); ++A) {
          double s = 0.0;
          for (int c = 0; c < 3; ++c) s += kSymWeight[c] * H(B, c) * L.hess(A, c);
          trip.emplace_back(md[idx(B)], nm + wd[idx(A)], w * s);
          trip.emplace_back(nm + wd[idx(A)], md[idx(B)], w * s);
        }
      }
      for (int A = 0; A < L.phi.size(); ++A) load[wd[idx(A)]] += w * problem.load * L.phi[A];
    }
  }
  // normal-derivative jumps on interior edges against mu_nn
  for (int e = 0; e < mesh->num_edges(); ++e) {
    const Edge& edge = mesh->edge(e);
    if (edge.on_boundary()) continue;
    const int t0 = edge.tri[0], t1 = edge.tri[1];
    const auto& wd0 = space->element_dofs(t0);
    const auto& wd1 = space->element_dofs(t1);
    const auto& md = hhj.element_dofs(t0);
    for (const auto& lp : gauss_legendre(problem.order + 2)) {
      const EdgePoint p0 = edge_point(*mesh, e, 0, lp.s);
      const EdgePoint p1 = edge_point(*mesh, e, 1, lp.s);
      const LagrangeValues L0 = space->evaluate(t0, p0.map, p0.xi);
      const LagrangeValues L1 = space->evaluate(t1, p1.map, p1.xi);
      const Eigen::MatrixX3d H = hhj.evaluate(t0, p0.map, p0.xi);
      const Vec2 nu = p0.normal;
      const double w = lp.weight * p0.ds;
      for (int B = 0; B < H.rows(); ++B) {
        if (md[idx(B)] < 0) continue;
        const double bnn = nu.dot(sym_from(H.row(B).transpose()) * nu);
        if (bnn == 0.0) continue;
        for (int A = 0; A < L0.grad.rows(); ++A) {
          const double j0 = -w * bnn * L0.grad.row(A).dot(nu);
          const double j1 = w * bnn * L1.grad.row(A).dot(nu);
          trip.emplace_back(md[idx(B)], nm + wd0[idx(A)], j0);
          trip.emplace_back(nm + wd0[idx(A)], md[idx(B)], j0);
          trip.emplace_back(md[idx(B)], nm + wd1[idx(A)], j1);
          trip.emplace_back(nm + wd1[idx(A)], md[idx(B)], j1);
        }
      }
    }
  }

  std::vector<bool> fixed(idx(nw), false);
  if (problem.mode == SupportMode::FullBoundary) {
    for (int d : space->dofs_on_tag(EdgeTag::Boundary)) fixed[idx(d)] = true;
  } else {
    const auto& pts = space->dof_points();
    for (int v : mesh->crease_vertices()) {
      const Point2& c = mesh->vertices()[idx(v)];
      for (int d = 0; d < nw; ++d) {
        if ((pts[idx(d)] - c).norm() < 1e-12) fixed[idx(d)] = true;
      }
    }
  }
  // reduced numbering: moments, then free deflection dofs
  std::vector<int> map(idx(nm + nw), -1);
  int n = 0;
  for (int i = 0; i < nm; ++i) map[idx(i)] = n++;
  for (int d = 0; d < nw; ++d) {
    if (!fixed[idx(d)]) map[idx(nm + d)] = n++;
  }
  Triplets reduced;
  reduced.reserve(trip.size());
  for (const auto& tr : trip) {
    const int r = map[idx(tr.row())], c = map[idx(tr.col())];
    if (r >= 0 && c >= 0) reduced.emplace_back(r, c, tr.value());
  }
  if (problem.mode == SupportMode::FullBoundary && problem.corner_gradient && !problem.disk) {
    // d/ds v = 0 at the corner along every interior edge leaving it, by multipliers
    for (int c : mesh->crease_vertices()) {
      const Point2& xc = mesh->vertices()[idx(c)];
      for (int e = 0; e < mesh->num_edges(); ++e) {
        const Edge& edge = mesh->edge(e);
        if (edge.on_boundary() || (edge.v[0] != c && edge.v[1] != c)) continue;
        const int t = edge.tri[0];
        const Point2 xo = mesh->vertices()[idx(edge.v[0] == c ? edge.v[1] : edge.v[0])];
        const Vec2 dir = (xo - xc).normalized();
        const auto xi = inverse_map(*mesh, t, xc);
        if (!xi) throw SingularConfiguration("solve_plate: corner not found in its triangle");
        const LagrangeValues L = space->evaluate(t, *xi);
        const auto& wd = space->element_dofs(t);
        const int row = n++;
        for (int A = 0; A < L.phi.size(); ++A) {
          const double g = L.grad.row(A).dot(dir);
          const int col = map[idx(nm + wd[idx(A)])];
          if (col < 0 || std::abs(g) < 1e-14) continue;
          reduced.emplace_back(row, col, g);
          reduced.emplace_back(col, row, g);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(reduced.begin(), reduced.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int d = 0; d < nw; ++d) {
    if (map[idx(nm + d)] >= 0) rhs[map[idx(nm + d)]] = -load[d];
  }
  const Eigen::VectorXd x = make_linear_solver()->solve(K, -rhs);

  PlateSolution s;
  s.mesh = mesh;
  s.space = space;
  s.m = x.head(nm);
  s.w = Eigen::VectorXd::Zero(nw);
  for (int d = 0; d < nw; ++d) {
    if (map[idx(nm + d)] >= 0) s.w[d] = x[map[idx(nm + d)]];
  }
  s.energy = -0.5 * load.dot(s.w);
  s.h = mesh->max_diameter();
  s.center = plate_deflection(s, Point2(0, 0));
  return s;
}

double plate_deflection(const PlateSolution& s, const Point2& x) {
  const auto loc = locate(*s.mesh, x);
  if (!loc) throw InvalidInput("plate_deflection: point outside the mesh");
  const LagrangeValues L = s.space->evaluate(loc->triangle, loc->xi);
  const auto& dofs = s.space->element_dofs(loc->triangle);
  double w = 0.0;
  for (int A = 0; A < L.phi.size(); ++A) w += L.phi[A] * s.w[dofs[idx(A)]];
  return w;
}

double navier_center_deflection(double q) { return 3.0 * q / 64.0; }

double disk_center_deflection(double q, double sigma) {
  return (5.0 + sigma) * q / (64.0 * (1.0 + sigma));
}

double navier_square_center_deflection(double a, double q, int terms) {
  if (!(a > 0.0) || terms < 1) throw InvalidInput("navier_square_center_deflection: bad arguments");
  const double pi = std::numbers::pi;
  double sum = 0.0;
  for (int i = 0; i < terms; ++i) {
    const int m = 2 * i + 1;
    for (int j = 0; j < terms; ++j) {
      const int k = 2 * j + 1;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      const double d = (double(m) * m + double(k) * k) / (a * a);
      sum += sign / (double(m) * k * d * d);
    }
  }
  return 16.0 * q / std::pow(pi, 6) * sum;
}

std::vector<SweepRow> paradox_sweep(const std::vector<int>& sides, SupportMode mode, int order, int refinements,
                                    int threads) {
  for (int m : sides) {
    if (m < 8) throw InvalidInput("paradox_sweep: side counts must be >= 8");
  }
  std::vector<SweepRow> rows(sides.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < sides.size(); i = next++) {
      try {
        PlateProblem p;
        p.sides = sides[i];
        p.mode = mode;
        p.order = order;
        p.refinements = refinements;
        const PlateSolution s = solve_plate(p);
        rows[i] = {sides[i], s.h, s.center, std::abs(s.center - navier_center_deflection()),
                   std::abs(s.center - disk_center_deflection())};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(sides.size(), 1)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "m,h,w_center,err_navier,err_disk\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.12g,%.6e,%.6e\n", r.sides, r.h, r.w_center, r.err_navier,
                  r.err_disk);
    out << buf;
  }
}

void write_plate_vtu(std::ostream& out, const PlateSolution& s) {
  const Mesh& mesh = *s.mesh;
  const int k = s.space->order();
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
  std::vector<double> values;
  values.reserve(3 * ncell);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& dofs = s.space->element_dofs(t);
    for (const auto& tri : sub) {
      for (const auto& xi : tri) {
        const MappedPoint mp = map_point(mesh, t, xi);
        const LagrangeValues L = s.space->evaluate(t, mp, xi);
        double w = 0.0;
        for (int A = 0; A < L.phi.size(); ++A) w += L.phi[A] * s.w[dofs[idx(A)]];
        values.push_back(w);
        std::snprintf(buf, sizeof buf, "%.10g %.10g %.10g\n", mp.x.x(), mp.x.y(), w);
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
  out << "</DataArray>\n</Cells>\n<PointData Scalars=\"w\">\n"
         "<DataArray type=\"Float64\" Name=\"w\" format=\"ascii\">\n";
  for (double w : values) {
    std::snprintf(buf, sizeof buf, "%.10g\n", w);
    out << buf;
  }
  out << "</DataArray>\n</PointData>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n";
}

}  // namespace foldsim
