#include "foldsim/fold_geometry.hpp"

#include "foldsim/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>

namespace foldsim {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Fourth-order first derivative; one-sided five-point stencils at the ends.
template <class T>
std::vector<T> diff1(const std::vector<T>& f, double ds) {
  const std::size_t n = f.size();
  std::vector<T> d(n);
  const double c = 1.0 / (12.0 * ds);
  d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
  d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
  d[n - 2] = -c * (-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]);
  d[n - 1] = -c * (-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] - 3.0 * f[n - 5]);
  return d;
}

// Fourth-order second derivative; one-sided six-point stencils at the ends.
template <class T>
std::vector<T> diff2(const std::vector<T>& f, double ds) {
  const std::size_t n = f.size();
  std::vector<T> d(n);
  const double c = 1.0 / (12.0 * ds * ds);
  const auto end0 = [&](auto g) -> T {
    return c * (45.0 * g(0) - 154.0 * g(1) + 214.0 * g(2) - 156.0 * g(3) + 61.0 * g(4) - 10.0 * g(5));
  };
  const auto end1 = [&](auto g) -> T {
    return c * (10.0 * g(0) - 15.0 * g(1) - 4.0 * g(2) + 14.0 * g(3) - 6.0 * g(4) + g(5));
  };
  const auto fwd = [&](std::size_t j) { return f[j]; };
  const auto bwd = [&](std::size_t j) { return f[n - 1 - j]; };
  // five-point one-sided variants, third order
  const auto end0s = [&](auto g) -> T { return c * (35.0 * g(0) - 104.0 * g(1) + 114.0 * g(2) - 56.0 * g(3) + 11.0 * g(4)); };
  const auto end1s = [&](auto g) -> T { return c * (11.0 * g(0) - 20.0 * g(1) + 6.0 * g(2) + 4.0 * g(3) - g(4)); };
  const bool wide = n >= 6;
  d[0] = wide ? end0(fwd) : end0s(fwd);
  d[1] = wide ? end1(fwd) : end1s(fwd);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d[i] = c * (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]);
  }
  d[n - 2] = wide ? end1(bwd) : end1s(bwd);
  d[n - 1] = wide ? end0(bwd) : end0s(bwd);
  return d;
}

Vec3 unit(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw SingularConfiguration("zero vector in Darboux frame");
  return v / n;
}

double max_abs(double a, double b) { return std::max(a, std::abs(b)); }

}  // namespace

Mat3 rotation(double a, const Vec3& e) { return Eigen::AngleAxisd(a, e.normalized()).toRotationMatrix(); }

DarbouxData darboux_from_samples(const std::vector<Vec3>& points, const std::vector<Vec3>& n1,
                                 const std::vector<Vec3>& n2, double ds, double s0, double tangent_tol) {
  const std::size_t n = points.size();
  if (n < 5) throw InvalidInput("darboux_from_samples: need at least 5 samples");
  if (n1.size() != n || n2.size() != n) throw InvalidInput("darboux_from_samples: size mismatch");
  if (!(ds > 0.0)) throw InvalidInput("darboux_from_samples: spacing must be positive");

  DarbouxData d;
  d.point = points;
  d.sample_n1.resize(n);
  d.sample_n2.resize(n);
  const std::vector<Vec3> dg = diff1(points, ds);
  const std::vector<Vec3> ddg = diff2(points, ds);
  std::vector<Vec3> nr1(n), nr2(n);
  std::vector<double> speed(n);
  for (std::size_t i = 0; i < n; ++i) {
    speed[i] = dg[i].norm();
    if (std::abs(speed[i] - 1.0) > tangent_tol) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "darboux_from_samples: |gamma'| = %.6g at sample %zu; reparametrize by arclength",
                    speed[i], i);
      throw InvalidInput(buf);
    }
    nr1[i] = d.sample_n1[i] = unit(n1[i]);
    nr2[i] = d.sample_n2[i] = unit(n2[i]);
  }
  const std::vector<Vec3> dn1 = diff1(nr1, ds), dn2 = diff1(nr2, ds);

  d.s.resize(n);
  d.t.resize(n);
  d.m1.resize(n);
  d.m2.resize(n);
  d.n1.resize(n);
  d.n2.resize(n);
  d.kappa1.resize(n);
  d.kappa2.resize(n);
  d.mu1.resize(n);
  d.mu2.resize(n);
  d.tau1.resize(n);
  d.tau2.resize(n);
  d.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.s[i] = s0 + static_cast<double>(i) * ds;
    const Vec3 t = dg[i] / speed[i];
    d.t[i] = t;
    d.n1[i] = unit(nr1[i] - nr1[i].dot(t) * t);
    d.n2[i] = unit(nr2[i] - nr2[i].dot(t) * t);
    d.m1[i] = d.n1[i].cross(t);
    d.m2[i] = d.n2[i].cross(t);
    // curvature vector per unit arclength; its tangential part drops out
    const Vec3 k = ddg[i] / (speed[i] * speed[i]);
    d.kappa1[i] = k.dot(d.m1[i]);
    d.kappa2[i] = k.dot(d.m2[i]);
    d.mu1[i] = k.dot(d.n1[i]);
    d.mu2[i] = k.dot(d.n2[i]);
    d.tau1[i] = -dn1[i].dot(d.m1[i]) / speed[i];
    d.tau2[i] = -dn2[i].dot(d.m2[i]) / speed[i];
    d.theta[i] = std::atan2(d.n1[i].cross(d.n2[i]).dot(t), d.n1[i].dot(d.n2[i]));
    if (i > 0) {
      // continuous branch
      while (d.theta[i] - d.theta[i - 1] > kPi) d.theta[i] -= 2.0 * kPi;
      while (d.theta[i] - d.theta[i - 1] < -kPi) d.theta[i] += 2.0 * kPi;
    }
  }
  d.dtheta = diff1(d.theta, ds);
  for (std::size_t i = 0; i < n; ++i) d.dtheta[i] /= speed[i];
  return d;
}

double folding_angle(double kappa, double mu_hat) {
  if (kappa == 0.0) throw InvalidInput("folding_angle: geodesic curvature is zero");
  return 2.0 * std::atan(mu_hat / kappa);
}

double RelationReport::max() const {
  return std::max({curvature_angle, normal_curvature, torsion, rotation});
}

RelationReport verify_relations(const DarbouxData& d, double tol, double fold_tol) {
  RelationReport r;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double h = 0.5 * d.theta[i];
    if (std::abs(std::sin(h)) > fold_tol) {
      r.curvature_angle = max_abs(r.curvature_angle, d.kappa(i) * std::sin(h) - d.mu1[i] * std::cos(h));
      r.normal_curvature = max_abs(r.normal_curvature, d.mu2[i] + d.mu1[i]);
    }
    r.torsion = max_abs(r.torsion, d.tau2[i] - d.tau1[i] - d.dtheta[i]);
    r.rotation = std::max(r.rotation, (d.sample_n2[i] - rotation(d.theta[i], d.t[i]) * d.sample_n1[i]).norm());
  }
  r.pass = r.max() < tol;
  return r;
}

SyntheticFold random_synthetic_fold(unsigned seed, double length) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  struct Mode {
    double a, w, phi;
  };
  const auto modes = [&](double total) {
    std::vector<Mode> m(3);
    double w = 0.0;
    for (auto& x : m) {
      x = {U(gen), 0.2 + 0.8 * U(gen), 2.0 * kPi * U(gen)};
      w += x.a;
    }
    for (auto& x : m) x.a *= total / w;
    return m;
  };
  const auto series = [](std::vector<Mode> m, double c0) {
    return [m = std::move(m), c0](double s) {
      double v = c0;
      for (const auto& x : m) v += x.a * std::sin(x.w * s + x.phi);
      return v;
    };
  };
  const auto dseries = [](std::vector<Mode> m) {
    return [m = std::move(m)](double s) {
      double v = 0.0;
      for (const auto& x : m) v += x.a * x.w * std::cos(x.w * s + x.phi);
      return v;
    };
  };
  SyntheticFold f;
  f.length = length;
  f.kappa = series(modes(0.5), 0.8);
  const auto th = modes(0.8);
  f.theta = series(th, 0.5 + 0.5 * U(gen));
  f.dtheta = dseries(th);
  f.tau1 = series(modes(0.3), 0.0);
  return f;
}

CurveSamples synthetic_fold(const SyntheticFold& f, int n_samples, double max_step) {
  if (n_samples < 2) throw InvalidInput("synthetic_fold: need at least 2 samples");
  if (!(max_step > 0.0) || !(f.length > 0.0)) throw InvalidInput("synthetic_fold: bad step or length");
  using Y = Eigen::Matrix<double, 12, 1>;  // gamma, t, m, n
  const auto rhs = [&](double s, const Y& y) {
    const double k = f.kappa(s), mu = f.mu1(s), tau = f.tau1(s);
    const Vec3 t = y.segment<3>(3), m = y.segment<3>(6), n = y.segment<3>(9);
    Y d;
    d.segment<3>(0) = t;
    d.segment<3>(3) = k * m + mu * n;
    d.segment<3>(6) = -k * t + tau * n;
    d.segment<3>(9) = -mu * t - tau * m;
    return d;
  };
  CurveSamples out;
  out.ds = f.length / (n_samples - 1);
  const int sub = static_cast<int>(std::ceil(out.ds / max_step - 1e-12));
  const double h = out.ds / sub;
  Y y = Y::Zero();
  y[3] = y[7] = y[11] = 1.0;
  double s = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    if (i > 0) {
      for (int j = 0; j < sub; ++j) {
        const Y k1 = rhs(s, y);
        const Y k2 = rhs(s + 0.5 * h, y + 0.5 * h * k1);
        const Y k3 = rhs(s + 0.5 * h, y + 0.5 * h * k2);
        const Y k4 = rhs(s + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s = (static_cast<double>(i - 1) * sub + j + 1) * h;
      }
    }
    const Vec3 t = y.segment<3>(3), n = y.segment<3>(9);
    out.points.push_back(y.segment<3>(0));
    out.n1.push_back(n);
    out.n2.push_back(rotation(f.theta(s), t) * n);
  }
  return out;
}

DarbouxData crease_trace_from_fem(const FoldProblem& p, const State& st, int n_samples, double tangent_tol) {
  const Mesh& mesh = p.mesh();
  const std::vector<int> crease = mesh.edges_with_tag(EdgeTag::Crease);
  if (crease.empty()) throw InvalidInput("crease_trace_from_fem: mesh has no crease");
  if (n_samples < 5) throw InvalidInput("crease_trace_from_fem: need at least 5 samples");

  // order the crease edges into a path starting at the end with largest y
  std::map<int, std::vector<int>> at;
  for (int e : crease) {
    for (int v : mesh.edge(e).v) at[v].push_back(e);
  }
  int start = -1;
  for (const auto& [v, es] : at) {
    if (es.size() == 1 && (start < 0 || mesh.vertices()[idx(v)].y() > mesh.vertices()[idx(start)].y())) start = v;
  }
  if (start < 0) throw InvalidInput("crease_trace_from_fem: crease is not an open path");

  struct Piece {
    int edge;
    bool forward;
    std::vector<double> table;  // cumulative chord length at uniform edge parameters
  };
  constexpr int kTable = 32;
  std::vector<Piece> path;
  std::vector<double> offset{0.0};
  int v = start, prev = -1;
  while (true) {
    int next = -1;
    for (int e : at[v]) {
      if (e != prev) next = e;
    }
    if (next < 0) break;
    const Edge& ed = mesh.edge(next);
    Piece pc{next, ed.v[0] == v, {0.0}};
    Point2 a = mesh.edge_point(next, pc.forward ? 0.0 : 1.0);
    for (int j = 1; j <= kTable; ++j) {
      const double u = static_cast<double>(j) / kTable;
      const Point2 b = mesh.edge_point(next, pc.forward ? u : 1.0 - u);
      pc.table.push_back(pc.table.back() + (b - a).norm());
      a = b;
    }
    offset.push_back(offset.back() + pc.table.back());
    path.push_back(std::move(pc));
    prev = next;
    v = ed.v[0] == v ? ed.v[1] : ed.v[0];
    if (path.size() > crease.size()) throw InvalidInput("crease_trace_from_fem: crease path has a cycle");
  }
  if (path.size() != crease.size()) throw InvalidInput("crease_trace_from_fem: crease is not connected");

  const double L = offset.back();
  const double ds = L / n_samples;
  double shift = 0.5 * ds;
  for (double o : offset) {
    const double r = std::fmod(o - shift, ds);
    if (std::min(std::abs(r), ds - std::abs(r)) < 1e-9 * ds) shift = 0.25 * ds;
  }

  std::vector<Vec3> pts, n1, n2;
  std::size_t k = 0;
  for (int i = 0; i < n_samples; ++i) {
    const double s = shift + i * ds;
    while (k + 1 < path.size() && s > offset[k + 1]) ++k;
    const Piece& pc = path[k];
    const double local = s - offset[k];
    const auto it = std::upper_bound(pc.table.begin(), pc.table.end(), local);
    const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - pc.table.begin()), 1, kTable);
    const double frac = (local - pc.table[j - 1]) / (pc.table[j] - pc.table[j - 1]);
    const double u = (static_cast<double>(j - 1) + frac) / kTable;
    const Point2 x = mesh.edge_point(pc.edge, pc.forward ? u : 1.0 - u);

    const Edge& ed = mesh.edge(pc.edge);
    Vec3 normal[2];
    Vec3 point = Vec3::Zero();
    for (int t : ed.tri) {
      if (t < 0) throw InvalidInput("crease_trace_from_fem: crease edge on the boundary");
      const auto xi = inverse_map(mesh, t, x, 1e-8);
      if (!xi) throw InvalidInput("crease_trace_from_fem: crease point not on its triangle");
      const DeformationValues dv = evaluate_deformation(p.lagrange(), st.v, t, *xi);
      const int side = mesh.subdomain(t) == 1 ? 0 : 1;
      normal[side] = unit(dv.grad.col(0).cross(dv.grad.col(1)));
      if (side == 0) point = dv.v;
    }
    pts.push_back(point);
    n1.push_back(normal[0]);
    n2.push_back(normal[1]);
  }
  return darboux_from_samples(pts, n1, n2, ds, shift, tangent_tol);
}

void write_darboux_csv(std::ostream& out, const DarbouxData& d) {
  out << "s,kappa,mu1,mu2,tau1,tau2,theta\n";
  char buf[256];
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.s[i], d.kappa(i), d.mu1[i],
                  d.mu2[i], d.tau1[i], d.tau2[i], d.theta[i]);
    out << buf;
  }
}

}  // namespace foldsim
