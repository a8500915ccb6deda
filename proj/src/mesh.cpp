#include "foldsim/mesh.hpp"

#include "foldsim/lagrange.hpp"
#include "foldsim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace foldsim {

std::string to_string(EdgeTag tag) {
  switch (tag) {
    case EdgeTag::Interior: return "interior";
    case EdgeTag::Boundary: return "boundary";
    case EdgeTag::Dirichlet: return "dirichlet";
    case EdgeTag::Symmetry: return "symmetry";
    case EdgeTag::Crease: return "crease";
  }
  return "interior";
}

EdgeTag edge_tag_from_string(const std::string& s) {
  if (s == "interior") return EdgeTag::Interior;
  if (s == "boundary") return EdgeTag::Boundary;
  if (s == "dirichlet") return EdgeTag::Dirichlet;
  if (s == "symmetry") return EdgeTag::Symmetry;
  if (s == "crease") return EdgeTag::Crease;
  throw InvalidInput("unknown edge tag '" + s + "'");
}

std::string to_string(CreaseSetting s) {
  switch (s) {
    case CreaseSetting::S1: return "s1";
    case CreaseSetting::S2: return "s2";
    case CreaseSetting::S3: return "s3";
  }
  return "s1";
}

CreaseSetting crease_setting_from_string(const std::string& s) {
  if (s == "s1" || s == "S1") return CreaseSetting::S1;
  if (s == "s2" || s == "S2") return CreaseSetting::S2;
  if (s == "s3" || s == "S3") return CreaseSetting::S3;
  throw InvalidInput("unknown crease setting '" + s + "' (expected s1, s2 or s3)");
}

Point2 Circle::project(const Point2& p) const {
  const Vec2 d = p - center;
  const double n = d.norm();
  if (n == 0.0) throw InvalidInput("Circle::project: point at the center");
  return center + (radius / n) * d;
}

// ---------------------------------------------------------------------------
// crease

namespace {

double arc_sign(const CreaseSpec& c) { return c.angle_end >= c.angle_begin ? 1.0 : -1.0; }

}  // namespace

double CreaseSpec::length() const { return circle.radius * std::abs(angle_end - angle_begin); }

Point2 CreaseSpec::point(double s) const {
  const double phi = angle_begin + arc_sign(*this) * s / circle.radius;
  return circle.center + circle.radius * Vec2(std::cos(phi), std::sin(phi));
}

Vec2 CreaseSpec::derivative(double s) const {
  const double phi = angle_begin + arc_sign(*this) * s / circle.radius;
  return arc_sign(*this) * Vec2(-std::sin(phi), std::cos(phi));
}

std::vector<Point2> CreaseSpec::vertices() const {
  std::vector<Point2> out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i < path_is_vertex.size() && path_is_vertex[i]) out.push_back(path[i]);
  }
  return out;
}

CreaseSpec reference_crease(CreaseSetting setting, int full_vertex_count) {
  if (full_vertex_count < 2) throw InvalidInput("reference_crease: need at least 2 vertices");
  CreaseSpec c;
  c.setting = setting;
  c.angle_begin = 0.0;
  c.angle_end = -kPi / 6.0;

  const int n = full_vertex_count;
  const double step = (kPi / 3.0) / (n - 1);
  std::vector<double> lower;  // angles <= 0, descending
  for (int i = n - 1; i >= 0; --i) {
    const double phi = -kPi / 6.0 + i * step;
    if (phi <= 1e-14) lower.push_back(std::min(phi, 0.0));
  }
  const auto on_arc = [](double phi) { return Point2(std::cos(phi), std::sin(phi)); };
  if (lower.front() < 0.0) {
    // the full polyline crosses y = 0 through the symmetric middle segment
    const double phi = lower.front();
    if (setting == CreaseSetting::S1) {
      c.path.push_back(on_arc(0.0));
    } else {
      c.path.push_back(Point2(std::cos(phi), 0.0));
    }
    c.path_is_vertex.push_back(false);
  }
  for (double phi : lower) {
    c.path.push_back(on_arc(phi));
    c.path_is_vertex.push_back(true);
  }
  c.path.back() = Point2(std::sqrt(3.0) / 2.0, -0.5);
  return c;
}

std::vector<Point2> crease_polyline(const CreaseSpec& crease, int n_interior_vertices) {
  if (n_interior_vertices < 0) throw InvalidInput("crease_polyline: negative vertex count");
  const double len = crease.length();
  std::vector<Point2> out;
  const int segments = n_interior_vertices + 1;
  for (int i = 0; i <= segments; ++i) out.push_back(crease.point(len * i / segments));
  return out;
}

// ---------------------------------------------------------------------------
// Mesh

namespace {

// Map a point with barycentric coordinates lambda through the blended geometry
// of a triangle with vertices X and the given curved local edges.
Point2 blended_point(const std::array<Point2, 3>& X, const std::array<int, 3>& edge_curve,
                     const std::vector<Circle>& curves, const std::array<double, 3>& lambda) {
  Point2 x = lambda[0] * X[0] + lambda[1] * X[1] + lambda[2] * X[2];
  for (int e = 0; e < 3; ++e) {
    const int c = edge_curve[static_cast<std::size_t>(e)];
    if (c < 0) continue;
    const auto [a, b] = kLocalEdges[static_cast<std::size_t>(e)];
    const double la = lambda[static_cast<std::size_t>(a)], lb = lambda[static_cast<std::size_t>(b)];
    const double w = la + lb;
    if (w <= 1e-15) continue;
    const double s = lb / w;
    const Point2 lin = X[static_cast<std::size_t>(a)] + s * (X[static_cast<std::size_t>(b)] - X[static_cast<std::size_t>(a)]);
    const Point2 proj = curves[static_cast<std::size_t>(c)].project(lin);
    x += w * (proj - lin);
  }
  return x;
}

double jacobian_det(const std::vector<Point2>& nodes, int order, const Point2& xi) {
  const auto& basis = LagrangeBasis::get(order);
  Eigen::VectorXd v;
  Eigen::MatrixX2d g;
  Eigen::MatrixX3d h;
  basis.evaluate(xi, v, g, h);
  Mat2 F = Mat2::Zero();
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    F += nodes[a] * g.row(static_cast<Eigen::Index>(a));
  }
  return F.determinant();
}

}  // namespace

Mesh::Mesh(MeshData data) : data_(std::move(data)) {
  const int nv = num_vertices();
  const int nt = num_triangles();
  if (data_.subdomains.empty()) data_.subdomains.assign(static_cast<std::size_t>(nt), 1);
  if (static_cast<int>(data_.subdomains.size()) != nt) {
    throw InvalidInput("Mesh: subdomain list size does not match triangle count");
  }
  if (data_.geometry_order < 1 || data_.geometry_order > 3) {
    throw InvalidInput("Mesh: geometry order must be in {1,2,3}");
  }
  for (const auto& p : data_.vertices) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw InvalidInput("Mesh: non-finite vertex");
  }

  tri_edges_.resize(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const auto& tri = data_.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      if (tri[static_cast<std::size_t>(i)] < 0 || tri[static_cast<std::size_t>(i)] >= nv) {
        throw InvalidInput("Mesh: triangle vertex index out of range");
      }
    }
    const Vec2 a = vertices()[static_cast<std::size_t>(tri[1])] - vertices()[static_cast<std::size_t>(tri[0])];
    const Vec2 b = vertices()[static_cast<std::size_t>(tri[2])] - vertices()[static_cast<std::size_t>(tri[0])];
    if (a.x() * b.y() - a.y() * b.x() <= 0.0) {
      throw InvalidInput("Mesh: triangle " + std::to_string(t) + " is not counter-clockwise");
    }
    for (int e = 0; e < 3; ++e) {
      const auto [la, lb] = kLocalEdges[static_cast<std::size_t>(e)];
      const int va = tri[static_cast<std::size_t>(la)], vb = tri[static_cast<std::size_t>(lb)];
      const EdgeKey key = edge_key(va, vb);
      auto it = edge_index_.find(key);
      if (it == edge_index_.end()) {
        Edge edge;
        edge.v = {key.first, key.second};
        edge.tri = {t, -1};
        edge.local = {e, -1};
        edge_index_.emplace(key, static_cast<int>(edges_.size()));
        tri_edges_[static_cast<std::size_t>(t)][static_cast<std::size_t>(e)] = static_cast<int>(edges_.size());
        edges_.push_back(edge);
      } else {
        Edge& edge = edges_[static_cast<std::size_t>(it->second)];
        if (edge.tri[1] >= 0) {
          throw InvalidInput("Mesh: non-conforming, edge shared by more than two triangles");
        }
        // counter-clockwise directions of a shared edge must be opposite
        const auto& t0 = data_.triangles[static_cast<std::size_t>(edge.tri[0])];
        const auto ccw = [](const std::array<int, 3>& tr, int local) {
          static constexpr std::array<std::array<int, 2>, 3> dir{{{1, 2}, {2, 0}, {0, 1}}};
          const auto d = dir[static_cast<std::size_t>(local)];
          return std::pair<int, int>{tr[static_cast<std::size_t>(d[0])], tr[static_cast<std::size_t>(d[1])]};
        };
        const auto d0 = ccw(t0, edge.local[0]);
        const auto d1 = ccw(tri, e);
        if (d0.first != d1.second || d0.second != d1.first) {
          throw InvalidInput("Mesh: inconsistent orientation across an edge");
        }
        edge.tri[1] = t;
        edge.local[1] = e;
        tri_edges_[static_cast<std::size_t>(t)][static_cast<std::size_t>(e)] = it->second;
      }
    }
  }

  for (auto& edge : edges_) edge.tag = edge.on_boundary() ? EdgeTag::Boundary : EdgeTag::Interior;
  for (const auto& [key, info] : data_.edge_info) {
    auto it = edge_index_.find(key);
    if (it == edge_index_.end()) throw InvalidInput("Mesh: tagged edge is not a mesh edge");
    Edge& edge = edges_[static_cast<std::size_t>(it->second)];
    const bool boundary_tag = info.tag == EdgeTag::Boundary || info.tag == EdgeTag::Dirichlet ||
                              info.tag == EdgeTag::Symmetry;
    if (boundary_tag && !edge.on_boundary()) throw InvalidInput("Mesh: boundary tag on interior edge");
    if (!boundary_tag && edge.on_boundary()) throw InvalidInput("Mesh: interior tag on boundary edge");
    if (info.curve >= static_cast<int>(data_.curves.size())) throw InvalidInput("Mesh: bad curve index");
    edge.tag = info.tag;
    edge.curve = info.curve;
  }

  tri_order_.assign(static_cast<std::size_t>(nt), 1);
  geometry_nodes_.resize(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const auto& tri = data_.triangles[static_cast<std::size_t>(t)];
    std::array<int, 3> curve{-1, -1, -1};
    bool curved = false;
    for (int e = 0; e < 3; ++e) {
      const int c = edges_[static_cast<std::size_t>(tri_edges_[static_cast<std::size_t>(t)][static_cast<std::size_t>(e)])].curve;
      if (c >= 0 && data_.geometry_order > 1) {
        curve[static_cast<std::size_t>(e)] = c;
        curved = true;
      }
    }
    const int order = curved ? data_.geometry_order : 1;
    tri_order_[static_cast<std::size_t>(t)] = order;
    const std::array<Point2, 3> X{vertices()[static_cast<std::size_t>(tri[0])],
                                  vertices()[static_cast<std::size_t>(tri[1])],
                                  vertices()[static_cast<std::size_t>(tri[2])]};
    auto& nodes = geometry_nodes_[static_cast<std::size_t>(t)];
    for (const auto& xi : LagrangeBasis::get(order).nodes()) {
      nodes.push_back(blended_point(X, curve, data_.curves, {1.0 - xi.x() - xi.y(), xi.x(), xi.y()}));
    }
    if (curved) {
      for (const auto& q : triangle_rule(2 * order)) {
        if (jacobian_det(nodes, order, q.xi) <= 0.0) {
          throw InvalidInput("Mesh: non-positive Jacobian in curved triangle " + std::to_string(t));
        }
      }
      for (const auto& xi : LagrangeBasis::get(order).nodes()) {
        if (jacobian_det(nodes, order, xi) <= 0.0) {
          throw InvalidInput("Mesh: non-positive Jacobian in curved triangle " + std::to_string(t));
        }
      }
    }
  }

  for (int v : data_.crease_vertices) {
    if (v < 0 || v >= nv) throw InvalidInput("Mesh: crease vertex index out of range");
  }
}

int Mesh::find_edge(int a, int b) const {
  auto it = edge_index_.find(edge_key(a, b));
  return it == edge_index_.end() ? -1 : it->second;
}

std::vector<int> Mesh::edges_with_tag(EdgeTag tag) const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e) {
    if (edges_[static_cast<std::size_t>(e)].tag == tag) out.push_back(e);
  }
  return out;
}

std::vector<int> Mesh::crease_path_vertices() const {
  std::vector<int> out;
  for (const auto& e : edges_) {
    if (e.tag == EdgeTag::Crease) {
      out.push_back(e.v[0]);
      out.push_back(e.v[1]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Mesh::area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) {
    const int order = triangle_geometry_order(t);
    for (const auto& q : triangle_rule(2 * order)) {
      a += q.weight * jacobian_det(geometry_nodes(t), order, q.xi);
    }
  }
  return a;
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (const auto& tri : triangles()) {
    for (int i = 0; i < 3; ++i) {
      const auto& p = vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
      const auto& q = vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>((i + 1) % 3)])];
      h = std::max(h, (p - q).norm());
    }
  }
  return h;
}

int Mesh::components_without_crease() const {
  std::vector<int> parent(static_cast<std::size_t>(num_triangles()));
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& e : edges_) {
    if (e.on_boundary() || e.tag == EdgeTag::Crease) continue;
    const int a = find(e.tri[0]), b = find(e.tri[1]);
    if (a != b) parent[static_cast<std::size_t>(a)] = b;
  }
  int count = 0;
  for (int t = 0; t < num_triangles(); ++t) count += find(t) == t ? 1 : 0;
  return count;
}

Point2 Mesh::edge_point(int e, double s) const {
  const Edge& edge = this->edge(e);
  const int t = edge.tri[0];
  const int local = edge.local[0];
  const auto& tri = triangles()[static_cast<std::size_t>(t)];
  const auto [la, lb] = kLocalEdges[static_cast<std::size_t>(local)];
  (void)lb;
  const bool same = tri[static_cast<std::size_t>(la)] == edge.v[0];
  const Point2 xi = reference_edge_point(local, same ? s : 1.0 - s);
  const int order = triangle_geometry_order(t);
  const Eigen::VectorXd phi = LagrangeBasis::get(order).values(xi);
  Point2 x = Point2::Zero();
  const auto& nodes = geometry_nodes(t);
  for (std::size_t a = 0; a < nodes.size(); ++a) x += phi[static_cast<Eigen::Index>(a)] * nodes[a];
  return x;
}

// ---------------------------------------------------------------------------
// generators

namespace {

void check_crease(const CreaseSpec& crease) {
  if (crease.path.size() < 2) throw InvalidInput("crease: path needs at least two points");
  if (crease.path_is_vertex.size() != crease.path.size()) {
    throw InvalidInput("crease: path_is_vertex size mismatch");
  }
  for (std::size_t i = 0; i < crease.path.size(); ++i) {
    const Point2& p = crease.path[i];
    if (p.x() < -1e-12 || p.x() > 2.0 + 1e-12 || p.y() < -0.5 - 1e-12 || p.y() > 1e-12) {
      throw InvalidInput("crease: path point outside the half domain");
    }
    if (crease.path_is_vertex[i] &&
        std::abs((p - crease.circle.center).norm() - crease.circle.radius) > 1e-10) {
      throw InvalidInput("crease: vertex off the exact curve");
    }
    if (i > 0 && !(p.y() < crease.path[i - 1].y())) {
      throw InvalidInput("crease: path must descend strictly from y = 0 to y = -1/2");
    }
  }
  if (std::abs(crease.path.front().y()) > 1e-12 || std::abs(crease.path.back().y() + 0.5) > 1e-12) {
    throw InvalidInput("crease: path must run from y = 0 to y = -1/2");
  }
}

std::vector<double> uniform_breaks(const std::vector<double>& knots, double h) {
  std::vector<double> out{knots.front()};
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double len = knots[i + 1] - knots[i];
    const int n = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
    for (int j = 1; j <= n; ++j) out.push_back(knots[i] + len * j / n);
  }
  out.back() = knots.back();
  return out;
}

}  // namespace

Mesh build_scenario_mesh(double h, const CreaseSpec& crease, int geometry_order) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("build_scenario_mesh: h must be positive");
  if (h < 1e-3) throw InvalidInput("build_scenario_mesh: h too small for a desk-scale mesh");
  if (geometry_order < 1 || geometry_order > 3) {
    throw InvalidInput("build_scenario_mesh: geometry order must be in {1,2,3}");
  }
  check_crease(crease);
  const bool curved = crease.setting == CreaseSetting::S1;

  // crease x-coordinate as a function of y
  const auto crease_x = [&](double y) {
    if (curved) {
      const double r = crease.circle.radius;
      const double dy = y - crease.circle.center.y();
      return crease.circle.center.x() + std::sqrt(std::max(0.0, r * r - dy * dy));
    }
    for (std::size_t i = 0; i + 1 < crease.path.size(); ++i) {
      const Point2& a = crease.path[i];
      const Point2& b = crease.path[i + 1];
      if (y <= a.y() + 1e-14 && y >= b.y() - 1e-14) {
        const double s = (a.y() - y) / (a.y() - b.y());
        return a.x() + s * (b.x() - a.x());
      }
    }
    throw InvalidInput("crease: y outside the crease path");
  };

  std::vector<double> yknots;
  for (auto it = crease.path.rbegin(); it != crease.path.rend(); ++it) yknots.push_back(it->y());
  yknots.front() = -0.5;
  yknots.back() = 0.0;
  const std::vector<double> ys = uniform_breaks(yknots, h);
  const int ny = static_cast<int>(ys.size()) - 1;

  const double xc_bottom = crease_x(-0.5);
  const double xc_mean = 0.5 * (crease_x(0.0) + xc_bottom);
  const double x_dirichlet = 0.2;
  if (xc_bottom <= x_dirichlet) throw InvalidInput("crease: crosses the Dirichlet segment");
  const double xi_d = x_dirichlet / xc_bottom;
  // xi-breaks in omega_1: gamma_D endpoint is a grid line
  const int na = std::max(1, static_cast<int>(std::lround(x_dirichlet / h)));
  const int nb = std::max(1, static_cast<int>(std::ceil((xc_mean - x_dirichlet) / h - 1e-9)));
  std::vector<double> xi_left;
  for (int j = 0; j <= na; ++j) xi_left.push_back(xi_d * j / na);
  for (int j = 1; j <= nb; ++j) xi_left.push_back(xi_d + (1.0 - xi_d) * j / nb);
  const int n2 = std::max(1, static_cast<int>(std::ceil((2.0 - xc_mean) / h - 1e-9)));
  const int n1 = static_cast<int>(xi_left.size()) - 1;
  const int nx = n1 + n2;
  if (static_cast<long>(nx) * ny > 2'000'000L) throw InvalidInput("build_scenario_mesh: mesh too large");

  MeshData data;
  const auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    const double y = ys[static_cast<std::size_t>(j)];
    const double xc = crease_x(y);
    for (int i = 0; i <= nx; ++i) {
      double x;
      if (i <= n1) {
        x = xi_left[static_cast<std::size_t>(i)] * xc;
      } else {
        x = xc + (2.0 - xc) * static_cast<double>(i - n1) / n2;
      }
      if (i == n1 && curved) {
        data.vertices.push_back(crease.circle.project(Point2(x, y)));
      } else {
        data.vertices.emplace_back(x, y);
      }
    }
  }
  data.vertices[static_cast<std::size_t>(vid(nx, 0))] = Point2(2.0, -0.5);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      const int sd = i < n1 ? 1 : 2;
      if ((i + j) % 2 == 0) {
        data.triangles.push_back({a, b, c});
        data.triangles.push_back({a, c, d});
      } else {
        data.triangles.push_back({a, b, d});
        data.triangles.push_back({b, c, d});
      }
      data.subdomains.push_back(sd);
      data.subdomains.push_back(sd);
    }
  }
  if (curved) data.curves.push_back(crease.circle);
  for (int i = 0; i < nx; ++i) {
    const double xr = data.vertices[static_cast<std::size_t>(vid(i + 1, 0))].x();
    data.edge_info[edge_key(vid(i, 0), vid(i + 1, 0))] = {
        xr <= x_dirichlet + 1e-12 ? EdgeTag::Dirichlet : EdgeTag::Boundary, -1};
    data.edge_info[edge_key(vid(i, ny), vid(i + 1, ny))] = {EdgeTag::Symmetry, -1};
  }
  for (int j = 0; j < ny; ++j) {
    data.edge_info[edge_key(vid(0, j), vid(0, j + 1))] = {EdgeTag::Boundary, -1};
    data.edge_info[edge_key(vid(nx, j), vid(nx, j + 1))] = {EdgeTag::Boundary, -1};
    data.edge_info[edge_key(vid(n1, j), vid(n1, j + 1))] = {EdgeTag::Crease, curved ? 0 : -1};
  }
  for (int j = 0; j <= ny; ++j) {
    const Point2& p = data.vertices[static_cast<std::size_t>(vid(n1, j))];
    for (std::size_t k = 0; k < crease.path.size(); ++k) {
      if (crease.path_is_vertex[k] && (crease.path[k] - p).norm() < 1e-10) {
        data.crease_vertices.push_back(vid(n1, j));
      }
    }
  }
  data.geometry_order = curved ? geometry_order : 1;
  return Mesh(std::move(data));
}

Mesh build_rectangle_mesh(Point2 lower, Point2 upper, int nx, int ny) {
  if (nx < 1 || ny < 1) throw InvalidInput("build_rectangle_mesh: need at least one cell");
  if (!(upper.x() > lower.x()) || !(upper.y() > lower.y())) {
    throw InvalidInput("build_rectangle_mesh: empty rectangle");
  }
  MeshData data;
  const auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      data.vertices.emplace_back(lower.x() + (upper.x() - lower.x()) * i / nx,
                                 lower.y() + (upper.y() - lower.y()) * j / ny);
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      if ((i + j) % 2 == 0) {
        data.triangles.push_back({a, b, c});
        data.triangles.push_back({a, c, d});
      } else {
        data.triangles.push_back({a, b, d});
        data.triangles.push_back({b, c, d});
      }
    }
  }
  return Mesh(std::move(data));
}

namespace {

// Jacobi-type smoothing of interior vertices; keeps symmetric meshes symmetric.
void smooth_interior(MeshData& data, int sweeps) {
  const auto nv = data.vertices.size();
  std::vector<bool> boundary(nv, false);
  std::map<EdgeKey, int> count;
  for (const auto& t : data.triangles) {
    for (int e = 0; e < 3; ++e) ++count[edge_key(t[static_cast<std::size_t>(e)], t[static_cast<std::size_t>((e + 1) % 3)])];
  }
  std::vector<std::vector<int>> nbr(nv);
  for (const auto& [k, c] : count) {
    if (c == 1) boundary[static_cast<std::size_t>(k.first)] = boundary[static_cast<std::size_t>(k.second)] = true;
    nbr[static_cast<std::size_t>(k.first)].push_back(k.second);
    nbr[static_cast<std::size_t>(k.second)].push_back(k.first);
  }
  for (int s = 0; s < sweeps; ++s) {
    std::vector<Point2> next = data.vertices;
    for (std::size_t v = 0; v < nv; ++v) {
      if (boundary[v] || nbr[v].empty()) continue;
      Point2 avg = Point2::Zero();
      for (int w : nbr[v]) avg += data.vertices[static_cast<std::size_t>(w)];
      next[v] = avg / static_cast<double>(nbr[v].size());
    }
    data.vertices = std::move(next);
  }
}

}  // namespace

Mesh build_polygon_mesh(int sides, int extra_refinements, bool curved, int geometry_order) {
  if (sides < 3) throw InvalidInput("build_polygon_mesh: need at least 3 sides");
  if (extra_refinements < 0) throw InvalidInput("build_polygon_mesh: negative refinement count");
  int r = 0;
  while (sides % (1 << (r + 1)) == 0 && (sides >> (r + 1)) >= 4) ++r;
  const int base = sides >> r;

  MeshData data;
  data.vertices.emplace_back(0.0, 0.0);
  for (int i = 0; i < base; ++i) {
    const double phi = 2.0 * kPi * i / base;
    data.vertices.emplace_back(std::cos(phi), std::sin(phi));
  }
  for (int i = 0; i < base; ++i) {
    const int a = 1 + i, b = 1 + (i + 1) % base;
    data.triangles.push_back({0, a, b});
    data.edge_info[edge_key(a, b)] = {EdgeTag::Boundary, 0};
  }
  data.curves.push_back(Circle{});
  data.geometry_order = 1;
  Mesh mesh(data);
  for (int l = 0; l < r; ++l) {
    MeshData refined = refine_uniform(mesh).data();
    smooth_interior(refined, 20);
    mesh = Mesh(std::move(refined));
  }
  data = mesh.data();
  for (const auto& e : mesh.edges()) {
    if (e.on_boundary()) data.crease_vertices.push_back(e.v[0]), data.crease_vertices.push_back(e.v[1]);
  }
  std::sort(data.crease_vertices.begin(), data.crease_vertices.end());
  data.crease_vertices.erase(std::unique(data.crease_vertices.begin(), data.crease_vertices.end()),
                             data.crease_vertices.end());
  if (curved) {
    data.geometry_order = geometry_order;
  } else {
    for (auto& [k, info] : data.edge_info) info.curve = -1;
    data.curves.clear();
  }
  mesh = Mesh(std::move(data));
  for (int l = 0; l < extra_refinements; ++l) mesh = refine_uniform(mesh);
  return mesh;
}

// ---------------------------------------------------------------------------
// refinement

namespace {

class MidpointTable {
 public:
  explicit MidpointTable(const Mesh& mesh, MeshData& out) : mesh_(mesh), out_(out) {}

  int get(int a, int b) {
    const EdgeKey key = edge_key(a, b);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    const int e = mesh_.find_edge(a, b);
    const Edge& edge = mesh_.edge(e);
    Point2 m = 0.5 * (mesh_.vertices()[static_cast<std::size_t>(a)] + mesh_.vertices()[static_cast<std::size_t>(b)]);
    if (edge.curve >= 0) m = mesh_.curves()[static_cast<std::size_t>(edge.curve)].project(m);
    const int id = static_cast<int>(out_.vertices.size());
    out_.vertices.push_back(m);
    ids_.emplace(key, id);
    // children inherit tag and curve
    auto info = mesh_.data().edge_info.find(key);
    if (info != mesh_.data().edge_info.end()) {
      out_.edge_info[edge_key(a, id)] = info->second;
      out_.edge_info[edge_key(id, b)] = info->second;
    }
    return id;
  }

  bool has(int a, int b) const { return ids_.count(edge_key(a, b)) > 0; }

 private:
  const Mesh& mesh_;
  MeshData& out_;
  std::map<EdgeKey, int> ids_;
};

MeshData refined_skeleton(const Mesh& mesh) {
  MeshData out;
  out.vertices = mesh.vertices();
  out.curves = mesh.curves();
  out.geometry_order = mesh.geometry_order();
  out.crease_vertices = mesh.crease_vertices();
  return out;
}

void push_red(MeshData& out, MidpointTable& mids, const std::array<int, 3>& t, int sd) {
  const int a = t[0], b = t[1], c = t[2];
  const int ab = mids.get(a, b), bc = mids.get(b, c), ca = mids.get(c, a);
  out.triangles.push_back({a, ab, ca});
  out.triangles.push_back({ab, b, bc});
  out.triangles.push_back({ca, bc, c});
  out.triangles.push_back({ab, bc, ca});
  for (int i = 0; i < 4; ++i) out.subdomains.push_back(sd);
}

}  // namespace

Mesh refine_uniform(const Mesh& mesh) {
  MeshData out = refined_skeleton(mesh);
  MidpointTable mids(mesh, out);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    push_red(out, mids, mesh.triangles()[static_cast<std::size_t>(t)], mesh.subdomain(t));
  }
  return Mesh(std::move(out));
}

Mesh refine_marked(const Mesh& mesh, const std::vector<bool>& marked) {
  if (static_cast<int>(marked.size()) != mesh.num_triangles()) {
    throw InvalidInput("refine_marked: marker size mismatch");
  }
  std::vector<bool> red = marked;
  std::vector<bool> split(static_cast<std::size_t>(mesh.num_edges()), false);
  const auto mark_edges = [&](int t) {
    for (int e : mesh.triangle_edges(t)) split[static_cast<std::size_t>(e)] = true;
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (red[static_cast<std::size_t>(t)]) mark_edges(t);
  }
  // closure: triangles with two or more split edges become red
  for (bool changed = true; changed;) {
    changed = false;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      if (red[static_cast<std::size_t>(t)]) continue;
      int n = 0;
      for (int e : mesh.triangle_edges(t)) n += split[static_cast<std::size_t>(e)] ? 1 : 0;
      if (n >= 2) {
        red[static_cast<std::size_t>(t)] = true;
        mark_edges(t);
        changed = true;
      }
    }
  }

  MeshData out = refined_skeleton(mesh);
  MidpointTable mids(mesh, out);
  // keep tags of unsplit edges
  for (const auto& [key, info] : mesh.data().edge_info) {
    if (!split[static_cast<std::size_t>(mesh.find_edge(key.first, key.second))]) out.edge_info[key] = info;
  }
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    const int sd = mesh.subdomain(t);
    if (red[static_cast<std::size_t>(t)]) {
      push_red(out, mids, tri, sd);
      continue;
    }
    int split_local = -1;
    for (int e = 0; e < 3; ++e) {
      if (split[static_cast<std::size_t>(mesh.triangle_edges(t)[static_cast<std::size_t>(e)])]) split_local = e;
    }
    if (split_local < 0) {
      out.triangles.push_back(tri);
      out.subdomains.push_back(sd);
      continue;
    }
    // green: bisect from the opposite vertex
    const int i = split_local;
    const int v0 = tri[static_cast<std::size_t>(i)];
    const int v1 = tri[static_cast<std::size_t>((i + 1) % 3)];
    const int v2 = tri[static_cast<std::size_t>((i + 2) % 3)];
    const int m = mids.get(v1, v2);
    out.triangles.push_back({v0, v1, m});
    out.triangles.push_back({v0, m, v2});
    out.subdomains.push_back(sd);
    out.subdomains.push_back(sd);
  }
  return Mesh(std::move(out));
}

namespace {

bool contains_point(const Mesh& mesh, int t, const Point2& p) {
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  const Point2& a = mesh.vertices()[static_cast<std::size_t>(tri[0])];
  const Point2& b = mesh.vertices()[static_cast<std::size_t>(tri[1])];
  const Point2& c = mesh.vertices()[static_cast<std::size_t>(tri[2])];
  Mat2 F;
  F.col(0) = b - a;
  F.col(1) = c - a;
  const Vec2 l = F.inverse() * (p - a);
  const double tol = 1e-10;
  return l.x() >= -tol && l.y() >= -tol && l.x() + l.y() <= 1.0 + tol;
}

int halvings(double factor) {
  if (!(factor > 0.0 && factor < 1.0)) throw InvalidInput("geometric refinement: factor must be in (0,1)");
  return std::max(1, static_cast<int>(std::lround(std::log(factor) / std::log(0.5))));
}

}  // namespace

Mesh refine_geometric(const Mesh& mesh, const std::vector<Point2>& centers, double factor,
                      int rounds) {
  const int levels = halvings(factor);
  if (rounds < 0) throw InvalidInput("refine_geometric: negative round count");
  Mesh current = mesh;
  for (int r = 0; r < rounds; ++r) {
    for (int l = 0; l < levels; ++l) {
      std::vector<bool> marked(static_cast<std::size_t>(current.num_triangles()), false);
      for (int t = 0; t < current.num_triangles(); ++t) {
        for (const auto& c : centers) {
          if (contains_point(current, t, c)) marked[static_cast<std::size_t>(t)] = true;
        }
      }
      current = refine_marked(current, marked);
    }
  }
  return current;
}

Mesh refine_towards_crease(const Mesh& mesh, double factor, int rounds) {
  const int levels = halvings(factor);
  if (rounds < 0) throw InvalidInput("refine_towards_crease: negative round count");
  Mesh current = mesh;
  for (int r = 0; r < rounds; ++r) {
    for (int l = 0; l < levels; ++l) {
      std::vector<bool> on_crease(static_cast<std::size_t>(current.num_vertices()), false);
      for (int v : current.crease_path_vertices()) on_crease[static_cast<std::size_t>(v)] = true;
      std::vector<bool> marked(static_cast<std::size_t>(current.num_triangles()), false);
      for (int t = 0; t < current.num_triangles(); ++t) {
        for (int v : current.triangles()[static_cast<std::size_t>(t)]) {
          if (on_crease[static_cast<std::size_t>(v)]) marked[static_cast<std::size_t>(t)] = true;
        }
      }
      current = refine_marked(current, marked);
    }
  }
  return current;
}

// ---------------------------------------------------------------------------
// IO

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  out << "foldsim-mesh 1\n";
  out << "geometry_order " << mesh.geometry_order() << "\n";
  out << "curves " << mesh.curves().size() << "\n";
  for (const auto& c : mesh.curves()) out << "c " << c.center.x() << " " << c.center.y() << " " << c.radius << "\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  for (const auto& p : mesh.vertices()) out << "v " << p.x() << " " << p.y() << "\n";
  out << "triangles " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    out << "t " << tri[0] << " " << tri[1] << " " << tri[2] << " " << mesh.subdomain(t);
    const auto& nodes = mesh.geometry_nodes(t);
    out << " " << nodes.size() - 3;
    for (std::size_t a = 3; a < nodes.size(); ++a) out << " " << nodes[a].x() << " " << nodes[a].y();
    out << "\n";
  }
  out << "edges " << mesh.data().edge_info.size() << "\n";
  for (const auto& [key, info] : mesh.data().edge_info) {
    out << "e " << key.first << " " << key.second << " " << to_string(info.tag) << " " << info.curve << "\n";
  }
  out << "crease_vertices " << mesh.crease_vertices().size();
  for (int v : mesh.crease_vertices()) out << " " << v;
  out << "\n";
}

namespace {

std::istringstream next_record(std::istream& in, const std::string& keyword) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word != keyword) throw InvalidInput("read_mesh: expected '" + keyword + "', got '" + word + "'");
    return ls;
  }
  throw InvalidInput("read_mesh: unexpected end of input, expected '" + keyword + "'");
}

std::size_t read_count(std::istream& in, const std::string& keyword) {
  auto ls = next_record(in, keyword);
  long n = -1;
  if (!(ls >> n) || n < 0) throw InvalidInput("read_mesh: bad count for '" + keyword + "'");
  return static_cast<std::size_t>(n);
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  {
    auto ls = next_record(in, "foldsim-mesh");
    int version = 0;
    if (!(ls >> version) || version != 1) throw InvalidInput("read_mesh: unsupported version");
  }
  MeshData data;
  {
    auto ls = next_record(in, "geometry_order");
    if (!(ls >> data.geometry_order)) throw InvalidInput("read_mesh: bad geometry order");
  }
  const std::size_t nc = read_count(in, "curves");
  for (std::size_t i = 0; i < nc; ++i) {
    auto ls = next_record(in, "c");
    Circle c;
    if (!(ls >> c.center.x() >> c.center.y() >> c.radius)) throw InvalidInput("read_mesh: bad curve");
    data.curves.push_back(c);
  }
  const std::size_t nv = read_count(in, "vertices");
  for (std::size_t i = 0; i < nv; ++i) {
    auto ls = next_record(in, "v");
    Point2 p;
    if (!(ls >> p.x() >> p.y())) throw InvalidInput("read_mesh: bad vertex");
    data.vertices.push_back(p);
  }
  const std::size_t nt = read_count(in, "triangles");
  std::vector<std::vector<Point2>> control(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    auto ls = next_record(in, "t");
    std::array<int, 3> tri{};
    int sd = 0;
    std::size_t ncp = 0;
    if (!(ls >> tri[0] >> tri[1] >> tri[2] >> sd >> ncp)) throw InvalidInput("read_mesh: bad triangle");
    for (std::size_t k = 0; k < ncp; ++k) {
      Point2 p;
      if (!(ls >> p.x() >> p.y())) throw InvalidInput("read_mesh: bad control point");
      control[i].push_back(p);
    }
    data.triangles.push_back(tri);
    data.subdomains.push_back(sd);
  }
  const std::size_t ne = read_count(in, "edges");
  for (std::size_t i = 0; i < ne; ++i) {
    auto ls = next_record(in, "e");
    int a = 0, b = 0, curve = -1;
    std::string tag;
    if (!(ls >> a >> b >> tag >> curve)) throw InvalidInput("read_mesh: bad edge");
    data.edge_info[edge_key(a, b)] = {edge_tag_from_string(tag), curve};
  }
  {
    auto ls = next_record(in, "crease_vertices");
    std::size_t n = 0;
    if (!(ls >> n)) throw InvalidInput("read_mesh: bad crease vertex list");
    for (std::size_t i = 0; i < n; ++i) {
      int v = 0;
      if (!(ls >> v)) throw InvalidInput("read_mesh: bad crease vertex list");
      data.crease_vertices.push_back(v);
    }
  }
  Mesh mesh(std::move(data));
  // control points are derived from the curves; reject inconsistent files
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& nodes = mesh.geometry_nodes(static_cast<int>(t));
    if (control[t].size() + 3 != nodes.size()) throw InvalidInput("read_mesh: control point count mismatch");
    for (std::size_t k = 0; k < control[t].size(); ++k) {
      if ((control[t][k] - nodes[k + 3]).norm() > 1e-9) {
        throw InvalidInput("read_mesh: control points inconsistent with the curve data");
      }
    }
  }
  return mesh;
}

}  // namespace foldsim
