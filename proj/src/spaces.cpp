#include "foldsim/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace foldsim {

namespace {

constexpr double kRefTol = 1e-12;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

MappedPoint map_point(const Mesh& mesh, int t, const Point2& xi) {
  if (xi.x() < -kRefTol || xi.y() < -kRefTol || xi.x() + xi.y() > 1.0 + kRefTol) {
    throw InvalidInput("map_point: reference point outside the element");
  }
  const int g = mesh.triangle_geometry_order(t);
  const auto& nodes = mesh.geometry_nodes(t);
  Eigen::VectorXd v;
  Eigen::MatrixX2d grad;
  Eigen::MatrixX3d hess;
  LagrangeBasis::get(g).evaluate(xi, v, grad, hess);
  MappedPoint mp;
  mp.x.setZero();
  mp.F.setZero();
  mp.d2x[0].setZero();
  mp.d2x[1].setZero();
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const auto r = static_cast<Eigen::Index>(a);
    mp.x += v[r] * nodes[a];
    mp.F += nodes[a] * grad.row(r);
    const Mat2 h = sym_from(hess.row(r).transpose());
    mp.d2x[0] += nodes[a].x() * h;
    mp.d2x[1] += nodes[a].y() * h;
  }
  mp.det = mp.F.determinant();
  if (!(mp.det > 0.0)) throw InvalidInput("map_point: non-positive Jacobian");
  mp.Finv = mp.F.inverse();
  return mp;
}

EdgePoint edge_point(const Mesh& mesh, int e, int side, double s) {
  const Edge& edge = mesh.edge(e);
  const int t = edge.tri[idx(side)];
  if (t < 0) throw InvalidInput("edge_point: no triangle on that side");
  const int le = edge.local[idx(side)];
  const auto& tri = mesh.triangles()[idx(t)];
  const auto [a, b] = kLocalEdges[idx(le)];
  const bool same = tri[idx(a)] == edge.v[0];
  EdgePoint ep;
  ep.xi = reference_edge_point(le, same ? s : 1.0 - s);
  ep.map = map_point(mesh, t, ep.xi);
  Vec2 dxi = reference_vertex(b) - reference_vertex(a);
  if (!same) dxi = -dxi;
  const Vec2 dx = ep.map.F * dxi;
  ep.ds = dx.norm();
  ep.tangent = dx / ep.ds;
  Vec2 nu = ep.map.Finv.transpose() * reference_edge_normal(le);
  nu.normalize();
  ep.normal = side == 0 ? nu : Vec2(-nu);
  return ep;
}

int element_quadrature_degree(const Mesh& mesh, int t, int k) {
  return mesh.triangle_geometry_order(t) > 1 ? 2 * k + 2 : 2 * k;
}

double legendre(int j, double x) {
  double p0 = 1.0, p1 = x;
  if (j == 0) return p0;
  for (int n = 2; n <= j; ++n) {
    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// ---------------------------------------------------------------------------
// Lagrange

LagrangeSpace::LagrangeSpace(std::shared_ptr<const Mesh> mesh, int order, bool slit)
    : mesh_(std::move(mesh)), order_(order), slit_(slit) {
  if (!mesh_) throw InvalidInput("LagrangeSpace: null mesh");
  if (order < 1 || order > 3) throw InvalidInput("LagrangeSpace: order must be in {1,2,3}");
  const Mesh& m = *mesh_;
  std::vector<bool> slit_vertex(idx(m.num_vertices()), false);
  if (slit_) {
    const auto path = m.crease_path_vertices();
    if (path.empty()) throw InvalidInput("LagrangeSpace: slit requested but the mesh has no crease");
    for (int v : path) slit_vertex[idx(v)] = true;
    for (int v : m.crease_vertices()) slit_vertex[idx(v)] = false;
  }
  const auto& basis = LagrangeBasis::get(order);
  const int per_edge = basis.nodes_per_edge();
  std::map<std::array<int, 4>, int> keys;  // (kind, entity, index, side)
  dofs_.resize(idx(m.num_triangles()));
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[idx(t)];
    const int sd = m.subdomain(t);
    auto& dofs = dofs_[idx(t)];
    dofs.resize(idx(basis.size()));
    for (int n = 0; n < basis.size(); ++n) {
      std::array<int, 4> key{};
      if (n < 3) {
        const int v = tri[idx(n)];
        key = {0, v, 0, slit_vertex[idx(v)] ? sd : 0};
      } else if (n < 3 + 3 * per_edge) {
        const int le = (n - 3) / per_edge;
        const int j = (n - 3) % per_edge;
        const int e = m.triangle_edges(t)[idx(le)];
        const Edge& edge = m.edge(e);
        const bool same = tri[idx(kLocalEdges[idx(le)][0])] == edge.v[0];
        const bool split = slit_ && edge.tag == EdgeTag::Crease;
        key = {1, e, same ? j : per_edge - 1 - j, split ? sd : 0};
      } else {
        key = {2, t, n - 3 - 3 * per_edge, 0};
      }
      auto [it, inserted] = keys.emplace(key, num_dofs_);
      if (inserted) {
        ++num_dofs_;
        owner_.emplace_back(t, n);
      }
      dofs[idx(n)] = it->second;
    }
  }
  dof_points_.resize(idx(num_dofs_));
  for (int d = 0; d < num_dofs_; ++d) {
    const auto [t, n] = owner_[idx(d)];
    dof_points_[idx(d)] = map_point(m, t, basis.nodes()[idx(n)]).x;
  }
}

LagrangeSpace build_lagrange(std::shared_ptr<const Mesh> mesh, int k, bool slit) {
  return LagrangeSpace(std::move(mesh), k, slit);
}

std::vector<int> LagrangeSpace::dofs_on_tag(EdgeTag tag) const {
  const auto& basis = LagrangeBasis::get(order_);
  std::set<int> out;
  for (int e : mesh_->edges_with_tag(tag)) {
    const Edge& edge = mesh_->edge(e);
    for (int side = 0; side < 2; ++side) {
      const int t = edge.tri[idx(side)];
      if (t < 0) continue;
      const int le = edge.local[idx(side)];
      const auto [a, b] = kLocalEdges[idx(le)];
      const auto& dofs = dofs_[idx(t)];
      out.insert(dofs[idx(a)]);
      out.insert(dofs[idx(b)]);
      for (int j = 0; j < basis.nodes_per_edge(); ++j) out.insert(dofs[idx(basis.edge_node(le, j))]);
    }
  }
  return {out.begin(), out.end()};
}

int LagrangeSpace::vertex_dof(int t, int v) const {
  const auto& tri = mesh_->triangles()[idx(t)];
  for (int i = 0; i < 3; ++i) {
    if (tri[idx(i)] == v) return dofs_[idx(t)][idx(i)];
  }
  throw InvalidInput("vertex_dof: vertex not in triangle");
}

LagrangeValues LagrangeSpace::evaluate(int t, const Point2& xi) const {
  return evaluate(t, map_point(*mesh_, t, xi), xi);
}

LagrangeValues LagrangeSpace::evaluate(int, const MappedPoint& mp, const Point2& xi) const {
  LagrangeValues out;
  Eigen::MatrixX2d g;
  Eigen::MatrixX3d h;
  LagrangeBasis::get(order_).evaluate(xi, out.phi, g, h);
  out.grad = g * mp.Finv;
  const auto n = out.phi.size();
  out.hess.resize(n, 3);
  const Mat2 FinvT = mp.Finv.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    Mat2 H = sym_from(h.row(i).transpose());
    H -= out.grad(i, 0) * mp.d2x[0] + out.grad(i, 1) * mp.d2x[1];
    out.hess.row(i) = sym_to(FinvT * H * mp.Finv).transpose();
  }
  return out;
}

Eigen::VectorXd LagrangeSpace::interpolate(const std::function<double(const Point2&)>& f) const {
  Eigen::VectorXd c(num_dofs_);
  for (int d = 0; d < num_dofs_; ++d) c[d] = f(dof_points_[idx(d)]);
  return c;
}

Eigen::VectorXd LagrangeSpace::interpolate(const std::function<Vec3(const Point2&)>& f) const {
  Eigen::VectorXd c(3 * num_dofs_);
  for (int d = 0; d < num_dofs_; ++d) c.segment<3>(3 * d) = f(dof_points_[idx(d)]);
  return c;
}

DeformationValues evaluate_deformation(const LagrangeSpace& space, const Eigen::VectorXd& v,
                                       int t, const Point2& xi) {
  const LagrangeValues b = space.evaluate(t, xi);
  const auto& dofs = space.element_dofs(t);
  DeformationValues out;
  out.v.setZero();
  out.grad.setZero();
  for (auto& h : out.hess) h.setZero();
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    const auto r = static_cast<Eigen::Index>(a);
    const Vec3 c = v.segment<3>(3 * dofs[a]);
    out.v += b.phi[r] * c;
    out.grad += c * b.grad.row(r);
    const Mat2 h = sym_from(b.hess.row(r).transpose());
    for (int i = 0; i < 3; ++i) out.hess[idx(i)] += c[i] * h;
  }
  return out;
}

// ---------------------------------------------------------------------------
// HHJ

namespace {

const std::array<Mat2, 3>& unit_sym() {
  static const std::array<Mat2, 3> e = [] {
    std::array<Mat2, 3> u;
    u[0] << 1, 0, 0, 0;
    u[1] << 0, 1, 1, 0;
    u[2] << 0, 0, 0, 1;
    return u;
  }();
  return e;
}

double frob(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

}  // namespace

bool HhjSpace::edge_constrained(EdgeTag tag) {
  return tag == EdgeTag::Boundary || tag == EdgeTag::Dirichlet || tag == EdgeTag::Crease;
}

HhjSpace::HhjSpace(std::shared_ptr<const Mesh> mesh, int order)
    : mesh_(std::move(mesh)), order_(order) {
  if (!mesh_) throw InvalidInput("HhjSpace: null mesh");
  if (order < 0 || order > 2) throw InvalidInput("HhjSpace: order must be in {0,1,2}");
  const int q = order;
  for (int d = 0; d <= q; ++d) {
    for (int b = 0; b <= d; ++b) exponents_.push_back({d - b, b});
  }
  const auto N = static_cast<Eigen::Index>(3 * exponents_.size());
  const auto mono_field = [&](Eigen::Index i, const Point2& x) -> Mat2 {
    const auto& e = exponents_[static_cast<std::size_t>(i / 3)];
    return std::pow(x.x(), e[0]) * std::pow(x.y(), e[1]) * unit_sym()[static_cast<std::size_t>(i % 3)];
  };

  // edge functionals on the reference element, local orientation
  const LineRule line = gauss_legendre(q + 2);
  const Eigen::Index ne = 3 * (q + 1);
  Eigen::MatrixXd D(N, N);
  for (int le = 0; le < 3; ++le) {
    const auto [a, b] = kLocalEdges[idx(le)];
    const Vec2 ehat = reference_vertex(b) - reference_vertex(a);
    const Vec2 nu = reference_edge_normal(le);
    for (int j = 0; j <= q; ++j) {
      for (Eigen::Index i = 0; i < N; ++i) {
        double sum = 0.0;
        for (const auto& lp : line) {
          const Mat2 M = mono_field(i, reference_edge_point(le, lp.s));
          sum += lp.weight * nu.dot(M * nu) * ehat.squaredNorm() * legendre(j, 2.0 * lp.s - 1.0);
        }
        D(le * (q + 1) + j, i) = sum;
      }
    }
  }
  gram_.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      double sum = 0.0;
      for (const auto& qp : triangle_rule(2 * q)) sum += qp.weight * frob(mono_field(i, qp.xi), mono_field(j, qp.xi));
      gram_(i, j) = sum;
    }
  }
  if (N > ne) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D.topRows(ne), Eigen::ComputeFullV);
    bubble_coeffs_ = svd.matrixV().rightCols(N - ne);
    D.bottomRows(N - ne) = bubble_coeffs_.transpose() * gram_;
  }
  coeffs_ = D.inverse();

  const Mesh& m = *mesh_;
  edge_dofs_.resize(idx(m.num_edges()));
  for (int e = 0; e < m.num_edges(); ++e) {
    if (edge_constrained(m.edge(e).tag)) continue;
    for (int j = 0; j <= q; ++j) edge_dofs_[idx(e)].push_back(num_dofs_++);
  }
  const int ni = 3 * q * (q + 1) / 2;
  dofs_.resize(idx(m.num_triangles()));
  signs_.resize(idx(m.num_triangles()));
  for (int t = 0; t < m.num_triangles(); ++t) {
    auto& dofs = dofs_[idx(t)];
    auto& signs = signs_[idx(t)];
    const auto& tri = m.triangles()[idx(t)];
    for (int le = 0; le < 3; ++le) {
      const int e = m.triangle_edges(t)[idx(le)];
      const bool same = tri[idx(kLocalEdges[idx(le)][0])] == m.edge(e).v[0];
      for (int j = 0; j <= q; ++j) {
        const auto& ed = edge_dofs_[idx(e)];
        dofs.push_back(ed.empty() ? -1 : ed[idx(j)]);
        signs.push_back(same || j % 2 == 0 ? 1.0 : -1.0);
      }
    }
    for (int i = 0; i < ni; ++i) {
      dofs.push_back(num_dofs_++);
      signs.push_back(1.0);
    }
  }
}

HhjSpace build_hhj(std::shared_ptr<const Mesh> mesh, int order) { return HhjSpace(std::move(mesh), order); }

std::vector<int> HhjSpace::edge_dofs(int e) const { return edge_dofs_[idx(e)]; }

Eigen::MatrixX3d HhjSpace::reference_values(const Point2& xi) const {
  const auto N = coeffs_.rows();
  Eigen::MatrixX3d mono(N, 3);
  mono.setZero();
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& e = exponents_[static_cast<std::size_t>(i / 3)];
    double p = 1.0;
    for (int k = 0; k < e[0]; ++k) p *= xi.x();
    for (int k = 0; k < e[1]; ++k) p *= xi.y();
    mono(i, i % 3) = p;
  }
  return coeffs_.transpose() * mono;
}

Eigen::MatrixX3d HhjSpace::evaluate(int t, const Point2& xi) const {
  return evaluate(t, map_point(*mesh_, t, xi), xi);
}

Eigen::MatrixX3d HhjSpace::evaluate(int t, const MappedPoint& mp, const Point2& xi) const {
  Eigen::MatrixX3d ref = reference_values(xi);
  const double s = 1.0 / (mp.det * mp.det);
  const auto& signs = signs_[idx(t)];
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    const Mat2 M = sym_from(ref.row(i).transpose());
    ref.row(i) = (signs[static_cast<std::size_t>(i)] * s) * sym_to(mp.F * M * mp.F.transpose()).transpose();
  }
  return ref;
}

Eigen::VectorXd HhjSpace::interpolate(const std::function<Eigen::Vector3d(const Point2&)>& f) const {
  const Mesh& m = *mesh_;
  const int q = order_;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(num_dofs_);
  const LineRule line = gauss_legendre(q + 4);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& dofs = dofs_[idx(t)];
    const auto& signs = signs_[idx(t)];
    for (int le = 0; le < 3; ++le) {
      const auto [a, b] = kLocalEdges[idx(le)];
      const Vec2 ehat = reference_vertex(b) - reference_vertex(a);
      for (int j = 0; j <= q; ++j) {
        const int d = dofs[idx(le * (q + 1) + j)];
        if (d < 0) continue;
        double sum = 0.0;
        for (const auto& lp : line) {
          const Point2 xi = reference_edge_point(le, lp.s);
          const MappedPoint mp = map_point(m, t, xi);
          Vec2 nu = mp.Finv.transpose() * reference_edge_normal(le);
          nu.normalize();
          const double mnn = nu.dot(sym_from(f(mp.x)) * nu);
          sum += lp.weight * mnn * (mp.F * ehat).squaredNorm() * legendre(j, 2.0 * lp.s - 1.0);
        }
        c[d] = signs[idx(le * (q + 1) + j)] * sum;
      }
    }
    const int ne = 3 * (q + 1);
    for (Eigen::Index i = 0; i < bubble_coeffs_.cols(); ++i) {
      double sum = 0.0;
      for (const auto& qp : triangle_rule(2 * q + 2 * m.triangle_geometry_order(t))) {
        const MappedPoint mp = map_point(m, t, qp.xi);
        const Mat2 Mhat = mp.det * mp.det * mp.Finv * sym_from(f(mp.x)) * mp.Finv.transpose();
        Mat2 B = Mat2::Zero();
        for (Eigen::Index r = 0; r < bubble_coeffs_.rows(); ++r) {
          const auto& e = exponents_[static_cast<std::size_t>(r / 3)];
          B += bubble_coeffs_(r, i) * std::pow(qp.xi.x(), e[0]) * std::pow(qp.xi.y(), e[1]) *
               unit_sym()[static_cast<std::size_t>(r % 3)];
        }
        sum += qp.weight * frob(Mhat, B);
      }
      c[dofs[idx(ne + static_cast<int>(i))]] = sum;
    }
  }
  return c;
}

Mat2 evaluate_moment(const HhjSpace& space, const Eigen::VectorXd& m, int t, const Point2& xi) {
  const Eigen::MatrixX3d b = space.evaluate(t, xi);
  const auto& dofs = space.element_dofs(t);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i] >= 0) c += m[dofs[i]] * b.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return sym_from(c);
}

}  // namespace foldsim
