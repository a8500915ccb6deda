#include "foldsim/lagrange.hpp"

#include "foldsim/hyperdual.hpp"

#include <cmath>

namespace foldsim {

Point2 reference_vertex(int i) {
  switch (i) {
    case 0: return {0.0, 0.0};
    case 1: return {1.0, 0.0};
    case 2: return {0.0, 1.0};
    default: throw InvalidInput("reference_vertex: index out of range");
  }
}

Vec2 reference_edge_normal(int i) {
  switch (i) {
    case 0: return Vec2(1.0, 1.0) / std::sqrt(2.0);
    case 1: return {-1.0, 0.0};
    case 2: return {0.0, -1.0};
    default: throw InvalidInput("reference_edge_normal: index out of range");
  }
}

Point2 reference_edge_point(int i, double s) {
  const auto [a, b] = kLocalEdges.at(static_cast<std::size_t>(i));
  return reference_vertex(a) + s * (reference_vertex(b) - reference_vertex(a));
}

LagrangeBasis::LagrangeBasis(int order) : order_(order) {
  if (order < 1 || order > 3) throw InvalidInput("LagrangeBasis: order must be in {1,2,3}");
  for (int i = 0; i < 3; ++i) nodes_.push_back(reference_vertex(i));
  for (int e = 0; e < 3; ++e) {
    for (int j = 1; j < order; ++j) {
      nodes_.push_back(reference_edge_point(e, static_cast<double>(j) / order));
    }
  }
  if (order == 3) nodes_.push_back(Point2(1.0 / 3.0, 1.0 / 3.0));

  for (const auto& p : nodes_) {
    const double l[3] = {1.0 - p.x() - p.y(), p.x(), p.y()};
    std::array<int, 3> a{};
    for (int i = 0; i < 3; ++i) a[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(order * l[i]));
    multi_.push_back(a);
  }
}

const LagrangeBasis& LagrangeBasis::get(int order) {
  static const LagrangeBasis p1(1), p2(2), p3(3);
  switch (order) {
    case 1: return p1;
    case 2: return p2;
    case 3: return p3;
    default: throw InvalidInput("LagrangeBasis::get: order must be in {1,2,3}");
  }
}

Eigen::VectorXd LagrangeBasis::values(const Point2& xi) const {
  Eigen::VectorXd v;
  Eigen::MatrixX2d g;
  Eigen::MatrixX3d h;
  evaluate(xi, v, g, h);
  return v;
}

// phi_a = prod_i prod_{j < a_i} (k lambda_i - j) / (j + 1), evaluated with
// second-order forward differentiation in (xi_1, xi_2).
void LagrangeBasis::evaluate(const Point2& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads,
                             Eigen::MatrixX3d& hessians) const {
  using D = Dual2<2>;
  const D x = D::variable(xi.x(), 0), y = D::variable(xi.y(), 1);
  const std::array<D, 3> lambda{D(1.0) - x - y, x, y};
  const auto n = static_cast<Eigen::Index>(multi_.size());
  values.resize(n);
  grads.resize(n, 2);
  hessians.resize(n, 3);
  for (Eigen::Index r = 0; r < n; ++r) {
    D phi(1.0);
    for (std::size_t i = 0; i < 3; ++i) {
      for (int j = 0; j < multi_[static_cast<std::size_t>(r)][i]; ++j) {
        phi = phi * ((order_ * lambda[i] - D(static_cast<double>(j))) * (1.0 / (j + 1)));
      }
    }
    values[r] = phi.v;
    grads.row(r) = phi.g.transpose();
    hessians.row(r) << phi.h(0, 0), phi.h(0, 1), phi.h(1, 1);
  }
}

}  // namespace foldsim
