#pragma once

#include "foldsim/types.hpp"

#include <array>
#include <vector>

namespace foldsim {

/// Local edge i of the reference triangle is opposite local vertex i and runs
/// from the lower to the higher local vertex.
inline constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{1, 2}, {0, 2}, {0, 1}}};

/// Reference vertices (0,0), (1,0), (0,1).
Point2 reference_vertex(int i);

/// Outward unit normal of local edge i on the reference triangle.
Vec2 reference_edge_normal(int i);

/// Reference point on local edge i at parameter s in [0, 1] (local direction).
Point2 reference_edge_point(int i, double s);

/// Nodal P_k basis on the reference triangle, k in {1, 2, 3}.
///
/// Node layout: the three vertices, then k-1 nodes per local edge ordered
/// along the local edge direction, then interior nodes.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(int order);

  /// Shared instance for order 1..3.
  static const LagrangeBasis& get(int order);

  int order() const { return order_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Point2>& nodes() const { return nodes_; }

  int nodes_per_edge() const { return order_ - 1; }
  int interior_nodes() const { return (order_ - 1) * (order_ - 2) / 2; }
  /// Index of the j-th node (along the local direction) of local edge e.
  int edge_node(int e, int j) const { return 3 + e * nodes_per_edge() + j; }
  int interior_node(int j) const { return 3 + 3 * nodes_per_edge() + j; }

  Eigen::VectorXd values(const Point2& xi) const;

  /// values (n), gradients (n x 2), Hessians (n x 3 as xx, xy, yy).
  void evaluate(const Point2& xi, Eigen::VectorXd& values, Eigen::MatrixX2d& grads,
                Eigen::MatrixX3d& hessians) const;

 private:
  int order_;
  std::vector<Point2> nodes_;
  std::vector<std::array<int, 3>> multi_;  // k * barycentric coordinates of each node
};

}  // namespace foldsim
