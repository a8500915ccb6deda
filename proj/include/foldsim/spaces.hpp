#pragma once

#include "foldsim/lagrange.hpp"
#include "foldsim/mesh.hpp"
#include "foldsim/quadrature.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace foldsim {

/// Isoparametric map of one triangle evaluated at a reference point.
struct MappedPoint {
  Point2 x;
  Mat2 F;                     // dx/dxi, columns d/dxi_1, d/dxi_2
  Mat2 Finv;
  double det = 0.0;
  std::array<Mat2, 2> d2x{};  // reference Hessian of x_0 and x_1
};

/// Throws InvalidInput if xi lies outside the reference triangle (tolerance 1e-12).
MappedPoint map_point(const Mesh& mesh, int t, const Point2& xi);

/// Point on the (possibly curved) edge e at global parameter s, seen from side
/// `side` (0 = tri[0], 1 = tri[1]).
struct EdgePoint {
  Point2 xi;       // reference coordinates in the adjacent triangle
  MappedPoint map;
  Vec2 normal;     // unit normal pointing out of tri[0]
  Vec2 tangent;    // unit tangent along the global orientation v[0] -> v[1]
  double ds = 0.0; // |dx/ds| for s in [0, 1]
};
EdgePoint edge_point(const Mesh& mesh, int e, int side, double s);

/// Quadrature degree used by the assemblers: 2k on straight and 2k+2 on
/// curved triangles.
int element_quadrature_degree(const Mesh& mesh, int t, int k);

/// Physical basis values of a Lagrange element at one point.
struct LagrangeValues {
  Eigen::VectorXd phi;
  Eigen::MatrixX2d grad;
  Eigen::MatrixX3d hess;  // (xx, xy, yy)
};

/// Continuous P_k space (k <= 3). With `slit`, dofs on crease edges and on
/// crease-path vertices other than the crease vertices are duplicated per
/// subdomain, so only the crease vertices couple the two sides.
class LagrangeSpace {
 public:
  LagrangeSpace(std::shared_ptr<const Mesh> mesh, int order, bool slit);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int order() const { return order_; }
  bool slit() const { return slit_; }
  int num_dofs() const { return num_dofs_; }
  int dofs_per_element() const { return LagrangeBasis::get(order_).size(); }
  const std::vector<int>& element_dofs(int t) const { return dofs_[static_cast<std::size_t>(t)]; }
  /// Physical position of every dof node.
  const std::vector<Point2>& dof_points() const { return dof_points_; }
  /// Dofs whose node lies on an edge with the given tag.
  std::vector<int> dofs_on_tag(EdgeTag tag) const;
  /// Dof located at mesh vertex v as seen from triangle t.
  int vertex_dof(int t, int v) const;

  LagrangeValues evaluate(int t, const Point2& xi) const;
  LagrangeValues evaluate(int t, const MappedPoint& mp, const Point2& xi) const;

  /// Nodal interpolation of a scalar field.
  Eigen::VectorXd interpolate(const std::function<double(const Point2&)>& f) const;
  /// Nodal interpolation of a vector field, coefficients interleaved (3 dof + c).
  Eigen::VectorXd interpolate(const std::function<Vec3(const Point2&)>& f) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int order_;
  bool slit_;
  int num_dofs_ = 0;
  std::vector<std::vector<int>> dofs_;
  std::vector<std::pair<int, int>> owner_;  // (triangle, local node) per dof
  std::vector<Point2> dof_points_;
};

LagrangeSpace build_lagrange(std::shared_ptr<const Mesh> mesh, int k, bool slit);

/// Hellan-Herrmann-Johnson space of symmetric-matrix fields of order q with
/// single-valued normal-normal trace.
///
/// Per edge q+1 dofs (moments of the nn-trace against Legendre polynomials in
/// the global edge orientation), per triangle 3q(q+1)/2 interior dofs. The
/// nn-dofs on edges tagged Boundary, Dirichlet or Crease are eliminated, which
/// imposes m_nn = 0 there.
class HhjSpace {
 public:
  HhjSpace(std::shared_ptr<const Mesh> mesh, int order);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int num_dofs() const { return num_dofs_; }
  int dofs_per_element() const { return static_cast<int>(3 * (order_ + 1) * (order_ + 2) / 2); }
  /// Global dof per local basis function, -1 where eliminated.
  const std::vector<int>& element_dofs(int t) const { return dofs_[static_cast<std::size_t>(t)]; }
  /// Edge dofs of edge e (empty if eliminated).
  std::vector<int> edge_dofs(int e) const;
  static bool edge_constrained(EdgeTag tag);

  /// Physical basis values (n x 3 as xx, xy, yy) of triangle t.
  Eigen::MatrixX3d evaluate(int t, const MappedPoint& mp, const Point2& xi) const;
  Eigen::MatrixX3d evaluate(int t, const Point2& xi) const;

  /// Moment interpolation of a symmetric field given as (xx, xy, yy).
  Eigen::VectorXd interpolate(const std::function<Eigen::Vector3d(const Point2&)>& f) const;

 private:
  Eigen::MatrixX3d reference_values(const Point2& xi) const;

  std::shared_ptr<const Mesh> mesh_;
  int order_;
  int num_dofs_ = 0;
  std::vector<std::vector<int>> dofs_;
  std::vector<std::vector<double>> signs_;
  std::vector<std::vector<int>> edge_dofs_;
  Eigen::MatrixXd coeffs_;  // reference basis = monomials * coeffs_
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd bubble_coeffs_;  // monomial coefficients of interior test fields
  Eigen::MatrixXd gram_;           // Frobenius Gram matrix of the monomial fields
};

HhjSpace build_hhj(std::shared_ptr<const Mesh> mesh, int order);

/// Legendre polynomial P_j on [-1, 1].
double legendre(int j, double x);

/// Coupled unknowns of the fold problem.
struct State {
  Eigen::VectorXd v;  // deformation, 3 per Lagrange dof, interleaved
  Eigen::VectorXd m;  // HHJ coefficients
  double t = 0.0;
  double beta = 1.0;
};

/// Values of a Lagrange-discretized deformation at one point.
struct DeformationValues {
  Vec3 v;
  Mat32 grad;
  std::array<Mat2, 3> hess;
};

DeformationValues evaluate_deformation(const LagrangeSpace& space, const Eigen::VectorXd& v,
                                       int t, const Point2& xi);
Mat2 evaluate_moment(const HhjSpace& space, const Eigen::VectorXd& m, int t, const Point2& xi);

}  // namespace foldsim
