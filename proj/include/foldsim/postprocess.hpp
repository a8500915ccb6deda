#pragma once

#include "foldsim/fold_energy.hpp"

#include <functional>
#include <iosfwd>
#include <optional>

namespace foldsim {

struct Location {
  int triangle = -1;
  Point2 xi;
};

/// Reference coordinates of x in triangle t (Newton on the geometry map for
/// curved triangles), or nullopt if x is outside its closure.
std::optional<Point2> inverse_map(const Mesh& mesh, int t, const Point2& x, double tol = 1e-10);

/// First triangle (lowest index) whose closure contains x, with the reference
/// coordinates from Newton inversion of the geometry map.
std::optional<Location> locate(const Mesh& mesh, const Point2& x, double tol = 1e-10);

/// Deformation at a point of the flat domain. On a slit crease the value of
/// the first containing triangle is returned. Throws InvalidInput if x is
/// outside the mesh.
Vec3 point_probe(const LagrangeSpace& space, const Eigen::VectorXd& v, const Point2& x);

/// Rule used for L^p norms of the moment field: the element rule for p <= 8,
/// 16 sub-triangles with a degree-10 rule otherwise.
QuadRule lp_rule(const HhjSpace& space, int t, double p);

/// (int |m|^p)^(1/p) with |m| the Frobenius norm of the physical moment. The
/// maximum over the integration points is factored out before the power is
/// taken.
double lp_norm(const HhjSpace& space, const Eigen::VectorXd& m, double p);

/// Same reduction for a scalar field sampled by a callback f(t, xi).
double lp_norm(const Mesh& mesh, const std::function<double(int, const Point2&)>& f, double p,
               const std::function<QuadRule(int)>& rule);

/// |(grad v)^T grad v - I|_{L^2}.
double isometry_violation(const FoldProblem& p, const State& s);

/// Per-element average of (E/24) |H|^2, H the elementwise second fundamental form.
std::vector<double> energy_density(const FoldProblem& p, const State& s, double E);

struct RunReport {
  std::vector<double> deflection;  // u(x_P) . e3 after each load step
  double m_l2 = 0.0;
  double m_l64 = 0.0;
  double violation = 0.0;
  std::vector<double> density;
};

RunReport make_report(const FoldProblem& p, const std::vector<State>& states, const Point2& probe, double E);

/// Columns step, t, deflection, L2, L64, violation; one row per state.
void write_norms_csv(std::ostream& out, const FoldProblem& p, const std::vector<State>& states,
                     const Point2& probe);

/// Deformed mesh as VTK XML unstructured grid: every triangle is split into
/// k^2 flat sub-triangles with unshared points, so slit cracks stay visible.
/// Cell data: element energy density and subdomain.
void write_vtu(std::ostream& out, const FoldProblem& p, const State& s, double E);

}  // namespace foldsim
