#pragma once

#include "foldsim/solver.hpp"

#include <functional>
#include <iosfwd>
#include <memory>

namespace foldsim {

// ---------------------------------------------------------------------------
// Hessian / Laplacian boundary-curvature identity

/// Scalar field with analytic derivatives; the hessian is (xx, xy, yy).
struct AnalyticField {
  std::function<double(const Point2&)> value;
  std::function<Vec2(const Point2&)> grad;
  std::function<Eigen::Vector3d(const Point2&)> hess;
};

struct IdentityDomain {
  enum class Kind { Disk, Polygon, Rectangle };
  Kind kind = Kind::Disk;
  int sides = 0;                 // Polygon: regular polygon inscribed in the unit circle
  Point2 lower{0, 0}, upper{1, 1};  // Rectangle

  static IdentityDomain disk() { return {}; }
  static IdentityDomain polygon(int m) { return {Kind::Polygon, m, {0, 0}, {1, 1}}; }
  static IdentityDomain rectangle(Point2 a, Point2 b) { return {Kind::Rectangle, 0, a, b}; }
};

struct IdentityReport {
  double hessian = 0.0;    // int |D^2 v|^2
  double laplacian = 0.0;  // int |Lap v|^2
  double boundary = 0.0;   // int_boundary kappa |d_nu v|^2, kappa the boundary curvature
  /// |hessian - (laplacian - boundary)|
  double residual() const;
  /// (sigma/2) int |Lap v|^2 + ((1 - sigma)/2) int |D^2 v|^2
  double energy(double sigma) const;
};

/// Integrates the three terms with rules exact to the given polynomial degree
/// (tensor Gauss in polar coordinates with the periodic trapezoidal rule on
/// the disk, triangle rules on fan triangles otherwise). Straight edges carry
/// no curvature, so boundary = 0 on polygons and rectangles.
IdentityReport hessian_identity(const AnalyticField& v, const IdentityDomain& domain, int degree = 20);

// ---------------------------------------------------------------------------
// Linear simply supported plate

enum class SupportMode {
  FullBoundary,  // v = 0 on the whole boundary
  CornersOnly,   // v = 0 at the polygon corners only
};

std::string to_string(SupportMode m);
SupportMode support_mode_from_string(const std::string& s);

struct PlateProblem {
  bool disk = false;  // curved unit disk instead of the inscribed polygon
  int sides = 8;      // polygon sides; boundary edge count of the disk mesh
  double sigma = 0.0;
  double load = 1.0;
  SupportMode mode = SupportMode::FullBoundary;
  int order = 3;           // Lagrange order k of the deflection, moments of order k - 1
  int geometry_order = 3;  // disk only
  int refinements = 0;     // uniform refinements beyond the base mesh of `sides` edges
  // full_boundary on polygons: also impose grad v = 0 at the corners, which
  // every v in H^2 with v = 0 on both adjacent edges satisfies but the C^0
  // deflection does not inherit
  bool corner_gradient = false;

  /// Throws InvalidInput for sigma != 0, sides < 3, order or geometry_order
  /// outside [1, 3], refinements < 0, or corners_only on the disk.
  void validate() const;
};

struct PlateSolution {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const LagrangeSpace> space;
  Eigen::VectorXd w;  // deflection
  Eigen::VectorXd m;  // HHJ moments, m = -D^2 w
  double center = 0.0;
  double energy = 0.0;  // (1/2) int |D^2 w|^2 - int q w = -(1/2) int q w at the minimizer
  double h = 0.0;       // largest element diameter
};

/// HHJ mixed discretization: find (m, w) with
///   (m, mu) + <D^2 w, mu> = 0,   <D^2 v, m> = -(q, v),
/// where <D^2 w, mu> is the elementwise Hessian plus the normal-derivative
/// jumps weighted by mu_nn. m_nn = 0 on the boundary is built into the HHJ
/// space; v = 0 is imposed on the boundary dofs or the corner vertex dofs.
/// Throws SingularMatrix if the supports leave rigid motions.
PlateSolution solve_plate(const PlateProblem& problem);

/// Deflection at a point of the flat domain; throws InvalidInput outside.
double plate_deflection(const PlateSolution& s, const Point2& x);

/// Center deflection of the Navier problem on the unit disk, the limit of
/// inscribed polygons with simple support: 3q/64.
double navier_center_deflection(double q = 1.0);
/// Center deflection of the simply supported unit disk: (5 + sigma) q / (64 (1 + sigma)).
double disk_center_deflection(double q = 1.0, double sigma = 0.0);
/// Center deflection of the Navier square of side a by the double sine
/// series truncated at `terms` odd modes per direction.
double navier_square_center_deflection(double a, double q = 1.0, int terms = 200);

struct SweepRow {
  int sides = 0;
  double h = 0.0;
  double w_center = 0.0;
  double err_navier = 0.0;  // |w - 3/64|
  double err_disk = 0.0;    // |w - 5/64|
};

/// Center deflections of the polygons with the given side counts (each >= 8)
/// at matched resolution: every mesh has `sides` boundary edges plus the
/// common number of refinements. Solves run on up to `threads` threads.
std::vector<SweepRow> paradox_sweep(const std::vector<int>& sides, SupportMode mode, int order = 3,
                                    int refinements = 0, int threads = 1);

/// Columns m, h, w_center, err_navier, err_disk.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Deflection on the k^2 sub-triangles of every element, as VTK XML.
void write_plate_vtu(std::ostream& out, const PlateSolution& s);

}  // namespace foldsim
