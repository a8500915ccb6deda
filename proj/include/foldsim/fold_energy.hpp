#pragma once

#include "foldsim/spaces.hpp"

#include <Eigen/Sparse>

namespace foldsim {

/// Sign convention of the hinge angle between one-sided normals.
enum class AngleMode {
  Signed,    // atan2((n- x n+) . t, n- . n+), smooth through the flat state
  Unsigned,  // arccos(n+ . n-)
};

std::string to_string(AngleMode mode);
AngleMode angle_mode_from_string(const std::string& s);

/// Material, load and penalty data of the folding problem.
struct ScenarioParams {
  double E = 10.0;
  double alpha = 1e6;
  double alpha_dirichlet = -1.0;  // negative: use alpha
  double load = 0.4;              // f(t) = (0, 0, load (1 - t^2))
  double compression = 0.1;       // u_D = (x, y - compression y (1 - x) t, 0)
  AngleMode angle = AngleMode::Signed;

  // Term switches, all on for the physical functional.
  bool isometry = true;
  bool coupling = true;  // -H:m and the edge angle terms
  bool moment = true;    // -(6/E)|m|^2
  bool external = true;  // load and boundary penalty

  double penalty_dirichlet() const { return alpha_dirichlet < 0.0 ? alpha : alpha_dirichlet; }
  Vec3 force(double t) const { return {0.0, 0.0, load * (1.0 - t * t)}; }
  Vec3 boundary_data(double t, const Point2& x) const {
    return {x.x(), x.y() - compression * x.y() * (1.0 - x.x()) * t, 0.0};
  }
  /// Throws InvalidInput unless E > 0 and alpha > 0.
  void validate() const;
};

/// Discrete spaces of the fold problem plus the essential constraint
/// v_y = 0 on the symmetry line. Unknowns are packed as [v; m].
class FoldProblem {
 public:
  FoldProblem(std::shared_ptr<const Mesh> mesh, int k, bool slit);

  const Mesh& mesh() const { return lagrange_.mesh(); }
  const LagrangeSpace& lagrange() const { return lagrange_; }
  const HhjSpace& hhj() const { return hhj_; }
  int k() const { return lagrange_.order(); }
  int num_v() const { return 3 * lagrange_.num_dofs(); }
  int num_m() const { return hhj_.num_dofs(); }
  int size() const { return num_v() + num_m(); }
  const std::vector<bool>& fixed() const { return fixed_; }
  /// Interpolant X of the identity (x, y, 0).
  const Eigen::VectorXd& reference() const { return reference_; }
  /// True where the identity lies in the discrete space (k >= geometry order),
  /// so that grad X = [e1 e2] holds exactly.
  bool identity_exact(int t) const { return k() >= mesh().triangle_geometry_order(t); }

  Eigen::VectorXd pack(const State& s) const;
  void unpack(const Eigen::VectorXd& x, State& s) const;
  /// Flat identity deformation, m = 0.
  State rest_state(double t = 0.0, double beta = 1.0) const;

 private:
  LagrangeSpace lagrange_;
  HhjSpace hhj_;
  std::vector<bool> fixed_;
  Eigen::VectorXd reference_;
};

struct AssembledSystem {
  double value = 0.0;
  Eigen::VectorXd residual;
  Eigen::SparseMatrix<double> jacobian;  // empty unless requested
};

struct AssemblyOptions {
  bool jacobian = true;
  int threads = 1;  // element chunks are merged in a fixed order
};

/// Unit normal of the deformed tangent plane. Throws SingularConfiguration if
/// |dx v x dy v| <= 1e-12.
Vec3 normal_field(const Mat32& grad);

/// Elementwise second fundamental form sum_i D^2 v_i n_i.
Mat2 second_form(const DeformationValues& d);
Mat2 second_form(const FoldProblem& p, const State& s, int t, const Point2& xi);

/// Hinge angle between the normals n_minus (side tri[0]) and n_plus. The
/// signed angle is positive for a right-handed rotation about `tangent`.
double edge_jump_angle(const Vec3& n_minus, const Vec3& n_plus, const Vec3& tangent,
                       AngleMode mode);
/// Angle of the deformed state on edge e at global edge parameter s.
double edge_jump_angle(const FoldProblem& p, const State& st, int e, double s, AngleMode mode);

/// Bulk integrand at one point (load excluded).
double bulk_density(const Mat32& grad, const std::array<Mat2, 3>& hess, const Mat2& m,
                    const ScenarioParams& params, double beta);

/// Value, gradient and (optionally) Hessian of the discrete functional at the
/// state's t and beta. Rows and columns of fixed dofs are replaced by the
/// identity with zero residual.
AssembledSystem assemble(const FoldProblem& p, const State& s, const ScenarioParams& params,
                         const AssemblyOptions& opt = {});

/// max |J - J^T| / max |J|.
double symmetry_error(const Eigen::SparseMatrix<double>& J);

/// Relative error between J d and the centered difference of the residual.
double jacobian_fd_check(const FoldProblem& p, const State& s, const ScenarioParams& params,
                         const Eigen::VectorXd& direction, double h_fd);

}  // namespace foldsim
