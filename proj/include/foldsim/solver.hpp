#pragma once

#include "foldsim/fold_energy.hpp"

#include <functional>
#include <iosfwd>
#include <memory>

namespace foldsim {

/// Step fraction lambda of Newton iteration n = 1, 2, ...
///  Backtracking: from 1 down to the floor eta, accepted only on residual
///                decrease; rejected otherwise.
///  Ramp:         min(1, eta n), no decrease test.
///  Hybrid:       backtracking from 1 down to min(1, eta n); if no trial
///                decreases the residual the ramp value is taken anyway.
///  Natural:      backtracking from 1 down to eta on the natural monotonicity
///                test |J^-1 r(x + lambda d)| < (1 - lambda / 2) |d|, using the
///                factorization at x; the floor step is taken if none passes.
enum class Damping { Backtracking, Ramp, Hybrid, Natural };

std::string to_string(Damping d);
Damping damping_from_string(const std::string& s);

struct NewtonConfig {
  Damping damping = Damping::Ramp;
  double eta = 0.05;        // smallest admissible step fraction
  double tolerance = 1e-6;  // on the Euclidean residual norm
  int max_iterations = 100;
  double backtrack = 0.5;   // step fraction factor per backtrack
  int max_backtracks = 8;   // the floor eta is always tried last
  /// Throws InvalidInput unless eta in (0, 1], tolerance > 0, backtrack in (0, 1).
  void validate() const;
};

struct LoadProgram {
  int load_steps = 30;  // t_j = j / load_steps
  int beta_steps = 5;   // beta_i = i / beta_steps during the first load step
  int max_bisections = 6;
  void validate() const;
};

/// Direct solver for J delta = -r. Iterative refinement runs until
/// |J delta + r| <= tolerance |r| or refinement_steps are used up.
class LinearSolver {
 public:
  virtual ~LinearSolver() = default;
  /// Throws SingularMatrix if the factorization fails or the final relative
  /// residual exceeds reject_tolerance.
  virtual Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& r) = 0;
  /// -J^-1 r with the factorization of the last solve, without refinement.
  virtual Eigen::VectorXd resolve(const Eigen::VectorXd& r) = 0;
  virtual std::string name() const = 0;
  double tolerance = 1e-10;
  double reject_tolerance = 1e-6;
  int refinement_steps = 3;
  double last_relative_residual = 0.0;
};

/// "umfpack" (if built with SuiteSparse), "sparselu", or "default".
std::unique_ptr<LinearSolver> make_linear_solver(const std::string& kind = "default");
std::vector<std::string> available_linear_solvers();

Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& r);

/// Residual and (if requested) Jacobian at x. May throw SingularConfiguration,
/// which the line search treats as an inadmissible trial point.
using SystemFunction = std::function<AssembledSystem(const Eigen::VectorXd& x, bool jacobian)>;

struct StepReport {
  double lambda = 0.0;
  double residual_before = 0.0;
  double residual_after = 0.0;
  int backtracks = 0;
  bool accepted = false;
};

/// One damped Newton update of x, given the assembled system at x. The step
/// fraction never goes below eta. A rejected step leaves x unchanged.
/// `iteration` is the 1-based Newton iteration count.
StepReport newton_step(Eigen::VectorXd& x, const AssembledSystem& sys, const SystemFunction& f,
                       const NewtonConfig& config, LinearSolver& solver, int iteration = 1);

struct NewtonReport {
  bool converged = false;
  bool rejected = false;  // stopped by a rejected step
  int iterations = 0;
  std::vector<double> residuals;  // residual norm before each iteration and at exit
  std::vector<StepReport> steps;
  std::string message;
};

NewtonReport newton_solve(Eigen::VectorXd& x, const SystemFunction& f, const NewtonConfig& config,
                          LinearSolver& solver);

/// Newton solve of the fold problem at the state's t and beta.
NewtonReport solve_state(const FoldProblem& p, State& s, const ScenarioParams& params,
                         const NewtonConfig& config, LinearSolver& solver, int threads = 1);

struct StepDiagnostics {
  int step = 0;  // 0-based load step
  double t = 0.0;
  double beta = 1.0;
  int iterations = 0;  // Newton iterations including bisected sub-steps
  double residual = 0.0;
  double deflection = 0.0;
};

struct Trajectory {
  std::vector<State> states;  // converged state after each load step
  std::vector<StepDiagnostics> diagnostics;
  bool completed = false;
  std::string message;
};

struct LoadProgramOptions {
  int threads = 1;
  /// Deflection reported in the diagnostics; 0 if unset.
  std::function<double(const State&)> observe;
  /// Called after each diagnostics row.
  std::function<void(const StepDiagnostics&)> on_step;
};

/// First load step: beta runs over i / beta_steps at t = 1 / load_steps. Then t
/// advances uniformly to 1 with beta = 1, warm-starting from the previous
/// state. A failed step is retried on halved increments up to max_bisections
/// times; after that the program stops and returns the partial trajectory.
Trajectory run_load_program(const FoldProblem& p, const State& initial, const LoadProgram& program,
                            const NewtonConfig& config, const ScenarioParams& params, LinearSolver& solver,
                            const LoadProgramOptions& opt = {});

void write_diagnostics_header(std::ostream& out);
void write_diagnostics_row(std::ostream& out, const StepDiagnostics& d);

}  // namespace foldsim
