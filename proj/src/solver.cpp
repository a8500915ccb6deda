#include "foldsim/solver.hpp"

#include <Eigen/SparseLU>
#ifdef FOLDSIM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <cmath>
#include <cstdio>
#include <ostream>

namespace foldsim {

void NewtonConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("newton damping eta must lie in (0, 1]");
  if (!(tolerance > 0.0)) throw InvalidInput("newton tolerance must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidInput("backtracking factor must lie in (0, 1)");
  if (max_iterations < 1) throw InvalidInput("newton max_iterations must be >= 1");
  if (max_backtracks < 0) throw InvalidInput("newton max_backtracks must be >= 0");
}

void LoadProgram::validate() const {
  if (load_steps < 1) throw InvalidInput("load_steps must be >= 1");
  if (beta_steps < 1) throw InvalidInput("beta_steps must be >= 1");
  if (max_bisections < 0) throw InvalidInput("max_bisections must be >= 0");
}

namespace {

template <class Factorization>
class DirectSolver final : public LinearSolver {
 public:
  explicit DirectSolver(std::string name) : name_(std::move(name)) {}

  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& r) override {
    if (J.rows() != J.cols() || J.rows() != r.size()) throw InvalidInput("linear_solve: dimension mismatch");
    const double rn = r.norm();
    if (rn == 0.0) return Eigen::VectorXd::Zero(r.size());
    lu_.compute(J);
    if (lu_.info() != Eigen::Success) throw SingularMatrix(name_ + ": factorization failed");
    const Eigen::VectorXd rhs = -r;
    Eigen::VectorXd delta = lu_.solve(rhs);
    Eigen::VectorXd res = J * delta + r;
    for (int i = 0; i < refinement_steps && res.norm() > tolerance * rn; ++i) {
      const Eigen::VectorXd corr = lu_.solve(res);
      delta -= corr;
      res = J * delta + r;
    }
    const double rel = res.norm() / rn;
    last_relative_residual = rel;
    if (!std::isfinite(rel) || rel > reject_tolerance) {
      char buf[128];
      std::snprintf(buf, sizeof buf, ": relative residual %.3e exceeds %.1e", rel, reject_tolerance);
      throw SingularMatrix(name_ + buf);
    }
    return delta;
  }

  Eigen::VectorXd resolve(const Eigen::VectorXd& r) override {
    const Eigen::VectorXd rhs = -r;
    return lu_.solve(rhs);
  }

  std::string name() const override { return name_; }

 private:
  std::string name_;
  Factorization lu_;
};

using SparseLu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

}  // namespace

std::vector<std::string> available_linear_solvers() {
#ifdef FOLDSIM_HAVE_UMFPACK
  return {"umfpack", "sparselu"};
#else
  return {"sparselu"};
#endif
}

std::unique_ptr<LinearSolver> make_linear_solver(const std::string& kind) {
#ifdef FOLDSIM_HAVE_UMFPACK
  if (kind == "default" || kind == "umfpack") {
    return std::make_unique<DirectSolver<Eigen::UmfPackLU<Eigen::SparseMatrix<double>>>>("umfpack");
  }
#else
  if (kind == "default") return std::make_unique<DirectSolver<SparseLu>>("sparselu");
#endif
  if (kind == "sparselu") return std::make_unique<DirectSolver<SparseLu>>("sparselu");
  throw InvalidInput("unknown or unavailable linear solver '" + kind + "'");
}

Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& J, const Eigen::VectorXd& r) {
  return make_linear_solver()->solve(J, r);
}

std::string to_string(Damping d) {
  switch (d) {
    case Damping::Backtracking: return "backtracking";
    case Damping::Ramp: return "ramp";
    case Damping::Hybrid: return "hybrid";
    case Damping::Natural: return "natural";
  }
  return "?";
}

Damping damping_from_string(const std::string& s) {
  if (s == "backtracking") return Damping::Backtracking;
  if (s == "ramp") return Damping::Ramp;
  if (s == "hybrid") return Damping::Hybrid;
  if (s == "natural") return Damping::Natural;
  throw InvalidInput("unknown damping '" + s + "' (expected backtracking, ramp, hybrid or natural)");
}

StepReport newton_step(Eigen::VectorXd& x, const AssembledSystem& sys, const SystemFunction& f,
                       const NewtonConfig& config, LinearSolver& solver, int iteration) {
  StepReport rep;
  rep.residual_before = sys.residual.norm();
  rep.residual_after = rep.residual_before;
  const Eigen::VectorXd delta = solver.solve(sys.jacobian, sys.residual);
  const auto trial_residual = [&](double lambda) {
    try {
      return f(x + lambda * delta, false).residual.norm();
    } catch (const SingularConfiguration&) {
      return static_cast<double>(INFINITY);
    }
  };
  if (config.damping == Damping::Natural) {
    const double dn = delta.norm();
    double lambda = 1.0;
    for (int b = 0;; ++b) {
      const bool last = lambda <= config.eta;
      try {
        const Eigen::VectorXd trial = x + lambda * delta;
        const Eigen::VectorXd r = f(trial, false).residual;
        const double rn = r.norm();
        if (std::isfinite(rn) && (last || solver.resolve(r).norm() < (1.0 - 0.5 * lambda) * dn)) {
          x = trial;
          rep.lambda = lambda;
          rep.residual_after = rn;
          rep.backtracks = b;
          rep.accepted = true;
          return rep;
        }
      } catch (const SingularConfiguration&) {
      }
      if (last) {
        rep.lambda = lambda;
        rep.backtracks = b;
        return rep;
      }
      lambda = (b + 1 >= config.max_backtracks) ? config.eta : std::max(lambda * config.backtrack, config.eta);
    }
  }
  const double ramp = std::min(1.0, config.eta * iteration);
  const double floor = config.damping == Damping::Backtracking ? config.eta : std::max(ramp, config.eta);
  double lambda = config.damping == Damping::Ramp ? floor : 1.0;
  for (int b = 0;; ++b) {
    const double rn = trial_residual(lambda);
    const bool last = lambda <= floor;
    const bool take = rn < rep.residual_before || (last && config.damping != Damping::Backtracking && std::isfinite(rn));
    if (take) {
      x += lambda * delta;
      rep.lambda = lambda;
      rep.residual_after = rn;
      rep.backtracks = b;
      rep.accepted = true;
      return rep;
    }
    if (last) {
      rep.lambda = lambda;
      rep.backtracks = b;
      return rep;
    }
    lambda = (b + 1 >= config.max_backtracks) ? floor : std::max(lambda * config.backtrack, floor);
  }
}

NewtonReport newton_solve(Eigen::VectorXd& x, const SystemFunction& f, const NewtonConfig& config,
                          LinearSolver& solver) {
  config.validate();
  NewtonReport rep;
  for (;;) {
    const AssembledSystem sys = f(x, true);
    const double rn = sys.residual.norm();
    rep.residuals.push_back(rn);
    if (!std::isfinite(rn)) {
      rep.message = "non-finite residual";
      return rep;
    }
    if (rn <= config.tolerance) {
      rep.converged = true;
      return rep;
    }
    if (rep.iterations >= config.max_iterations) {
      rep.message = "no convergence within " + std::to_string(config.max_iterations) + " iterations";
      return rep;
    }
    StepReport step;
    try {
      step = newton_step(x, sys, f, config, solver, rep.iterations + 1);
    } catch (const SingularMatrix& e) {
      rep.rejected = true;
      rep.message = e.what();
      return rep;
    }
    rep.steps.push_back(step);
    ++rep.iterations;
    if (!step.accepted) {
      rep.rejected = true;
      rep.message = config.damping == Damping::Backtracking
                        ? "step rejected: no residual decrease at the damping floor"
                        : "step rejected: degenerate trial state";
      return rep;
    }
  }
}

NewtonReport solve_state(const FoldProblem& p, State& s, const ScenarioParams& params,
                         const NewtonConfig& config, LinearSolver& solver, int threads) {
  State work = s;
  const SystemFunction f = [&](const Eigen::VectorXd& x, bool jac) {
    p.unpack(x, work);
    return assemble(p, work, params, {jac, threads});
  };
  Eigen::VectorXd x = p.pack(s);
  NewtonReport rep = newton_solve(x, f, config, solver);
  p.unpack(x, s);
  return rep;
}

namespace {

// Solves at `target` of the continuation parameter set by `apply`, starting
// from the converged state at `from`. Failed solves are retried from the last
// converged state on halved increments.
struct Continuation {
  const FoldProblem& p;
  const ScenarioParams& params;
  const NewtonConfig& config;
  LinearSolver& solver;
  int threads;
  int max_bisections;

  bool advance(State& s, double from, double target, const std::function<void(State&, double)>& apply,
               int& iterations, double& residual, std::string& message) const {
    double done = from;
    double inc = target - from;
    int depth = 0;
    while (done < target) {
      const double next = (target - done <= inc * (1.0 + 1e-12)) ? target : done + inc;
      State trial = s;
      apply(trial, next);
      const NewtonReport rep = solve_state(p, trial, params, config, solver, threads);
      iterations += rep.iterations;
      residual = rep.residuals.empty() ? 0.0 : rep.residuals.back();
      if (rep.converged) {
        s = trial;
        done = next;
        continue;
      }
      if (depth >= max_bisections) {
        message = rep.message;
        return false;
      }
      ++depth;
      inc *= 0.5;
    }
    return true;
  }
};

}  // namespace

Trajectory run_load_program(const FoldProblem& p, const State& initial, const LoadProgram& program,
                            const NewtonConfig& config, const ScenarioParams& params, LinearSolver& solver,
                            const LoadProgramOptions& opt) {
  program.validate();
  config.validate();
  params.validate();
  Trajectory traj;
  const Continuation cont{p, params, config, solver, opt.threads, program.max_bisections};
  State s = initial;

  const auto emit = [&](int step, int iterations, double residual) {
    StepDiagnostics d;
    d.step = step;
    d.t = s.t;
    d.beta = s.beta;
    d.iterations = iterations;
    d.residual = residual;
    d.deflection = opt.observe ? opt.observe(s) : 0.0;
    traj.diagnostics.push_back(d);
    if (opt.on_step) opt.on_step(d);
  };

  // first load step: beta continuation at t_1
  s.t = 1.0 / program.load_steps;
  for (int i = 1; i <= program.beta_steps; ++i) {
    const double b0 = (i == 1) ? 0.0 : static_cast<double>(i - 1) / program.beta_steps;
    const double b1 = static_cast<double>(i) / program.beta_steps;
    int iterations = 0;
    double residual = 0.0;
    const bool ok = cont.advance(s, b0, b1, [](State& st, double b) { st.beta = b; }, iterations, residual,
                                 traj.message);
    if (!ok) {
      traj.message = "load step 0, beta " + std::to_string(b1) + ": " + traj.message;
      return traj;
    }
    emit(0, iterations, residual);
  }
  traj.states.push_back(s);

  for (int j = 2; j <= program.load_steps; ++j) {
    int iterations = 0;
    double residual = 0.0;
    const double t0 = static_cast<double>(j - 1) / program.load_steps;
    const double t1 = static_cast<double>(j) / program.load_steps;
    const bool ok =
        cont.advance(s, t0, t1, [](State& st, double t) { st.t = t; }, iterations, residual, traj.message);
    if (!ok) {
      traj.message = "load step " + std::to_string(j - 1) + ": " + traj.message;
      return traj;
    }
    emit(j - 1, iterations, residual);
    traj.states.push_back(s);
  }
  traj.completed = true;
  return traj;
}

void write_diagnostics_header(std::ostream& out) { out << "step,t,beta,iterations,residual,deflection\n"; }

void write_diagnostics_row(std::ostream& out, const StepDiagnostics& d) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d,%.17g,%.17g\n", d.step, d.t, d.beta, d.iterations, d.residual,
                d.deflection);
  out << buf;
}

}  // namespace foldsim
