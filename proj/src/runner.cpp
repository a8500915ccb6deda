#include "foldsim/runner.hpp"

#include "foldsim/postprocess.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace foldsim {

namespace {

std::string write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << content;
  return path.string();
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

}  // namespace

std::shared_ptr<const Mesh> build_fold_mesh(const RunConfig& cfg) {
  Mesh mesh = build_scenario_mesh(cfg.h, reference_crease(cfg.setting, cfg.crease_vertices),
                                  cfg.fold_geometry_order());
  if (cfg.refinement_rounds > 0) {
    if (cfg.setting == CreaseSetting::S1) {
      mesh = refine_towards_crease(mesh, cfg.refinement_factor, cfg.refinement_rounds);
    } else {
      // crease vertices off the outer boundary y = -1/2
      std::vector<Point2> centers;
      for (int v : mesh.crease_vertices()) {
        const Point2& x = mesh.vertices()[static_cast<std::size_t>(v)];
        if (x.y() > -0.5 + 1e-9) centers.push_back(x);
      }
      mesh = refine_geometric(mesh, centers, cfg.refinement_factor, cfg.refinement_rounds);
    }
  }
  return std::make_shared<const Mesh>(std::move(mesh));
}

FoldOutcome run_fold(const RunConfig& cfg, const std::function<void(const StepDiagnostics&)>& on_step) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  FoldOutcome out;
  auto problem = std::make_shared<const FoldProblem>(build_fold_mesh(cfg), cfg.k, cfg.setting == CreaseSetting::S3);
  out.problem = problem;

  ScenarioParams prm;
  prm.E = cfg.E;
  prm.alpha = cfg.alpha;
  prm.load = cfg.load;
  prm.compression = cfg.compression;
  NewtonConfig newton;
  newton.damping = cfg.damping;
  newton.eta = cfg.eta;
  newton.tolerance = cfg.tol;
  newton.max_iterations = cfg.max_iterations;
  LoadProgram program;
  program.load_steps = cfg.load_steps;
  program.beta_steps = cfg.beta_steps;

  std::ostringstream diag;
  write_diagnostics_header(diag);
  LoadProgramOptions opt;
  opt.threads = cfg.threads;
  opt.observe = [&](const State& s) { return point_probe(problem->lagrange(), s.v, kProbe).z(); };
  opt.on_step = [&](const StepDiagnostics& d) {
    write_diagnostics_row(diag, d);
    if (on_step) on_step(d);
  };
  auto solver = make_linear_solver(cfg.linear_solver);
  out.trajectory = run_load_program(*problem, problem->rest_state(), program, newton, prm, *solver, opt);
  out.diagnostics_csv = diag.str();

  std::ostringstream norms;
  write_norms_csv(norms, *problem, out.trajectory.states, kProbe);
  out.norms_csv = norms.str();
  for (const auto& d : out.trajectory.diagnostics) out.newton_iterations += d.iterations;
  if (!out.trajectory.states.empty()) {
    const State& s = out.trajectory.states.back();
    out.deflection = point_probe(problem->lagrange(), s.v, kProbe).z();
    out.m_l2 = lp_norm(problem->hhj(), s.m, 2.0);
    out.m_l64 = lp_norm(problem->hhj(), s.m, 64.0);
    out.violation = isometry_violation(*problem, s);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<std::string> write_fold_artifacts(const std::string& dir, const RunConfig& cfg,
                                              const FoldOutcome& run) {
  const auto root = prepare_dir(dir);
  const std::string stem = cfg.stem();
  std::vector<std::string> files;
  files.push_back(write_file(root / (stem + ".config"), cfg.snapshot()));
  files.push_back(write_file(root / (stem + "_diagnostics.csv"), run.diagnostics_csv));
  files.push_back(write_file(root / (stem + "_norms.csv"), run.norms_csv));
  const auto& states = run.trajectory.states;
  if (states.empty()) return files;

  // the trace needs a fold along the whole crease; flat or singular states
  // have no Darboux frame and get no file
  try {
    std::ostringstream o;
    write_darboux_csv(o, crease_trace_from_fem(*run.problem, states.back(), cfg.darboux_samples, 0.5));
    files.push_back(write_file(root / (stem + "_darboux.csv"), o.str()));
  } catch (const InvalidInput&) {
  } catch (const SingularConfiguration&) {
  }

  std::vector<int> steps = cfg.snapshots;
  if (steps.empty()) steps.push_back(static_cast<int>(states.size()));
  for (int j : steps) {
    if (j < 1 || j > static_cast<int>(states.size())) continue;
    std::ostringstream o;
    write_vtu(o, *run.problem, states[static_cast<std::size_t>(j - 1)], cfg.E);
    files.push_back(write_file(root / (stem + "_step" + std::to_string(j) + ".vtu"), o.str()));
  }
  return files;
}

LinearOutcome run_linear(const RunConfig& cfg) {
  cfg.validate();
  LinearOutcome out;
  out.rows = paradox_sweep(cfg.sides, cfg.support, cfg.plate_order, cfg.plate_refinements, cfg.threads);
  PlateProblem last;
  last.sides = cfg.sides.back();
  last.mode = cfg.support;
  last.order = cfg.plate_order;
  last.refinements = cfg.plate_refinements;
  out.last = solve_plate(last);
  return out;
}

std::vector<std::string> write_linear_artifacts(const std::string& dir, const RunConfig& cfg,
                                                const LinearOutcome& run) {
  const auto root = prepare_dir(dir);
  const std::string stem = cfg.stem();
  std::vector<std::string> files;
  files.push_back(write_file(root / (stem + ".config"), cfg.snapshot()));
  std::ostringstream csv;
  write_sweep_csv(csv, run.rows);
  files.push_back(write_file(root / (stem + "_sweep.csv"), csv.str()));
  std::ostringstream vtu;
  write_plate_vtu(vtu, run.last);
  files.push_back(write_file(root / (stem + "_m" + std::to_string(cfg.sides.back()) + ".vtu"), vtu.str()));
  return files;
}

GeomOutcome run_geom(const RunConfig& cfg) {
  cfg.validate();
  const CurveSamples c = synthetic_fold(random_synthetic_fold(cfg.seed), cfg.samples);
  GeomOutcome out;
  out.darboux = darboux_from_samples(c.points, c.n1, c.n2, c.ds);
  out.report = verify_relations(out.darboux, 1e-5);
  return out;
}

std::vector<std::string> write_geom_artifacts(const std::string& dir, const RunConfig& cfg,
                                              const GeomOutcome& run) {
  const auto root = prepare_dir(dir);
  const std::string stem = cfg.stem();
  std::vector<std::string> files;
  files.push_back(write_file(root / (stem + ".config"), cfg.snapshot()));
  std::ostringstream csv;
  write_darboux_csv(csv, run.darboux);
  files.push_back(write_file(root / (stem + "_darboux.csv"), csv.str()));
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "relation,residual\ncurvature_angle,%.6e\nnormal_curvature,%.6e\ntorsion,%.6e\nrotation,%.6e\n",
                run.report.curvature_angle, run.report.normal_curvature, run.report.torsion,
                run.report.rotation);
  files.push_back(write_file(root / (stem + "_relations.csv"), buf));
  return files;
}

}  // namespace foldsim
