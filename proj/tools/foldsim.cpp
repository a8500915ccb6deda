// foldsim: command-line runner for the fold, linear plate and frame-oracle experiments.

#include "foldsim/acceptance.hpp"
#include "foldsim/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;

// Flag values are kept as strings and applied to the RunConfig after the
// config file, so flags override the file.
struct Overrides {
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_option(flag, values[key], help));
  }
  void apply(foldsim::RunConfig& cfg) const {
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) cfg.set(key, values.at(key));
    }
  }
};

void print_files(const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace foldsim;
  CLI::App app{"foldsim: nonlinear Kirchhoff folding, linear plate paradox and Darboux frame oracle"};
  app.require_subcommand(1);
  std::string config_file;
  Overrides common;
  app.add_option("--config", config_file, "key = value file; flags override its entries");

  auto* fold = app.add_subcommand("fold", "Load-stepped Newton run of the folding scenario");
  auto* linear = app.add_subcommand("linear", "Simply supported polygonal plates at matched resolution");
  auto* geom = app.add_subcommand("geom", "Angle-curvature relations on synthetic Darboux frame data");
  auto* verify = app.add_subcommand("verify", "Acceptance criteria, one pass/fail line each");

  for (auto* sub : {fold, linear, geom, verify}) {
    sub->fallthrough();
    common.add(sub, "-o,--output", "output", "output directory (default $FOLDSIM_OUTPUT or ./foldsim_out)");
    common.add(sub, "--threads,--jobs", "threads", "assembly threads (fold) or parallel solves (linear, verify)");
    common.add(sub, "--deterministic", "deterministic", "true or false");
  }
  Overrides fo;
  fold->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  fo.add(fold, "--setting", "setting", "s1, s2 or s3");
  fo.add(fold, "--h", "h", "mesh size");
  fo.add(fold, "-k,--k", "k", "polynomial order of the deformation (1..3)");
  fo.add(fold, "--geometry-order", "geometry_order", "crease element order; 0 = k for s1, 1 otherwise");
  fo.add(fold, "--crease-vertices", "crease_vertices", "vertices of the full-domain crease polygon");
  fo.add(fold, "--E", "E", "bending stiffness");
  fo.add(fold, "--alpha", "alpha", "isometry and boundary penalty");
  fo.add(fold, "--load", "load", "vertical load amplitude");
  fo.add(fold, "--damping", "damping", "ramp, backtracking, hybrid or natural");
  fo.add(fold, "--eta", "eta", "smallest damping factor");
  fo.add(fold, "--tol", "tol", "Newton residual tolerance");
  fo.add(fold, "--max-iterations", "max_iterations", "Newton iterations per step");
  fo.add(fold, "--load-steps", "load_steps", "uniform load steps");
  fo.add(fold, "--beta-steps", "beta_steps", "penalty ramp steps within the first load step");
  fo.add(fold, "--refinement-rounds", "refinement_rounds", "geometric refinement rounds toward the crease");
  fo.add(fold, "--refinement-factor", "refinement_factor", "size factor per geometric refinement round");
  fo.add(fold, "--snapshots", "snapshots", "comma-separated load steps written as VTU (default: last)");
  fo.add(fold, "--darboux-samples", "darboux_samples", "crease samples in the Darboux CSV");
  fo.add(fold, "--linear-solver", "linear_solver", "umfpack, sparselu or default");

  Overrides li;
  li.add(linear, "--mode,--support", "support", "full_boundary (full) or corners_only (corners)");
  li.add(linear, "--sides", "sides", "comma-separated polygon side counts, each >= 8");
  li.add(linear, "--order", "plate_order", "Lagrange order of the deflection");
  li.add(linear, "--refinements", "plate_refinements", "uniform refinements on top of matched resolution");

  Overrides ge;
  bool synthetic = true;
  geom->add_flag("--synthetic", synthetic, "synthetic frame data (the only source)");
  ge.add(geom, "--samples", "samples", "samples along the curve");
  ge.add(geom, "--seed", "seed", "seed of the synthetic profiles");

  Overrides ve;
  std::vector<int> only;
  ve.add(verify, "--tier", "tier", "fast or full");
  verify->add_option("--only", only, "criterion ids to run")->delimiter(',');

  RunConfig cfg;
  try {
    app.parse(argc, argv);
    if (!config_file.empty()) read_config_file(config_file, cfg);
    cfg.subcommand = app.get_subcommands().front()->get_name();
    for (const Overrides* o : {&common, &fo, &li, &ge, &ve}) o->apply(cfg);
    cfg.validate();
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const std::string out = output_root(cfg);
  try {
    if (cfg.subcommand == "fold") {
      std::cout << "fold " << cfg.stem() << "\n";
      const FoldOutcome run = run_fold(cfg, [](const StepDiagnostics& d) {
        std::printf("step %d t %.4f beta %.2f iterations %d deflection %.6f\n", d.step + 1, d.t, d.beta,
                    d.iterations, d.deflection);
        std::fflush(stdout);
      });
      print_files(write_fold_artifacts(out, cfg, run));
      std::printf("deflection %.6f L2 %.6f L64 %.6f violation %.3e time %.1f s\n", run.deflection, run.m_l2,
                  run.m_l64, run.violation, run.seconds);
      if (!run.trajectory.completed) {
        std::cerr << "non-convergence: " << run.trajectory.message << "\n";
        return kExitNonConvergence;
      }
      return 0;
    }
    if (cfg.subcommand == "linear") {
      const LinearOutcome run = run_linear(cfg);
      write_sweep_csv(std::cout, run.rows);
      print_files(write_linear_artifacts(out, cfg, run));
      return 0;
    }
    if (cfg.subcommand == "geom") {
      const GeomOutcome run = run_geom(cfg);
      std::printf("curvature_angle %.3e normal_curvature %.3e torsion %.3e rotation %.3e: %s\n",
                  run.report.curvature_angle, run.report.normal_curvature, run.report.torsion,
                  run.report.rotation, run.report.pass ? "pass" : "fail");
      print_files(write_geom_artifacts(out, cfg, run));
      return run.report.pass ? 0 : kExitFail;
    }
    AcceptanceOptions opt;
    opt.tier = tier_from_string(cfg.tier);
    opt.only = only;
    opt.threads = cfg.threads;
    opt.log = [](const std::string& s) { std::cerr << s << std::endl; };
    const auto results = run_acceptance(opt, [](const CriterionResult& r) {
      std::cout << format_result(r) << std::endl;
    });
    std::filesystem::create_directories(out);
    const std::string path = (std::filesystem::path(out) / (cfg.stem() + "_acceptance.json")).string();
    std::ofstream js(path);
    write_acceptance_json(js, results);
    std::cout << "wrote " << path << "\n";
    for (const auto& r : results) {
      if (!r.pass) return kExitFail;
    }
    return 0;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SingularMatrix& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const SingularConfiguration& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  }
}
