#pragma once

#include "foldsim/config.hpp"
#include "foldsim/fold_geometry.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace foldsim {

/// Probe point of the reported deflection.
inline const Point2 kProbe{2.0, 0.0};

/// Scenario mesh of a fold run, with the configured geometric refinement
/// toward the crease (S1) or its interior vertices (S2, S3).
std::shared_ptr<const Mesh> build_fold_mesh(const RunConfig& cfg);

struct FoldOutcome {
  std::shared_ptr<const FoldProblem> problem;
  Trajectory trajectory;
  std::string diagnostics_csv;
  std::string norms_csv;
  double deflection = 0.0;  // at kProbe after the last converged step
  double m_l2 = 0.0;
  double m_l64 = 0.0;
  double violation = 0.0;
  int newton_iterations = 0;
  double seconds = 0.0;
};

/// Runs the load program of the configured fold scenario. Validates cfg.
FoldOutcome run_fold(const RunConfig& cfg, const std::function<void(const StepDiagnostics&)>& on_step = {});

/// Writes <stem>.config, <stem>_diagnostics.csv, <stem>_norms.csv,
/// <stem>_darboux.csv (last state) and <stem>_step<j>.vtu for the snapshot
/// steps into dir, creating it. Returns the written paths.
std::vector<std::string> write_fold_artifacts(const std::string& dir, const RunConfig& cfg,
                                              const FoldOutcome& run);

struct LinearOutcome {
  std::vector<SweepRow> rows;
  PlateSolution last;  // solution of the last side count
};

LinearOutcome run_linear(const RunConfig& cfg);
std::vector<std::string> write_linear_artifacts(const std::string& dir, const RunConfig& cfg,
                                                const LinearOutcome& run);

struct GeomOutcome {
  DarbouxData darboux;
  RelationReport report;
};

/// Synthetic frame data with cfg.samples samples and seed cfg.seed; relations
/// checked at tolerance 1e-5.
GeomOutcome run_geom(const RunConfig& cfg);
std::vector<std::string> write_geom_artifacts(const std::string& dir, const RunConfig& cfg,
                                              const GeomOutcome& run);

}  // namespace foldsim
