#pragma once

#include "foldsim/linear_paradox.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace foldsim {

/// Parameters of one CLI run. Defaults are the reference fold protocol.
struct RunConfig {
  std::string subcommand = "fold";  // fold, linear, geom, verify

  // fold
  CreaseSetting setting = CreaseSetting::S3;
  double h = 0.1;
  int k = 3;
  int geometry_order = 0;  // 0: k for S1, 1 otherwise
  int crease_vertices = 4;  // full-domain polygon vertices, endpoints included
  double E = 10.0;
  double alpha = 1e6;
  double load = 0.4;
  double compression = 0.1;
  Damping damping = Damping::Ramp;
  double eta = 0.05;
  double tol = 1e-6;
  int max_iterations = 100;
  int load_steps = 30;
  int beta_steps = 5;
  int refinement_rounds = 0;  // geometric refinement toward the crease (S1) or its interior vertices
  double refinement_factor = 0.125;
  std::vector<int> snapshots;  // load steps written as VTU; empty: last step only
  int darboux_samples = 200;
  std::string linear_solver = "default";

  // linear
  SupportMode support = SupportMode::FullBoundary;
  std::vector<int> sides{8, 16, 32, 64};
  int plate_order = 3;
  int plate_refinements = 0;

  // geom
  int samples = 1000;
  unsigned seed = 1;

  // verify
  std::string tier = "fast";

  // common
  std::string output;  // empty: $FOLDSIM_OUTPUT or ./foldsim_out
  bool deterministic = true;
  int threads = 1;  // assembly threads of fold runs, or sweep jobs

  /// Effective geometry order of the fold mesh.
  int fold_geometry_order() const;

  /// Sets one field from its snapshot key; throws InvalidInput for unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Throws InvalidInput with a message naming the offending field.
  void validate() const;

  /// key = value lines in a fixed order, one per field; the output directory
  /// is omitted. Reading it back with read_config reproduces the run.
  std::string snapshot() const;

  /// FNV-1a of the snapshot.
  std::uint64_t hash() const;

  /// Filename stem: setting, h, k and the hash for fold runs.
  std::string stem() const;
};

/// Applies "key = value" lines to cfg. Blank lines and lines starting with #
/// are skipped.
void read_config(std::istream& in, RunConfig& cfg);
void read_config_file(const std::string& path, RunConfig& cfg);

/// Output root: cfg.output, else $FOLDSIM_OUTPUT, else "foldsim_out".
std::string output_root(const RunConfig& cfg);

std::uint64_t fnv1a(const std::string& s);

}  // namespace foldsim
