#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "choq/critical.hpp"
#include "choq/dualsolve.hpp"
#include "choq/model.hpp"
#include "choq/primal.hpp"

namespace choq {

// Exit code table (frozen; scripts depend on it):
//   0 converged / complete        4 config parse or validation error
//   2 stalled                     5 resource cap exceeded
//   3 unbounded-suspected         6 checkpoint version/hash mismatch
//   7 solver error (NoConvergence and friends)   8 usage error
enum ExitCode : int {
  kExitOk = 0,
  kExitStalled = 2,
  kExitUnbounded = 3,
  kExitConfig = 4,
  kExitResource = 5,
  kExitCheckpoint = 6,
  kExitSolver = 7,
  kExitUsage = 8,
};

struct RunManifest {
  std::string command;  // solve-dual | solve-primal | duality-check |
                        // critical-scan | barphi | inequality-suite
  std::string config_path;
  std::string out_dir = ".";
  std::string resume_path;
  std::uint64_t seed = 1;
  int max_iters = 0;  // > 0 overrides the config value
  std::uint64_t mem_cap = 8ull << 30;
  bool dump_kernel = false;
};

struct CriticalRunConfig {
  int n = 4;
  double alpha = 2.0;
  std::vector<double> beta{1.0};
  double a_lo = 1.0, a_hi = 2048.0, tol = 16.0;
  double R = 20.0;
  int radial_points = 2048;
  int grid_pts = 20;
  int refine_steps = 50;
  std::vector<double> deltas{1.5, 2.0, 3.0};
};

struct InequalityRunConfig {
  double lt_gamma = 1.0;
  int lt_count = 50;
  double lt_ref_factor = 4.0;
  double hardy_R = 60.0;
  int hardy_points = 16384;
};

struct BarphiRunConfig {
  double R = 40.0;
  int points = 8192;
  int max_outer = 200;
  double tol = 1e-9;
};

struct RunConfig {
  bool has_problem = false;
  ProblemSpec problem;
  SolverOptions solver;
  PrimalOptions primal;
  CriticalRunConfig critical;
  InequalityRunConfig inequalities;
  BarphiRunConfig barphi;
};

RunConfig parse_run_config(const std::string& text);

// Executes one manifest: writes trace CSVs, checkpoints and summary.json into
// out_dir and returns the exit code. All randomness is seeded from the
// manifest, so identical manifests produce byte-identical CSV artifacts.
int run(const RunManifest& manifest);

std::string read_text_file(const std::string& path);

}  // namespace choq
