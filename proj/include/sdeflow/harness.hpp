#pragma once

// Monte Carlo moment studies over one-point and two-point motions, the
// substitution experiment, rate fitting, and the run orchestrator that emits
// CSV reports plus a machine-readable summary with per-assertion pass/fail.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdeflow/config.hpp"
#include "sdeflow/stats.hpp"

namespace sdeflow {

struct Series {
  std::string name;
  std::vector<double> estimates;
  std::vector<double> ci_lo;  // bootstrap interval of the mean, per point
  std::vector<double> ci_hi;
  std::optional<RateFit> fit;
};

struct MomentTable {
  std::string name;            // experiment id
  std::string abscissa_name;   // "separation", "gap", "mesh", ...
  std::vector<double> abscissa;
  std::vector<Series> series;
  int replicas = 0;
  double p = 2.0;
};

struct Check {
  std::string id;
  bool pass = false;
  std::string detail;
};

struct SubstitutionRow {
  std::uint64_t path_seed = 0;
  int setup = 0;  // 0 coarse, 1 refined joint level
  double t = 0.0;
  Vec z;
  double err = 0.0;
  bool nearest_node = false;
};

struct ExperimentResult {
  std::vector<MomentTable> tables;
  std::vector<Check> checks;
  std::vector<SubstitutionRow> substitution_rows;  // substitution study only
};

ExperimentResult spatial_moment_study(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult temporal_moment_study(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult bound_moment_study(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult riemann_convergence_study(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult two_point_study(const ExperimentConfig& cfg, int workers = 1);
ExperimentResult substitution_study(const ExperimentConfig& cfg, int workers = 1);

struct RunOutcome {
  int exit_code = 0;  // 0 all checks pass, 1 a check failed
  std::vector<std::string> files_written;
  std::vector<Check> checks;
};

// Executes the configured experiment(s), writes one CSV per experiment and a
// summary.json into out_dir. Deterministic for a fixed config and seed,
// independent of the worker count.
RunOutcome run(const ExperimentConfig& cfg, const std::string& out_dir, int workers = 1);

// Bootstrap interval of the mean of `values` (percentile, 200 resamples).
std::pair<double, double> mean_ci(const std::vector<double>& values, std::uint64_t seed);

}  // namespace sdeflow
