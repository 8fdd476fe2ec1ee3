#pragma once

// INI-style experiment configuration: one section per module, explicit seeds,
// and a stable hash of the raw text carried into every report row.

#include <cstdint>
#include <string>
#include <vector>

#include "sdeflow/anticipating.hpp"
#include "sdeflow/coefficients.hpp"
#include "sdeflow/geometry.hpp"
#include "sdeflow/stratonovich.hpp"

namespace sdeflow {

enum class ExperimentKind {
  SpatialMoments,
  TemporalMoments,
  BoundMoments,
  RiemannConvergence,
  TwoPoint,
  Substitution,
  Full,
};

struct ExperimentConfig {
  Domain domain = Domain::unit_ball(2);
  CoefficientField field = CoefficientField::constant(Mat::identity(2), Drift::zero());

  std::uint64_t master_seed = 0;
  int dimension = 2;
  int dyadic_min = 2;
  int dyadic_max = 12;

  std::string scheme = "project";
  int dt_level = 10;
  double eps_boundary_factor = 2.0;
  double lambda = 1e4;

  double p = 2.0;
  DyadicRange levels{4, 9};
  int replicas = 2000;
  int x0_grid = 5;

  InitialKind initial_kind = InitialKind::ProjectedEndpoint;
  int x_grid_per_axis = 5;
  std::vector<double> checkpoints{0.25, 0.5, 0.75, 1.0};

  ExperimentKind experiment = ExperimentKind::Full;
  std::string output_dir = "out";

  std::string raw_text;     // exact file contents (replayable)
  std::string config_hash;  // FNV-1a of raw_text, 16 hex digits
};

// Throws Error(Errc::ConfigError) with a line diagnostic on malformed input.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::string fnv1a_hex(const std::string& text);
const char* experiment_name(ExperimentKind kind);

}  // namespace sdeflow
