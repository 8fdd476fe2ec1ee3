#pragma once

// Deterministic report emission (CSV with %.17g doubles, flat JSON summary)
// and the replay/report helpers behind the CLI verbs.

#include <ostream>
#include <string>
#include <vector>

#include "sdeflow/harness.hpp"
#include "sdeflow/paths.hpp"
#include "sdeflow/solver.hpp"

namespace sdeflow {

std::string format_g17(double v);

std::string moment_table_csv(const MomentTable& table, const ExperimentConfig& cfg);
std::string riemann_csv(const MomentTable& table, const ExperimentConfig& cfg);
std::string substitution_csv(const std::vector<SubstitutionRow>& rows,
                             const ExperimentConfig& cfg);

// t, x_1..x_d, l_1..l_d, l_tv, boundary_flag
std::string trajectory_csv(const ReflectedSolution& solution);

// little-endian f64 rows: time, v_1..v_d
void write_path_dump(const BrownianPath& path, const std::string& file);

// Re-executes the run embedded in a summary file and compares assertions.
// Returns 0 when every assertion reproduces, 1 otherwise.
int replay_summary(const std::string& summary_path, int workers, std::ostream& log);

// Human-readable view of a summary file; returns 0 on success.
int print_report(const std::string& summary_path, std::ostream& out);

}  // namespace sdeflow
