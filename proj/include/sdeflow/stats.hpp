#pragma once

// Log-log rate fitting with seed-pinned bootstrap confidence intervals, plus
// the small aggregation helpers the Monte Carlo studies share.

#include <cstdint>
#include <vector>

namespace sdeflow {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;  // of the log-log line
  double ci_lo = 0.0;      // 95% bootstrap interval for the slope
  double ci_hi = 0.0;
  bool degenerate = false;  // some estimate was nonpositive; no log fit
};

double mean(const std::vector<double>& v);

// OLS slope/intercept of log(y) on log(x); degenerate when any y <= 0.
RateFit ols_loglog(const std::vector<double>& x, const std::vector<double>& y);

// OLS on logs with a pairs bootstrap (200 resamples) for the slope interval.
// Requires >= 3 points and positive abscissa; nonpositive estimates mark the
// fit degenerate instead of failing.
RateFit fit_rate(const std::vector<double>& abscissa, const std::vector<double>& estimates,
                 std::uint64_t seed = 0xF17u);

// Rate fit for per-replica data: estimates are column means of
// values[replica][level]; the bootstrap resamples whole replicas (preserving
// the common-path coupling across levels).
RateFit fit_rate_replicated(const std::vector<double>& abscissa,
                            const std::vector<std::vector<double>>& values,
                            std::uint64_t seed = 0xF17u);

}  // namespace sdeflow
