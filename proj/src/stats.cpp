#include "sdeflow/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sdeflow/errors.hpp"
#include "sdeflow/rng.hpp"

namespace sdeflow {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

namespace {

struct Line {
  double slope, intercept;
};

Line ols(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / det;
  return {slope, (sy - slope * sx) / n};
}

bool distinct_abscissa(const std::vector<double>& x) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] != x[0]) return true;
  return false;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

constexpr std::size_t kResamples = 200;

}  // namespace

RateFit ols_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  RateFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) {
      fit.degenerate = true;
      return fit;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const Line line = ols(lx, ly);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.ci_lo = fit.ci_hi = line.slope;
  return fit;
}

RateFit fit_rate(const std::vector<double>& abscissa, const std::vector<double>& estimates,
                 std::uint64_t seed) {
  if (abscissa.size() < 3 || abscissa.size() != estimates.size())
    throw Error(Errc::InsufficientSamples, "rate fit needs at least 3 points");
  for (double a : abscissa)
    if (!(a > 0.0)) throw Error(Errc::InsufficientSamples, "abscissa must be positive");

  RateFit fit = ols_loglog(abscissa, estimates);
  if (fit.degenerate) return fit;

  std::vector<double> lx(abscissa.size()), ly(abscissa.size());
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    lx[i] = std::log(abscissa[i]);
    ly[i] = std::log(estimates[i]);
  }
  SequentialRng rng(mix64(seed));
  std::vector<double> slopes;
  slopes.reserve(kResamples);
  std::vector<double> bx(lx.size()), by(lx.size());
  while (slopes.size() < kResamples) {
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const std::size_t j = rng.index(lx.size());
      bx[i] = lx[j];
      by[i] = ly[j];
    }
    if (!distinct_abscissa(bx)) continue;  // resample collapsed onto one x
    slopes.push_back(ols(bx, by).slope);
  }
  fit.ci_lo = percentile(slopes, 0.025);
  fit.ci_hi = percentile(slopes, 0.975);
  return fit;
}

RateFit fit_rate_replicated(const std::vector<double>& abscissa,
                            const std::vector<std::vector<double>>& values, std::uint64_t seed) {
  const std::size_t levels = abscissa.size();
  const std::size_t replicas = values.size();
  std::vector<double> est(levels, 0.0);
  for (const auto& row : values)
    for (std::size_t l = 0; l < levels; ++l) est[l] += row[l];
  for (double& e : est) e /= static_cast<double>(replicas);

  RateFit fit = ols_loglog(abscissa, est);
  if (fit.degenerate) return fit;

  std::vector<double> lx(levels);
  for (std::size_t l = 0; l < levels; ++l) lx[l] = std::log(abscissa[l]);
  SequentialRng rng(mix64(seed));
  std::vector<double> slopes;
  slopes.reserve(kResamples);
  std::vector<double> acc(levels), ly(levels);
  for (std::size_t r = 0; r < kResamples; ++r) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < replicas; ++i) {
      const auto& row = values[rng.index(replicas)];
      for (std::size_t l = 0; l < levels; ++l) acc[l] += row[l];
    }
    bool ok = true;
    for (std::size_t l = 0; l < levels; ++l) {
      if (!(acc[l] > 0.0)) {
        ok = false;
        break;
      }
      ly[l] = std::log(acc[l] / static_cast<double>(replicas));
    }
    if (!ok) continue;
    slopes.push_back(ols(lx, ly).slope);
  }
  if (slopes.empty()) {
    fit.degenerate = true;
    return fit;
  }
  fit.ci_lo = percentile(slopes, 0.025);
  fit.ci_hi = percentile(slopes, 0.975);
  return fit;
}

}  // namespace sdeflow
