#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sdeflow/errors.hpp"
#include "sdeflow/harness.hpp"
#include "sdeflow/parallel.hpp"
#include "sdeflow/rng.hpp"
#include "sdeflow/solver.hpp"

namespace sdeflow {

namespace {

Vec bbox_center(const Domain& d) {
  const auto [lo, hi] = d.bounding_box();
  Vec c(lo.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

Vec axis_step(int dim, double length) {
  Vec e(static_cast<std::size_t>(dim));
  e[0] = length;
  return e;
}

// x0 grid capped at 125 points (shrink per-axis count if needed)
SpatialGrid capped_grid(const Domain& domain, int per_axis) {
  int eff = std::max(2, per_axis);
  while (std::pow(static_cast<double>(eff), domain.dim()) > 125.0 && eff > 2) --eff;
  return SpatialGrid::inscribed(domain, eff);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Check make_check(const std::string& id, bool pass, const std::string& detail) {
  return Check{id, pass, detail};
}

}  // namespace

std::pair<double, double> mean_ci(const std::vector<double>& values, std::uint64_t seed) {
  SequentialRng rng(mix64(seed));
  std::vector<double> means;
  means.reserve(200);
  for (int r = 0; r < 200; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[rng.index(values.size())];
    means.push_back(s / static_cast<double>(values.size()));
  }
  std::sort(means.begin(), means.end());
  auto at = [&](double q) {
    const double pos = q * (static_cast<double>(means.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  return {at(0.025), at(0.975)};
}

// ---------------------------------------------------------------------------
// spatial moments: E sup_t |X(x)-X(y)|^p at shrinking separations |x-y|

ExperimentResult spatial_moment_study(const ExperimentConfig& cfg, int workers) {
  const int R = cfg.replicas;
  const double p = cfg.p;
  const Partition grid = Partition::dyadic(cfg.dt_level);
  std::vector<double> seps;
  for (int k = 2; k <= 6; ++k) seps.push_back(std::ldexp(1.0, -k));

  const Vec center = bbox_center(cfg.domain);
  const Vec x_base = center - axis_step(cfg.domain.dim(), 0.5 * seps.front());
  std::vector<Vec> ys;
  for (double s : seps) ys.push_back(x_base + axis_step(cfg.domain.dim(), s));
  if (cfg.domain.contains(x_base) == Classification::Exterior)
    throw Error(Errc::BadSegment, "spatial segment base leaves the closure");
  for (const Vec& y : ys)
    if (cfg.domain.contains(y) == Classification::Exterior)
      throw Error(Errc::BadSegment, "spatial segment endpoint leaves the closure");

  std::vector<std::vector<double>> raw_x(seps.size(), std::vector<double>(R));
  std::vector<std::vector<double>> raw_l(seps.size(), std::vector<double>(R));
  parallel_for(static_cast<std::size_t>(R), workers, [&](std::size_t r) {
    const auto path = BrownianPath::sample(split_seed(cfg.master_seed, r), grid, cfg.domain.dim());
    const auto base = solve(cfg.domain, cfg.field, path, x_base);
    for (std::size_t i = 0; i < seps.size(); ++i) {
      const auto other = solve(cfg.domain, cfg.field, path, ys[i]);
      double sup_x = 0.0, sup_l = 0.0;
      for (std::size_t k = 0; k < base.x.size(); ++k) {
        sup_x = std::max(sup_x, norm(base.x[k] - other.x[k]));
        sup_l = std::max(sup_l, norm(base.l[k] - other.l[k]));
      }
      raw_x[i][r] = std::pow(sup_x, p);
      raw_l[i][r] = std::pow(sup_l, p);
    }
  });

  MomentTable table;
  table.name = "spatial_moments";
  table.abscissa_name = "separation";
  table.abscissa = seps;
  table.replicas = R;
  table.p = p;
  Series sx{"x_sup_moment", {}, {}, {}, std::nullopt};
  Series sl{"l_sup_moment", {}, {}, {}, std::nullopt};
  Series ratio{"x_ratio", {}, {}, {}, std::nullopt};
  for (std::size_t i = 0; i < seps.size(); ++i) {
    sx.estimates.push_back(mean(raw_x[i]));
    sl.estimates.push_back(mean(raw_l[i]));
    auto [xl, xh] = mean_ci(raw_x[i], mix64(cfg.master_seed ^ (0x5A00 + i)));
    auto [ll, lh] = mean_ci(raw_l[i], mix64(cfg.master_seed ^ (0x5B00 + i)));
    sx.ci_lo.push_back(xl);
    sx.ci_hi.push_back(xh);
    sl.ci_lo.push_back(ll);
    sl.ci_hi.push_back(lh);
    ratio.estimates.push_back(sx.estimates.back() / std::pow(seps[i], p));
    ratio.ci_lo.push_back(xl / std::pow(seps[i], p));
    ratio.ci_hi.push_back(xh / std::pow(seps[i], p));
  }
  sx.fit = fit_rate(seps, sx.estimates, mix64(cfg.master_seed ^ 0x51u));
  if (*std::max_element(sl.estimates.begin(), sl.estimates.end()) > 0.0)
    sl.fit = fit_rate(seps, sl.estimates, mix64(cfg.master_seed ^ 0x52u));

  ExperimentResult out;
  const double rmax = *std::max_element(ratio.estimates.begin(), ratio.estimates.end());
  const double rmin = *std::min_element(ratio.estimates.begin(), ratio.estimates.end());
  const bool band = rmin > 0.0 ? (rmax / rmin <= 10.0) : (rmax == 0.0);
  out.checks.push_back(make_check(
      "spatial.ratio_band", band,
      "max/min of E sup|dX|^p / |x-y|^p = " + fmt(rmin > 0.0 ? rmax / rmin : 1.0) + " (<= 10)"));
  table.series = {std::move(sx), std::move(sl), std::move(ratio)};
  out.tables.push_back(std::move(table));
  return out;
}

// ---------------------------------------------------------------------------
// temporal moments: sup over the x0 grid of E |X_{s+g} - X_s|^(2p) per gap g

ExperimentResult temporal_moment_study(const ExperimentConfig& cfg, int workers) {
  const int R = cfg.replicas;
  const double p = cfg.p;
  const Partition grid = Partition::dyadic(cfg.dt_level);
  const double anchor = 0.5;
  std::vector<double> gaps;
  // gaps 2^-3 .. 2^-8, clipped so each stays resolvable on the solver grid
  for (int k = 3; k <= std::min(8, cfg.dt_level - 2); ++k) gaps.push_back(std::ldexp(1.0, -k));
  if (gaps.size() < 3) throw Error(Errc::InsufficientSamples, "dt_level too coarse for gap sweep");

  const auto x0s = capped_grid(cfg.domain, cfg.x0_grid).nodes();
  const std::size_t nx = x0s.size(), ng = gaps.size();

  // raw[x0][gap][replica]
  std::vector<std::vector<std::vector<double>>> raw_x(
      nx, std::vector<std::vector<double>>(ng, std::vector<double>(R)));
  auto raw_l = raw_x;
  parallel_for(static_cast<std::size_t>(R), workers, [&](std::size_t r) {
    const auto path = BrownianPath::sample(split_seed(cfg.master_seed, r), grid, cfg.domain.dim());
    for (std::size_t xi = 0; xi < nx; ++xi) {
      const auto sol = solve(cfg.domain, cfg.field, path, x0s[xi]);
      const Vec& xs = sol.x_at(anchor);
      const Vec& ls = sol.l_at(anchor);
      for (std::size_t gi = 0; gi < ng; ++gi) {
        raw_x[xi][gi][r] = std::pow(norm(sol.x_at(anchor + gaps[gi]) - xs), 2.0 * p);
        raw_l[xi][gi][r] = std::pow(norm(sol.l_at(anchor + gaps[gi]) - ls), 2.0 * p);
      }
    }
  });

  auto sup_over_x0 = [&](const std::vector<std::vector<std::vector<double>>>& raw,
                         std::size_t gi) {
    double sup = 0.0;
    for (std::size_t xi = 0; xi < nx; ++xi) sup = std::max(sup, mean(raw[xi][gi]));
    return sup;
  };

  MomentTable table;
  table.name = "temporal_moments";
  table.abscissa_name = "gap";
  table.abscissa = gaps;
  table.replicas = R;
  table.p = p;
  Series sx{"x_moment_sup_x0", {}, {}, {}, std::nullopt};
  Series sl{"l_moment_sup_x0", {}, {}, {}, std::nullopt};
  Series sratio{"x_bound_ratio", {}, {}, {}, std::nullopt};  // estimate / gap^(p/2)
  SequentialRng boot(mix64(cfg.master_seed ^ 0x7E3u));
  for (std::size_t gi = 0; gi < ng; ++gi) {
    sx.estimates.push_back(sup_over_x0(raw_x, gi));
    sl.estimates.push_back(sup_over_x0(raw_l, gi));
    // bootstrap the sup-of-means over replica resamples
    std::vector<double> sup_x_boot, sup_l_boot;
    for (int b = 0; b < 200; ++b) {
      std::vector<std::size_t> idx(static_cast<std::size_t>(R));
      for (auto& i : idx) i = boot.index(static_cast<std::size_t>(R));
      double bx = 0.0, bl = 0.0;
      for (std::size_t xi = 0; xi < nx; ++xi) {
        double mx = 0.0, ml = 0.0;
        for (std::size_t i : idx) {
          mx += raw_x[xi][gi][i];
          ml += raw_l[xi][gi][i];
        }
        bx = std::max(bx, mx / R);
        bl = std::max(bl, ml / R);
      }
      sup_x_boot.push_back(bx);
      sup_l_boot.push_back(bl);
    }
    std::sort(sup_x_boot.begin(), sup_x_boot.end());
    std::sort(sup_l_boot.begin(), sup_l_boot.end());
    sx.ci_lo.push_back(sup_x_boot[4]);
    sx.ci_hi.push_back(sup_x_boot[194]);
    sl.ci_lo.push_back(sup_l_boot[4]);
    sl.ci_hi.push_back(sup_l_boot[194]);
    const double bound = std::pow(gaps[gi], 0.5 * p);
    sratio.estimates.push_back(sx.estimates.back() / bound);
    sratio.ci_lo.push_back(sx.ci_lo.back() / bound);
    sratio.ci_hi.push_back(sx.ci_hi.back() / bound);
  }
  ExperimentResult out;
  const double peak = *std::max_element(sx.estimates.begin(), sx.estimates.end());
  if (peak > 0.0) {
    sx.fit = fit_rate(gaps, sx.estimates, mix64(cfg.master_seed ^ 0x71u));
    const double slope = sx.fit->slope;
    out.checks.push_back(make_check("temporal.slope", slope >= 0.8,
                                    "fitted slope " + fmt(slope) + " (>= 0.8)"));
  } else {
    out.checks.push_back(
        make_check("temporal.slope", true, "exact (frozen dynamics, all moments zero)"));
  }
  if (*std::max_element(sl.estimates.begin(), sl.estimates.end()) > 0.0)
    sl.fit = fit_rate(gaps, sl.estimates, mix64(cfg.master_seed ^ 0x72u));
  table.series = {std::move(sx), std::move(sl), std::move(sratio)};
  out.tables.push_back(std::move(table));
  return out;
}

// ---------------------------------------------------------------------------
// bound moments: E sup_t |X_t(x)|^p and E sup_t |L_t|^p over the x0 grid

ExperimentResult bound_moment_study(const ExperimentConfig& cfg, int workers) {
  const int R = cfg.replicas;
  const double p = cfg.p;
  const Partition grid = Partition::dyadic(cfg.dt_level);
  const auto x0s = capped_grid(cfg.domain, cfg.x0_grid).nodes();
  const std::size_t nx = x0s.size();

  std::vector<std::vector<double>> raw_x(nx, std::vector<double>(R));
  auto raw_l = raw_x;
  auto raw_tv = raw_x;
  std::vector<double> worst_phi(static_cast<std::size_t>(R), -1e300);
  parallel_for(static_cast<std::size_t>(R), workers, [&](std::size_t r) {
    const auto path = BrownianPath::sample(split_seed(cfg.master_seed, r), grid, cfg.domain.dim());
    for (std::size_t xi = 0; xi < nx; ++xi) {
      const auto sol = solve(cfg.domain, cfg.field, path, x0s[xi]);
      double sup_x = 0.0, sup_l = 0.0;
      for (std::size_t k = 0; k < sol.x.size(); ++k) {
        sup_x = std::max(sup_x, norm(sol.x[k]));
        sup_l = std::max(sup_l, norm(sol.l[k]));
        worst_phi[r] = std::max(worst_phi[r], cfg.domain.phi(sol.x[k]));
      }
      raw_x[xi][r] = std::pow(sup_x, p);
      raw_l[xi][r] = std::pow(sup_l, p);
      raw_tv[xi][r] = std::pow(sol.l_tv.back(), p);
    }
  });

  MomentTable table;
  table.name = "bound_moments";
  table.abscissa_name = "x0_index";
  table.replicas = R;
  table.p = p;
  Series sx{"x_sup_moment", {}, {}, {}, std::nullopt};
  Series sl{"l_sup_moment", {}, {}, {}, std::nullopt};
  Series stv{"ltv1_moment", {}, {}, {}, std::nullopt};
  Series sratio{"x_bound_ratio", {}, {}, {}, std::nullopt};
  for (std::size_t xi = 0; xi < nx; ++xi) {
    table.abscissa.push_back(static_cast<double>(xi + 1));
    sx.estimates.push_back(mean(raw_x[xi]));
    sl.estimates.push_back(mean(raw_l[xi]));
    stv.estimates.push_back(mean(raw_tv[xi]));
    auto [xl, xh] = mean_ci(raw_x[xi], mix64(cfg.master_seed ^ (0xB100 + xi)));
    auto [ll, lh] = mean_ci(raw_l[xi], mix64(cfg.master_seed ^ (0xB200 + xi)));
    auto [tl, th] = mean_ci(raw_tv[xi], mix64(cfg.master_seed ^ (0xB300 + xi)));
    sx.ci_lo.push_back(xl);
    sx.ci_hi.push_back(xh);
    sl.ci_lo.push_back(ll);
    sl.ci_hi.push_back(lh);
    stv.ci_lo.push_back(tl);
    stv.ci_hi.push_back(th);
    const double bound = std::pow(1.0 + norm(x0s[xi]), p);
    sratio.estimates.push_back(sx.estimates.back() / bound);
    sratio.ci_lo.push_back(xl / bound);
    sratio.ci_hi.push_back(xh / bound);
  }

  ExperimentResult out;
  double max_phi = -1e300;
  for (double w : worst_phi) max_phi = std::max(max_phi, w);
  out.checks.push_back(make_check("bound.confinement", max_phi <= cfg.domain.tol_boundary(),
                                  "max phi along trajectories " + fmt(max_phi)));

  // stability of the total-variation moment under replica halving
  double full = 0.0, half = 0.0;
  for (std::size_t xi = 0; xi < nx; ++xi) {
    full += mean(raw_tv[xi]);
    std::vector<double> h(raw_tv[xi].begin(), raw_tv[xi].begin() + R / 2);
    half += mean(h);
  }
  full /= static_cast<double>(nx);
  half /= static_cast<double>(nx);
  const bool stable = std::abs(full - half) <= 0.1 * full + 1e-9;
  out.checks.push_back(make_check(
      "bound.ltv_stability", stable,
      "Ehat|L|_1^p " + fmt(full) + " vs half-replica " + fmt(half) + " (within 10%)"));

  table.series = {std::move(sx), std::move(sl), std::move(stv), std::move(sratio)};
  out.tables.push_back(std::move(table));
  return out;
}

// ---------------------------------------------------------------------------
// Riemann-sum convergence: E|S_pi - I|^(2p) per dyadic level, center and sup

ExperimentResult riemann_convergence_study(const ExperimentConfig& cfg, int workers) {
  const auto x0s = capped_grid(cfg.domain, cfg.x0_grid).nodes();
  const ConvergenceStudy study =
      convergence_study(cfg.domain, cfg.field, x0s, cfg.p, cfg.levels, cfg.dt_level, cfg.replicas,
                        cfg.master_seed, workers);

  MomentTable table;
  table.name = "riemann_convergence";
  table.abscissa_name = "mesh";
  table.abscissa = study.meshes;
  table.replicas = cfg.replicas;
  table.p = cfg.p;
  const MomentEstimate& center = study.per_x0[study.center_index];
  Series sc{"moment_p2", center.moments, {}, {}, center.fitted_rate};
  Series ss{"moment_sup", study.sup_over_x0.moments, {}, {}, study.sup_over_x0.fitted_rate};
  for (std::size_t li = 0; li < study.meshes.size(); ++li) {
    std::vector<double> col_c(study.center_samples.size()), col_s(study.sup_samples.size());
    for (std::size_t r = 0; r < col_c.size(); ++r) col_c[r] = study.center_samples[r][li];
    for (std::size_t r = 0; r < col_s.size(); ++r) col_s[r] = study.sup_samples[r][li];
    auto [cl, ch] = mean_ci(col_c, mix64(cfg.master_seed ^ (0xAA00 + li)));
    auto [slo, shi] = mean_ci(col_s, mix64(cfg.master_seed ^ (0xAB00 + li)));
    sc.ci_lo.push_back(cl);
    sc.ci_hi.push_back(ch);
    ss.ci_lo.push_back(slo);
    ss.ci_hi.push_back(shi);
  }

  ExperimentResult out;
  auto strictly_decreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i - 1] > v[i])) return false;
    return true;
  };
  // meshes are decreasing, so the moment sequence must decrease level by
  // level when read from coarse (index 0) to fine
  if (center.exact_zero) {
    out.checks.push_back(make_check("riemann.center_decreasing", true, "exact (moments zero)"));
    out.checks.push_back(make_check("riemann.center_rate", true, "exact (moments zero)"));
  } else {
    out.checks.push_back(make_check("riemann.center_decreasing",
                                    strictly_decreasing(center.moments),
                                    "Ehat|S-I|^(2p) strictly decreasing in level"));
    const bool rate_ok = center.fitted_rate && !center.fitted_rate->degenerate &&
                         center.fitted_rate->ci_lo > 0.0;
    out.checks.push_back(make_check(
        "riemann.center_rate", rate_ok,
        rate_ok ? "slope " + fmt(center.fitted_rate->slope) + " CI [" +
                      fmt(center.fitted_rate->ci_lo) + ", " + fmt(center.fitted_rate->ci_hi) + "]"
                : "rate CI does not exclude zero"));
  }
  if (study.sup_over_x0.exact_zero) {
    out.checks.push_back(make_check("riemann.sup_decreasing", true, "exact (moments zero)"));
    out.checks.push_back(make_check("riemann.sup_rate", true, "exact (moments zero)"));
  } else {
    out.checks.push_back(make_check("riemann.sup_decreasing",
                                    strictly_decreasing(study.sup_over_x0.moments),
                                    "Ehat sup|S-I|^(2p) strictly decreasing in level"));
    const auto& fit = study.sup_over_x0.fitted_rate;
    const bool rate_ok = fit && !fit->degenerate && fit->ci_lo > 0.0;
    out.checks.push_back(
        make_check("riemann.sup_rate", rate_ok,
                   rate_ok ? "slope " + fmt(fit->slope) + " CI [" + fmt(fit->ci_lo) + ", " +
                                 fmt(fit->ci_hi) + "]"
                           : "rate CI does not exclude zero"));
  }
  table.series = {std::move(sc), std::move(ss)};
  out.tables.push_back(std::move(table));
  return out;
}

// ---------------------------------------------------------------------------
// two-point gaps: E sup_t |S_pi(t,x) - S_pi(t,y)|^p under halving |x-y|

ExperimentResult two_point_study(const ExperimentConfig& cfg, int workers) {
  const Partition partition = Partition::dyadic(cfg.levels.hi);
  std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  const Vec center = bbox_center(cfg.domain);

  MomentTable table;
  table.name = "two_point";
  table.abscissa_name = "separation";
  table.replicas = cfg.replicas;
  table.p = cfg.p;
  Series sg{"gap_moment", {}, {}, {}, std::nullopt};
  for (double d : deltas) {
    const Vec x = center - axis_step(cfg.domain.dim(), 0.5 * d);
    const Vec y = center + axis_step(cfg.domain.dim(), 0.5 * d);
    std::vector<double> raw;
    const double est = two_point_gap(cfg.domain, cfg.field, x, y, partition, cfg.dt_level, cfg.p,
                                     cfg.replicas, cfg.master_seed, workers, &raw);
    table.abscissa.push_back(d);
    sg.estimates.push_back(est);
    auto [lo, hi] = mean_ci(raw, mix64(cfg.master_seed ^ 0x2807u));
    sg.ci_lo.push_back(lo);
    sg.ci_hi.push_back(hi);
  }
  if (*std::max_element(sg.estimates.begin(), sg.estimates.end()) > 0.0)
    sg.fit = fit_rate(table.abscissa, sg.estimates, mix64(cfg.master_seed ^ 0x2Fu));

  ExperimentResult out;
  bool stable = true;
  std::string detail = "halving ratios:";
  const double target = std::pow(0.5, cfg.p);
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (sg.estimates[i - 1] <= 0.0) continue;
    const double ratio = sg.estimates[i] / sg.estimates[i - 1];
    detail += " " + fmt(ratio);
    if (ratio < 0.5 * target || ratio > 2.0 * target) stable = false;
  }
  out.checks.push_back(
      make_check("two_point.ratio_stability", stable, detail + " (target " + fmt(target) + ")"));
  table.series = {std::move(sg)};
  out.tables.push_back(std::move(table));
  return out;
}

// ---------------------------------------------------------------------------
// substitution: flow interpolation at Z versus the direct solve from Z

namespace {

struct SubstitutionSetup {
  SpatialGrid grid;
  int dt_level;
};

}  // namespace

ExperimentResult substitution_study(const ExperimentConfig& cfg, int workers) {
  const int n_paths = 100;
  const AnticipatingInitial init{cfg.initial_kind, bbox_center(cfg.domain)};
  const SubstitutionSetup coarse{capped_grid(cfg.domain, cfg.x_grid_per_axis), cfg.dt_level - 1};
  const SubstitutionSetup fine{capped_grid(cfg.domain, 2 * (cfg.x_grid_per_axis - 1) + 1),
                               cfg.dt_level};

  // interior-supported bump for the local-time functional check; the radius
  // shrinks when the boundary band of a coarse grid leaves little room
  const auto [blo, bhi] = cfg.domain.bounding_box();
  double halfwidth = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < blo.size(); ++i)
    halfwidth = std::min(halfwidth, 0.5 * (bhi[i] - blo[i]));
  const double margin =
      2.0 * eps_boundary(cfg.field, std::ldexp(1.0, -cfg.dt_level), cfg.eps_boundary_factor);
  const Vec bump_center = bbox_center(cfg.domain);
  const double room = cfg.domain.interior_distance_bound(bump_center) - margin;
  if (room <= 0.0)
    throw Error(Errc::SupportViolation,
                "boundary band leaves no room for an interior test function; refine dt_level");
  const BumpFunction bump{bump_center, std::min(0.3 * halfwidth, 0.5 * room)};

  std::vector<SubstitutionRow> rows;
  std::vector<double> mean_err(2, 0.0);
  bool f_zero = true;
  bool g_matches = true;

  std::vector<std::vector<SubstitutionRow>> slot(static_cast<std::size_t>(n_paths));
  std::vector<std::array<double, 2>> err_slot(static_cast<std::size_t>(n_paths));
  std::vector<std::uint8_t> fz_slot(static_cast<std::size_t>(n_paths), 1),
      gm_slot(static_cast<std::size_t>(n_paths), 1);
  parallel_for(static_cast<std::size_t>(n_paths), workers, [&](std::size_t i) {
    const std::uint64_t seed = split_seed(mix64(cfg.master_seed ^ 0x5B5u), i);
    err_slot[i] = {0.0, 0.0};
    for (int s = 0; s < 2; ++s) {
      const SubstitutionSetup& setup = s == 0 ? coarse : fine;
      const auto path =
          BrownianPath::sample(seed, Partition::dyadic(setup.dt_level), cfg.domain.dim());
      const Vec z = draw_initial(init, path, cfg.domain);
      const FlowFamily family = flow_solve(cfg.domain, cfg.field, path, setup.grid, 1);
      const ReflectedSolution direct = solve(cfg.domain, cfg.field, path, z);
      double err_at_checkpoints = 0.0;
      for (double t : cfg.checkpoints) {
        const SubstituteResult sub = substitute(family, z, t);
        const double err = norm(sub.x - direct.x_at(t));
        err_at_checkpoints += err / static_cast<double>(cfg.checkpoints.size());
        slot[i].push_back(SubstitutionRow{seed, s, t, z, err, sub.nearest_node});
      }
      err_slot[i][s] = err_at_checkpoints;
      if (s == 1) {
        const auto lt = local_time_functionals(direct, cfg.domain, bump, margin);
        for (double v : lt.f_integral)
          if (v != 0.0) fz_slot[i] = 0;
        for (std::size_t k = 0; k < lt.g_integral.size(); ++k)
          if (!(lt.g_integral[k] == direct.l[k])) gm_slot[i] = 0;
      }
    }
  });
  for (int i = 0; i < n_paths; ++i) {
    for (auto& r : slot[i]) rows.push_back(std::move(r));
    mean_err[0] += err_slot[i][0] / n_paths;
    mean_err[1] += err_slot[i][1] / n_paths;
    f_zero = f_zero && fz_slot[i];
    g_matches = g_matches && gm_slot[i];
  }

  // node-snapped fixed initial: substitution reproduces the direct solve
  double snap_err = 0.0;
  {
    const auto& nodes = fine.grid.nodes();
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = norm(nodes[i] - bbox_center(cfg.domain));
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    const AnticipatingInitial snap = AnticipatingInitial::fixed(nodes[best]);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto path = BrownianPath::sample(split_seed(cfg.master_seed ^ 0x57A9u, s),
                                             Partition::dyadic(fine.dt_level), cfg.domain.dim());
      const auto res = substitution_error(cfg.domain, cfg.field, path, snap, 1.0, fine.grid, 1);
      snap_err = std::max(snap_err, res.err);
    }
  }

  ExperimentResult out;
  out.checks.push_back(make_check("substitution.refinement_decrease",
                                  mean_err[1] < mean_err[0],
                                  "mean err " + fmt(mean_err[0]) + " -> " + fmt(mean_err[1])));
  out.checks.push_back(
      make_check("substitution.f_zero", f_zero, "int f(X) d|L| vanishes for interior support"));
  out.checks.push_back(
      make_check("substitution.g_equals_l", g_matches, "int xi(X) d|L| equals stored L bitwise"));
  out.checks.push_back(
      make_check("substitution.node_snap", snap_err < 1e-12,
                 "node-snapped substitution error " + fmt(snap_err) + " (< 1e-12)"));

  MomentTable table;
  table.name = "substitution";
  table.abscissa_name = "setup";  // 0 = coarse, 1 = refined joint level
  table.abscissa = {0.0, 1.0};
  table.replicas = n_paths;
  table.p = cfg.p;
  Series se{"mean_substitution_err", mean_err, mean_err, mean_err, std::nullopt};
  table.series = {std::move(se)};
  out.tables.push_back(std::move(table));
  out.substitution_rows = std::move(rows);
  return out;
}

}  // namespace sdeflow
