// Acceptance suite: runs every gate criterion at its stated tolerance against
// the canonical configuration and prints one pass/fail line per criterion.
// Usage: acceptance --root <repo root> --cli <sdeflow binary> [--workers N]

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sdeflow/anticipating.hpp"
#include "sdeflow/harness.hpp"
#include "sdeflow/parallel.hpp"
#include "sdeflow/report.hpp"
#include "sdeflow/rng.hpp"
#include "sdeflow/solver.hpp"
#include "sdeflow/stratonovich.hpp"

using namespace sdeflow;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report_line(int criterion, const std::string& label, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", criterion, label.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool checks_pass(const std::vector<Check>& checks, const std::vector<std::string>& ids,
                 std::string& detail) {
  bool ok = true;
  for (const std::string& id : ids) {
    const auto it = std::find_if(checks.begin(), checks.end(),
                                 [&](const Check& c) { return c.id == id; });
    if (it == checks.end()) {
      ok = false;
      detail += id + ": missing; ";
      continue;
    }
    ok = ok && it->pass;
    detail += it->id + (it->pass ? " ok" : " FAILED") + " (" + it->detail + "); ";
  }
  return ok;
}

// --- criterion 1: discrete equation identity -------------------------------

void criterion_identity(const ExperimentConfig& cfg, int workers) {
  const Vec x0{0.95, 0.0};
  const Partition grid = Partition::dyadic(cfg.dt_level);
  std::vector<double> defect(100, 0.0);
  parallel_for(100, workers, [&](std::size_t s) {
    const auto path = BrownianPath::sample(split_seed(cfg.master_seed, s), grid, 2);
    const auto sol = solve(cfg.domain, cfg.field, path, x0);
    Vec acc = x0;
    double worst = 0.0;
    const auto& t = sol.grid.times();
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      acc += (t[k + 1] - t[k]) * cfg.field.ito_drift(sol.x[k]);
      acc += cfg.field.sigma(sol.x[k]).mul(path.value(k + 1) - path.value(k));
      worst = std::max(worst, norm(sol.x[k + 1] - (acc - sol.l[k + 1])));
    }
    defect[s] = worst;
  });
  const double max_defect = *std::max_element(defect.begin(), defect.end());
  report_line(1, "discrete reflected-equation identity on 100 seeded paths",
              max_defect < 1e-9, "max defect " + fmt(max_defect) + " (< 1e-9)");
}

// --- criterion 2: local-time support, direction, G reconstruction ----------

void criterion_local_time(const ExperimentConfig& cfg, int workers) {
  const Vec x0{0.95, 0.0};
  const Partition grid = Partition::dyadic(cfg.dt_level);
  const double eps = eps_boundary(cfg.field, grid.mesh(), cfg.eps_boundary_factor);
  const BumpFunction bump{Vec{0.0, 0.0}, 0.25};

  std::vector<double> mass_outside(100, 0.0), worst_angle(100, 0.0);
  std::vector<std::uint8_t> g_ok(100, 1);
  std::vector<int> events(100, 0);
  parallel_for(100, workers, [&](std::size_t s) {
    const auto path = BrownianPath::sample(split_seed(cfg.master_seed, s), grid, 2);
    const auto sol = solve(cfg.domain, cfg.field, path, x0);
    for (const auto& ev : sol.reflections) {
      ++events[s];
      // reflection points sit on the boundary; the band is far wider
      const double dist = std::abs(1.0 - norm(ev.point));
      if (dist > eps) mass_outside[s] += norm(ev.push);
      const Vec n = cfg.domain.outward_normal(ev.point);
      const Vec u = (1.0 / norm(ev.push)) * ev.push;
      worst_angle[s] = std::max(worst_angle[s], std::asin(std::min(1.0, norm(u - dot(u, n) * n))));
    }
    const auto lt = local_time_functionals(sol, cfg.domain, bump, 2.0 * eps);
    for (std::size_t k = 0; k < sol.l.size(); ++k)
      if (!(lt.g_integral[k] == sol.l[k])) g_ok[s] = 0;
  });
  double mass = 0.0, angle = 0.0;
  int total_events = 0;
  bool g_all = true;
  for (std::size_t s = 0; s < 100; ++s) {
    mass += mass_outside[s];
    angle = std::max(angle, worst_angle[s]);
    total_events += events[s];
    g_all = g_all && g_ok[s];
  }
  const bool pass = mass == 0.0 && angle < 1e-6 && g_all && total_events > 0;
  report_line(2, "local-time support band, push direction, G reconstruction", pass,
              "band-external mass " + fmt(mass) + ", max angle " + fmt(angle) + " rad, G==L " +
                  (g_all ? "bitwise" : "MISMATCH") + ", " + std::to_string(total_events) +
                  " reflection events");
}

// --- criterion 3: 1-d projection scheme vs the exact Skorokhod map ---------

void criterion_oracle(const ExperimentConfig& cfg, int workers) {
  auto field = CoefficientField::constant(Mat::identity(1), Drift::zero());
  Domain dom = Domain::interval(0.0, 100.0);
  const int ref_level = 12;
  const int n_paths = 200;
  std::vector<std::array<double, 4>> err(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t s) {
    const auto fine =
        BrownianPath::sample(split_seed(cfg.master_seed ^ 0x03acu, s), Partition::dyadic(ref_level), 1);
    const auto oracle = halfline_oracle(fine, 0.0);
    for (int li = 0; li < 4; ++li) {
      const auto cg = Partition::dyadic(6 + li);
      const auto coarse =
          BrownianPath::sample(split_seed(cfg.master_seed ^ 0x03acu, s), cg, 1);
      const auto sol = solve(dom, field, coarse, Vec{0.0});
      double sup = 0.0;
      for (double t : cg.times())
        sup = std::max(sup, std::abs(sol.x_at(t)[0] - oracle.x_at(t)[0]));
      err[s][li] = sup;
    }
  });
  std::array<double, 4> mean_err{0.0, 0.0, 0.0, 0.0};
  for (const auto& row : err)
    for (int li = 0; li < 4; ++li) mean_err[li] += row[li] / n_paths;
  bool decreasing = true;
  std::string detail = "E sup|dX|:";
  for (int li = 0; li < 4; ++li) {
    detail += " " + fmt(mean_err[li]);
    if (li > 0 && !(mean_err[li] < mean_err[li - 1])) decreasing = false;
  }
  const bool pass = decreasing && mean_err[3] < 0.05;
  report_line(3, "projection scheme vs exact Skorokhod map, levels 6..9", pass,
              detail + " (decreasing, final < 0.05)");
}

// --- criterion 4: Riemann-sum exactness for constant sigma -----------------

void criterion_constant_exactness(const ExperimentConfig& cfg) {
  Mat m(2, 2);
  m(0, 0) = 0.45;
  m(0, 1) = -0.15;
  m(1, 0) = 0.25;
  m(1, 1) = 0.65;
  auto field = CoefficientField::constant(m, Drift::zero());
  const auto fine = Partition::dyadic(9);
  const auto path = BrownianPath::sample(cfg.master_seed ^ 0xC057u, fine, 2);
  const auto sol = solve(cfg.domain, field, path, Vec{0.0, 0.0});
  double worst = 0.0;
  for (int level = 2; level <= 8; ++level) {
    for (double t : {0.5, 1.0}) {
      const Vec s = riemann_sum(sol, field, path, Partition::dyadic(level), t);
      worst = std::max(worst, norm(s - m.mul(path.value_at(t))));
    }
  }
  Partition ragged({0.0, 1.0 / 512.0, 0.25, 0.375, 0.8125, 1.0});
  worst = std::max(worst,
                   norm(riemann_sum(sol, field, path, ragged, 1.0) - m.mul(path.value_at(1.0))));
  report_line(4, "Riemann sums reproduce sigma B_t exactly for constant sigma", worst < 1e-12,
              "max |S_pi - sigma B_t| " + fmt(worst) + " (< 1e-12)");
}

// --- criteria 5..8 ride on the canonical experiment studies ----------------

void criterion_riemann(const ExperimentConfig& cfg, int workers) {
  const auto result = riemann_convergence_study(cfg, workers);
  std::string detail;
  const bool pass = checks_pass(result.checks,
                                {"riemann.center_decreasing", "riemann.center_rate",
                                 "riemann.sup_decreasing", "riemann.sup_rate"},
                                detail);
  report_line(5, "moment decay of |S_pi - I| across dyadic levels with positive rate", pass,
              detail);
}

void criterion_spatial(const ExperimentConfig& cfg, const ExperimentConfig& frozen, int workers) {
  const auto canonical = spatial_moment_study(cfg, workers);
  std::string detail;
  bool pass = checks_pass(canonical.checks, {"spatial.ratio_band"}, detail);

  const auto frozen_result = spatial_moment_study(frozen, workers);
  const auto& fit = frozen_result.tables.front().series[0].fit;
  const bool slope_exact = fit.has_value() && std::abs(fit->slope - frozen.p) < 1e-9;
  pass = pass && slope_exact;
  detail += std::string("frozen slope ") + (fit ? fmt(fit->slope) : "none") + " (= p exactly)";
  report_line(6, "two-point spatial moments: bounded ratio band; frozen slope = p", pass, detail);
}

void criterion_temporal(const ExperimentConfig& cfg, int workers) {
  const auto result = temporal_moment_study(cfg, workers);
  std::string detail;
  const bool pass = checks_pass(result.checks, {"temporal.slope"}, detail);
  report_line(7, "temporal moments: fitted slope at least 0.8", pass, detail);
}

void criterion_substitution(const ExperimentConfig& cfg, int workers) {
  const auto result = substitution_study(cfg, workers);
  std::string detail;
  const bool pass = checks_pass(result.checks,
                                {"substitution.refinement_decrease", "substitution.f_zero",
                                 "substitution.node_snap"},
                                detail);
  report_line(8, "substitution error decreases under joint refinement; F(t,Z) = 0", pass, detail);
}

// --- criterion 9: CLI determinism across worker counts ---------------------

void criterion_determinism(const std::string& cli, const std::string& config_path) {
  const auto base = fs::temp_directory_path() / "sdeflow_acceptance";
  const auto dir1 = base / "w1";
  const auto dir8 = base / "w8";
  fs::remove_all(dir1);
  fs::remove_all(dir8);
  const std::string cmd1 = "\"" + cli + "\" run \"" + config_path + "\" --out \"" +
                           dir1.string() + "\" --workers 1 > /dev/null 2>&1";
  const std::string cmd8 = "\"" + cli + "\" run \"" + config_path + "\" --out \"" +
                           dir8.string() + "\" --workers 8 > /dev/null 2>&1";
  const int rc1 = std::system(cmd1.c_str());
  const int rc8 = std::system(cmd8.c_str());
  bool pass = rc1 == 0 && rc8 == 0;
  std::string detail =
      "exit codes " + std::to_string(rc1 >> 8) + "/" + std::to_string(rc8 >> 8);
  int compared = 0;
  if (pass) {
    for (const auto& entry : fs::directory_iterator(dir1)) {
      std::ifstream a(entry.path(), std::ios::binary);
      std::ifstream b(dir8 / entry.path().filename(), std::ios::binary);
      std::ostringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      ++compared;
      if (sa.str().empty() || sa.str() != sb.str()) {
        pass = false;
        detail += ", differs: " + entry.path().filename().string();
      }
    }
    pass = pass && compared >= 7;
    detail += ", " + std::to_string(compared) + " files byte-compared";
  }
  report_line(9, "byte-identical reports for --workers 1 vs --workers 8", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::string root = ".", cli;
  int workers = 2;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--root") root = argv[i + 1];
    if (flag == "--cli") cli = argv[i + 1];
    if (flag == "--workers") workers = std::max(1, std::atoi(argv[i + 1]));
  }
  const std::string config_path = (fs::path(root) / "configs" / "canonical.cfg").string();
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "cannot load canonical config: " << e.what() << "\n";
    return 2;
  }
  ExperimentConfig frozen = cfg;
  frozen.field = CoefficientField::constant(Mat(2, 2), Drift::zero());

  criterion_identity(cfg, workers);
  criterion_local_time(cfg, workers);
  criterion_oracle(cfg, workers);
  criterion_constant_exactness(cfg);
  criterion_riemann(cfg, workers);
  criterion_spatial(cfg, frozen, workers);
  criterion_temporal(cfg, workers);
  criterion_substitution(cfg, workers);
  if (!cli.empty()) {
    criterion_determinism(cli, config_path);
  } else {
    report_line(9, "byte-identical reports for --workers 1 vs --workers 8", false,
                "no --cli binary supplied");
  }

  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures > 0 ? 1 : 0;
}
