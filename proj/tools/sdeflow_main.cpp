// sdeflow: reflected-SDE simulation experiments.
//   run <config> [--out DIR] [--workers N]   execute experiments, write reports
//   dump-path --seed S --level L [...]       binary path dump / trajectory CSV
//   replay <summary> [--workers N]           re-run a summary, compare assertions
//   report <summary>                         pretty-print a summary
// SDEFLOW_WORKERS overrides --workers.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "sdeflow/config.hpp"
#include "sdeflow/errors.hpp"
#include "sdeflow/report.hpp"

namespace {

int effective_workers(int flag_value) {
  if (const char* env = std::getenv("SDEFLOW_WORKERS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (...) {
      std::cerr << "warning: ignoring non-numeric SDEFLOW_WORKERS\n";
    }
  }
  if (flag_value > 0) return flag_value;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflected-SDE simulation experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", summary_path, dump_out, trajectory_file, x0_spec;
  int workers = 0;
  std::uint64_t seed = 0;
  int level = 8, dim = 1;

  auto* cmd_run = app.add_subcommand("run", "execute the configured experiments");
  cmd_run->add_option("config", config_path, "configuration file")->required();
  cmd_run->add_option("--out", out_dir, "output directory");
  cmd_run->add_option("--workers", workers, "worker threads");

  auto* cmd_dump = app.add_subcommand("dump-path", "dump a Brownian path (binary f64 rows)");
  cmd_dump->add_option("--seed", seed, "path seed")->required();
  cmd_dump->add_option("--level", level, "dyadic grid level")->required();
  cmd_dump->add_option("--dim", dim, "path dimension");
  cmd_dump->add_option("--out", dump_out, "output file (default path_<seed>_<level>.bin)");
  cmd_dump->add_option("--config", config_path,
                       "config whose domain/field drive a trajectory CSV");
  cmd_dump->add_option("--x0", x0_spec, "initial point for the trajectory (space separated)");
  cmd_dump->add_option("--trajectory", trajectory_file, "trajectory CSV output (needs --config)");

  auto* cmd_replay = app.add_subcommand("replay", "re-run a summary and compare assertions");
  cmd_replay->add_option("summary", summary_path, "summary.json from a previous run")->required();
  cmd_replay->add_option("--workers", workers, "worker threads");

  auto* cmd_report = app.add_subcommand("report", "pretty-print a summary");
  cmd_report->add_option("summary", summary_path, "summary.json from a previous run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const sdeflow::ExperimentConfig cfg = sdeflow::load_config(config_path);
      const sdeflow::RunOutcome outcome = sdeflow::run(cfg, out_dir, effective_workers(workers));
      for (const sdeflow::Check& c : outcome.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.id << "  (" << c.detail << ")\n";
      if (outcome.exit_code != 0) {
        std::cerr << "failing assertions:";
        for (const sdeflow::Check& c : outcome.checks)
          if (!c.pass) std::cerr << " " << c.id;
        std::cerr << "\n";
      }
      return outcome.exit_code;
    }
    if (cmd_dump->parsed()) {
      const auto grid = sdeflow::Partition::dyadic(level);
      const auto path = sdeflow::BrownianPath::sample(seed, grid, dim);
      const std::string file = dump_out.empty()
                                   ? "path_" + std::to_string(seed) + "_" +
                                         std::to_string(level) + ".bin"
                                   : dump_out;
      sdeflow::write_path_dump(path, file);
      std::cout << "wrote " << file << " (" << grid.size() << " rows)\n";
      if (!trajectory_file.empty()) {
        if (config_path.empty()) {
          std::cerr << "--trajectory needs --config for the domain and coefficients\n";
          return 2;
        }
        const sdeflow::ExperimentConfig cfg = sdeflow::load_config(config_path);
        const auto sampled = sdeflow::BrownianPath::sample(seed, grid, cfg.domain.dim());
        sdeflow::Vec x0(static_cast<std::size_t>(cfg.domain.dim()));
        if (!x0_spec.empty()) {
          std::istringstream in(x0_spec);
          for (std::size_t i = 0; i < x0.size(); ++i)
            if (!(in >> x0[i])) {
              std::cerr << "--x0 needs " << cfg.domain.dim() << " coordinates\n";
              return 2;
            }
        } else {
          const auto [lo, hi] = cfg.domain.bounding_box();
          for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = 0.5 * (lo[i] + hi[i]);
        }
        const auto sol =
            cfg.scheme == "penalized"
                ? sdeflow::solve_penalized(cfg.domain, cfg.field, sampled, x0, cfg.lambda)
                : sdeflow::solve(cfg.domain, cfg.field, sampled, x0);
        std::ofstream tout(trajectory_file, std::ios::binary);
        tout << sdeflow::trajectory_csv(sol);
        std::cout << "wrote " << trajectory_file << "\n";
      }
      return 0;
    }
    if (cmd_replay->parsed())
      return sdeflow::replay_summary(summary_path, effective_workers(workers), std::cout);
    if (cmd_report->parsed()) return sdeflow::print_report(summary_path, std::cout);
  } catch (const sdeflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == sdeflow::Errc::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
