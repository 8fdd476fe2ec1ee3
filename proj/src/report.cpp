#include "sdeflow/report.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sdeflow/errors.hpp"

namespace sdeflow {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string moment_table_csv(const MomentTable& table, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << table.abscissa_name;
  for (const Series& s : table.series)
    out << "," << s.name << "," << s.name << "_ci_lo," << s.name << "_ci_hi";
  out << ",master_seed,config_hash\n";
  for (std::size_t i = 0; i < table.abscissa.size(); ++i) {
    out << format_g17(table.abscissa[i]);
    for (const Series& s : table.series)
      out << "," << format_g17(s.estimates[i]) << "," << format_g17(s.ci_lo[i]) << ","
          << format_g17(s.ci_hi[i]);
    out << "," << cfg.master_seed << "," << cfg.config_hash << "\n";
  }
  return out.str();
}

std::string riemann_csv(const MomentTable& table, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "level,mesh,moment_p2,moment_sup,ci_lo,ci_hi,master_seed,config_hash\n";
  const Series& center = table.series[0];
  const Series& sup = table.series[1];
  for (std::size_t i = 0; i < table.abscissa.size(); ++i) {
    out << (cfg.levels.lo + static_cast<int>(i)) << "," << format_g17(table.abscissa[i]) << ","
        << format_g17(center.estimates[i]) << "," << format_g17(sup.estimates[i]) << ","
        << format_g17(sup.ci_lo[i]) << "," << format_g17(sup.ci_hi[i]) << "," << cfg.master_seed
        << "," << cfg.config_hash << "\n";
  }
  return out.str();
}

std::string substitution_csv(const std::vector<SubstitutionRow>& rows,
                             const ExperimentConfig& cfg) {
  std::ostringstream out;
  const int d = cfg.domain.dim();
  out << "path_seed,kind,setup,t";
  for (int i = 1; i <= d; ++i) out << ",z_" << i;
  out << ",err_substitution,nearest_node_flag,master_seed,config_hash\n";
  for (const SubstitutionRow& r : rows) {
    out << r.path_seed << "," << (r.setup == 0 ? "coarse" : "refined") << ","
        << r.setup;
    out << "," << format_g17(r.t);
    for (int i = 0; i < d; ++i) out << "," << format_g17(r.z[static_cast<std::size_t>(i)]);
    out << "," << format_g17(r.err) << "," << (r.nearest_node ? 1 : 0) << "," << cfg.master_seed
        << "," << cfg.config_hash << "\n";
  }
  return out.str();
}

std::string trajectory_csv(const ReflectedSolution& solution) {
  std::ostringstream out;
  const std::size_t d = solution.x.front().size();
  out << "t";
  for (std::size_t i = 1; i <= d; ++i) out << ",x_" << i;
  for (std::size_t i = 1; i <= d; ++i) out << ",l_" << i;
  out << ",l_tv,boundary_flag\n";
  for (std::size_t k = 0; k < solution.x.size(); ++k) {
    out << format_g17(solution.grid.times()[k]);
    for (std::size_t i = 0; i < d; ++i) out << "," << format_g17(solution.x[k][i]);
    for (std::size_t i = 0; i < d; ++i) out << "," << format_g17(solution.l[k][i]);
    out << "," << format_g17(solution.l_tv[k]) << ","
        << (k == 0 ? 0 : static_cast<int>(solution.boundary_flags[k - 1])) << "\n";
  }
  return out.str();
}

void write_path_dump(const BrownianPath& path, const std::string& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(Errc::ConfigError, "cannot open dump file: " + file);
  auto put = [&](double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) {
      std::uint64_t swapped = 0;
      for (int i = 0; i < 8; ++i) swapped |= ((bits >> (8 * i)) & 0xFFu) << (8 * (7 - i));
      bits = swapped;
    }
    char raw[8];
    std::memcpy(raw, &bits, 8);
    out.write(raw, 8);
  };
  for (std::size_t k = 0; k < path.grid().size(); ++k) {
    put(path.grid().times()[k]);
    for (int c = 0; c < path.dim(); ++c) put(path.value(k)[static_cast<std::size_t>(c)]);
  }
}

namespace {

void write_text(const std::string& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(Errc::ConfigError, "cannot open output file: " + file);
  out << content;
}

using ordered_json = nlohmann::ordered_json;

void add_fits(ordered_json& j, const ExperimentResult& result) {
  for (const MomentTable& t : result.tables)
    for (const Series& s : t.series) {
      if (!s.fit) continue;
      const std::string key = "fit." + t.name + "." + s.name;
      if (s.fit->degenerate) {
        j[key + ".degenerate"] = true;
        continue;
      }
      j[key + ".slope"] = s.fit->slope;
      j[key + ".ci_lo"] = s.fit->ci_lo;
      j[key + ".ci_hi"] = s.fit->ci_hi;
    }
}

}  // namespace

RunOutcome run(const ExperimentConfig& cfg, const std::string& out_dir, int workers) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::vector<std::pair<ExperimentKind, ExperimentResult>> results;
  auto execute = [&](ExperimentKind kind) {
    switch (kind) {
      case ExperimentKind::SpatialMoments:
        results.emplace_back(kind, spatial_moment_study(cfg, workers));
        break;
      case ExperimentKind::TemporalMoments:
        results.emplace_back(kind, temporal_moment_study(cfg, workers));
        break;
      case ExperimentKind::BoundMoments:
        results.emplace_back(kind, bound_moment_study(cfg, workers));
        break;
      case ExperimentKind::RiemannConvergence:
        results.emplace_back(kind, riemann_convergence_study(cfg, workers));
        break;
      case ExperimentKind::TwoPoint:
        results.emplace_back(kind, two_point_study(cfg, workers));
        break;
      case ExperimentKind::Substitution:
        results.emplace_back(kind, substitution_study(cfg, workers));
        break;
      case ExperimentKind::Full:
        break;
    }
  };
  if (cfg.experiment == ExperimentKind::Full) {
    for (ExperimentKind kind :
         {ExperimentKind::SpatialMoments, ExperimentKind::TemporalMoments,
          ExperimentKind::BoundMoments, ExperimentKind::RiemannConvergence,
          ExperimentKind::TwoPoint, ExperimentKind::Substitution})
      execute(kind);
  } else {
    execute(cfg.experiment);
  }

  RunOutcome outcome;
  ordered_json summary;
  summary["experiment"] = experiment_name(cfg.experiment);
  summary["config_hash"] = cfg.config_hash;
  summary["master_seed"] = cfg.master_seed;

  bool all_pass = true;
  for (const auto& [kind, result] : results) {
    const std::string base = (fs::path(out_dir) / experiment_name(kind)).string();
    std::string csv;
    if (kind == ExperimentKind::RiemannConvergence)
      csv = riemann_csv(result.tables.front(), cfg);
    else if (kind == ExperimentKind::Substitution)
      csv = substitution_csv(result.substitution_rows, cfg);
    else
      csv = moment_table_csv(result.tables.front(), cfg);
    const std::string file = base + ".csv";
    write_text(file, csv);
    outcome.files_written.push_back(file);
    for (const Check& c : result.checks) {
      outcome.checks.push_back(c);
      all_pass = all_pass && c.pass;
    }
  }
  for (const Check& c : outcome.checks) {
    summary["assert." + c.id] = c.pass ? "pass" : "fail";
    summary["assert." + c.id + ".detail"] = c.detail;
  }
  for (const auto& [kind, result] : results) add_fits(summary, result);
  summary["pass"] = all_pass;
  {
    ordered_json files = ordered_json::array();
    for (const std::string& f : outcome.files_written)
      files.push_back(fs::path(f).filename().string());
    summary["files"] = files;
  }
  summary["config_text"] = cfg.raw_text;

  const std::string summary_file = (fs::path(out_dir) / "summary.json").string();
  write_text(summary_file, summary.dump(2) + "\n");
  outcome.files_written.push_back(summary_file);
  outcome.exit_code = all_pass ? 0 : 1;
  return outcome;
}

int replay_summary(const std::string& summary_path, int workers, std::ostream& log) {
  std::ifstream in(summary_path);
  if (!in) {
    log << "cannot open summary: " << summary_path << "\n";
    return 2;
  }
  ordered_json recorded;
  try {
    in >> recorded;
  } catch (const std::exception& e) {
    log << "malformed summary: " << e.what() << "\n";
    return 2;
  }
  if (!recorded.contains("config_text")) {
    log << "summary has no embedded config\n";
    return 2;
  }
  ExperimentConfig cfg = parse_config(recorded["config_text"].get<std::string>());
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("sdeflow_replay_" + cfg.config_hash);
  const RunOutcome outcome = run(cfg, tmp.string(), workers);

  std::ifstream re(std::filesystem::path(tmp) / "summary.json");
  ordered_json replayed;
  re >> replayed;
  int mismatches = 0;
  for (auto& [key, value] : recorded.items()) {
    if (key.rfind("assert.", 0) != 0) continue;
    if (!replayed.contains(key) || replayed[key] != value) {
      ++mismatches;
      log << "MISMATCH " << key << ": recorded " << value.dump() << ", replayed "
          << (replayed.contains(key) ? replayed[key].dump() : std::string("<missing>")) << "\n";
    } else {
      log << "match    " << key << " = " << value.dump() << "\n";
    }
  }
  log << (mismatches == 0 ? "replay: all assertions reproduced\n"
                          : "replay: assertion mismatches found\n");
  (void)outcome;
  return mismatches == 0 ? 0 : 1;
}

int print_report(const std::string& summary_path, std::ostream& out) {
  std::ifstream in(summary_path);
  if (!in) {
    out << "cannot open summary: " << summary_path << "\n";
    return 2;
  }
  ordered_json summary;
  try {
    in >> summary;
  } catch (const std::exception& e) {
    out << "malformed summary: " << e.what() << "\n";
    return 2;
  }
  out << "experiment : " << summary.value("experiment", std::string("?")) << "\n";
  out << "seed       : " << summary.value("master_seed", 0ull) << "\n";
  out << "config     : " << summary.value("config_hash", std::string("?")) << "\n";
  out << "overall    : " << (summary.value("pass", false) ? "PASS" : "FAIL") << "\n";
  for (auto& [key, value] : summary.items()) {
    if (key.rfind("assert.", 0) != 0) continue;
    if (key.size() >= 7 && key.rfind(".detail") == key.size() - 7) continue;
    const std::string detail_key = key + ".detail";
    out << "  " << (value.get<std::string>() == "pass" ? "[PASS] " : "[FAIL] ")
        << key.substr(7);
    if (summary.contains(detail_key))
      out << "  (" << summary[detail_key].get<std::string>() << ")";
    out << "\n";
  }
  return 0;
}

}  // namespace sdeflow
