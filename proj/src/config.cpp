#include "sdeflow/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sdeflow/errors.hpp"

namespace sdeflow {

namespace {

struct Entry {
  std::string value;
  int line;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

[[noreturn]] void fail(int line, const std::string& what) {
  throw Error(Errc::ConfigError, "config line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Sections split_sections(const std::string& text) {
  Sections out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(lineno, "empty section name");
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    if (section.empty()) fail(lineno, "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail(lineno, "empty key");
    out[section][key] = Entry{trim(line.substr(eq + 1)), lineno};
  }
  return out;
}

class SectionReader {
 public:
  SectionReader(const Sections& all, const std::string& name) : name_(name) {
    auto it = all.find(name);
    if (it == all.end())
      throw Error(Errc::ConfigError, "config: missing required section [" + name + "]");
    entries_ = &it->second;
  }

  bool has(const std::string& key) const { return entries_->count(key) > 0; }

  std::string str(const std::string& key) const { return get(key).value; }

  std::string str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  double num(const std::string& key) const {
    const Entry& e = get(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      fail(e.line, "expected a number for '" + key + "'");
    }
  }

  double num_or(const std::string& key, double fallback) const {
    return has(key) ? num(key) : fallback;
  }

  long integer(const std::string& key) const {
    const Entry& e = get(key);
    try {
      std::size_t used = 0;
      const long v = std::stol(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      fail(e.line, "expected an integer for '" + key + "'");
    }
  }

  long integer_or(const std::string& key, long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) const {
    const Entry& e = get(key);
    std::istringstream in(e.value);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (out.empty() || !in.eof()) fail(e.line, "expected numbers for '" + key + "'");
    return out;
  }

  int line(const std::string& key) const { return get(key).line; }

 private:
  const Entry& get(const std::string& key) const {
    auto it = entries_->find(key);
    if (it == entries_->end())
      throw Error(Errc::ConfigError, "config: section [" + name_ + "] is missing '" + key + "'");
    return it->second;
  }

  std::string name_;
  const std::map<std::string, Entry>* entries_;
};

Domain parse_domain(const Sections& all) {
  SectionReader s(all, "domain");
  const std::string kind = s.str("kind");
  const double alpha = s.num_or("alpha", 1.0);
  if (kind == "unit_ball") {
    return Domain::unit_ball(static_cast<int>(s.integer("dimension")), alpha);
  }
  if (kind == "ellipsoid") {
    const auto ax = s.numbers("semi_axes");
    Vec semi(ax.size());
    for (std::size_t i = 0; i < ax.size(); ++i) semi[i] = ax[i];
    return Domain::ellipsoid(std::move(semi), alpha);
  }
  if (kind == "interval") {
    const auto b = s.numbers("interval");
    if (b.size() != 2) fail(s.line("interval"), "interval needs two bounds");
    return Domain::interval(b[0], b[1], alpha);
  }
  fail(s.line("kind"), "unknown domain kind '" + kind + "'");
}

Drift parse_drift(const SectionReader& s, int dim) {
  const std::string kind = s.str_or("drift", "zero");
  if (kind == "zero") return Drift::zero();
  if (kind == "linear") return Drift::linear(s.num("drift_scale"));
  if (kind == "constant") {
    const auto v = s.numbers("drift_vector");
    if (static_cast<int>(v.size()) != dim) fail(s.line("drift_vector"), "drift dimension mismatch");
    Vec c(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) c[i] = v[i];
    return Drift::constant_vec(std::move(c));
  }
  fail(s.line("drift"), "unknown drift '" + kind + "'");
}

CoefficientField parse_field(const Sections& all, int dim) {
  SectionReader s(all, "coefficients");
  const std::string family = s.str("family");
  const Drift drift = parse_drift(s, dim);
  if (family == "constant") {
    const auto m = s.numbers("matrix");
    if (static_cast<int>(m.size()) != dim * dim)
      fail(s.line("matrix"), "matrix needs dimension^2 entries");
    Mat sigma(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) sigma(i, j) = m[static_cast<std::size_t>(i * dim + j)];
    return CoefficientField::constant(std::move(sigma), drift);
  }
  if (family == "diagonal_affine") {
    const auto off = s.numbers("offset");
    const auto gain = s.numbers("gain");
    if (static_cast<int>(off.size()) != dim || static_cast<int>(gain.size()) != dim)
      fail(s.line("offset"), "offset/gain need one entry per dimension");
    Vec o(off.size()), g(gain.size());
    for (std::size_t i = 0; i < off.size(); ++i) {
      o[i] = off[i];
      g[i] = gain[i];
    }
    return CoefficientField::diagonal_affine(std::move(o), std::move(g), drift);
  }
  if (family == "trigonometric") {
    return CoefficientField::trigonometric(dim, s.num("amplitude"), s.num("frequency"),
                                           s.num_or("offset", 0.0), drift);
  }
  fail(s.line("family"), "unknown coefficient family '" + family + "'");
}

ExperimentKind parse_experiment(const SectionReader& s) {
  const std::string name = s.str("name");
  if (name == "spatial_moments") return ExperimentKind::SpatialMoments;
  if (name == "temporal_moments") return ExperimentKind::TemporalMoments;
  if (name == "bound_moments") return ExperimentKind::BoundMoments;
  if (name == "riemann_convergence") return ExperimentKind::RiemannConvergence;
  if (name == "two_point") return ExperimentKind::TwoPoint;
  if (name == "substitution") return ExperimentKind::Substitution;
  if (name == "full") return ExperimentKind::Full;
  fail(s.line("name"), "unknown experiment '" + name + "'");
}

InitialKind parse_initial(const SectionReader& s) {
  const std::string kind = s.str_or("kind", "projected_endpoint");
  if (kind == "fixed_point") return InitialKind::FixedPoint;
  if (kind == "projected_endpoint") return InitialKind::ProjectedEndpoint;
  if (kind == "projected_mean") return InitialKind::ProjectedMean;
  if (kind == "projected_max") return InitialKind::ProjectedMax;
  fail(s.line("kind"), "unknown anticipating kind '" + kind + "'");
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SpatialMoments: return "spatial_moments";
    case ExperimentKind::TemporalMoments: return "temporal_moments";
    case ExperimentKind::BoundMoments: return "bound_moments";
    case ExperimentKind::RiemannConvergence: return "riemann_convergence";
    case ExperimentKind::TwoPoint: return "two_point";
    case ExperimentKind::Substitution: return "substitution";
    case ExperimentKind::Full: return "full";
  }
  return "unknown";
}

ExperimentConfig parse_config(const std::string& text) {
  const Sections all = split_sections(text);
  ExperimentConfig cfg;
  cfg.raw_text = text;
  cfg.config_hash = fnv1a_hex(text);

  cfg.domain = parse_domain(all);
  cfg.field = parse_field(all, cfg.domain.dim());

  SectionReader paths(all, "paths");
  // seeds must be explicit: reproducibility is part of the contract
  cfg.master_seed = static_cast<std::uint64_t>(paths.integer("master_seed"));
  cfg.dimension = static_cast<int>(paths.integer_or("dimension", cfg.domain.dim()));
  cfg.dyadic_min = static_cast<int>(paths.integer_or("dyadic_min", 2));
  cfg.dyadic_max = static_cast<int>(paths.integer_or("dyadic_max", 12));
  if (cfg.dimension != cfg.domain.dim())
    throw Error(Errc::ConfigError, "config: [paths] dimension disagrees with the domain");

  SectionReader solver(all, "solver");
  cfg.scheme = solver.str_or("scheme", "project");
  if (cfg.scheme != "project" && cfg.scheme != "penalized")
    fail(solver.line("scheme"), "scheme must be 'project' or 'penalized'");
  cfg.dt_level = static_cast<int>(solver.integer_or("dt_level", 10));
  cfg.eps_boundary_factor = solver.num_or("eps_boundary_factor", 2.0);
  cfg.lambda = solver.num_or("lambda", 1e4);

  SectionReader strat(all, "stratonovich");
  cfg.p = strat.num_or("p", 2.0);
  const auto lv = strat.numbers("levels");
  if (lv.size() != 2) fail(strat.line("levels"), "levels needs 'lo hi'");
  cfg.levels = DyadicRange{static_cast<int>(lv[0]), static_cast<int>(lv[1])};
  if (cfg.levels.lo > cfg.levels.hi || cfg.levels.hi >= cfg.dt_level)
    fail(strat.line("levels"), "levels must be increasing and coarser than dt_level");
  cfg.replicas = static_cast<int>(strat.integer("replicas"));
  cfg.x0_grid = static_cast<int>(strat.integer_or("x0_grid", 5));

  SectionReader anticip(all, "anticipating");
  cfg.initial_kind = parse_initial(anticip);
  cfg.x_grid_per_axis = static_cast<int>(anticip.integer_or("x_grid_per_axis", 5));
  if (anticip.has("checkpoints")) cfg.checkpoints = anticip.numbers("checkpoints");

  SectionReader exp(all, "experiment");
  cfg.experiment = parse_experiment(exp);
  cfg.output_dir = exp.str_or("output_dir", "out");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace sdeflow
