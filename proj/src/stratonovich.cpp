#include "sdeflow/stratonovich.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdeflow/errors.hpp"
#include "sdeflow/parallel.hpp"
#include "sdeflow/rng.hpp"

namespace sdeflow {

std::vector<std::pair<double, Mat>> sigma_samples(const ReflectedSolution& solution,
                                                  const CoefficientField& field) {
  std::vector<std::pair<double, Mat>> out;
  out.reserve(solution.grid.size());
  for (std::size_t k = 0; k < solution.grid.size(); ++k)
    out.emplace_back(solution.grid.times()[k], field.sigma(solution.x[k]));
  return out;
}

namespace {

void check_study_partition(const ReflectedSolution& solution, const Partition& partition,
                           double t) {
  if (!Partition::nested(solution.grid, partition))
    throw Error(Errc::NotNested, "partition is not nested in the solution grid");
  partition.index_of(t);  // OffGrid when t is not a partition time
}

}  // namespace

Vec riemann_sum(const std::vector<std::pair<double, Mat>>& samples,
                const ReflectedSolution& solution, const BrownianPath& path,
                const Partition& partition, double t) {
  check_study_partition(solution, partition, t);
  Vec acc(static_cast<std::size_t>(path.dim()));
  const auto& pt = partition.times();
  for (std::size_t k = 0; k + 1 < pt.size() && pt[k + 1] <= t; ++k) {
    const Mat avg = cell_average(samples, pt[k], pt[k + 1]);
    avg.mul_acc(path.increment(pt[k], pt[k + 1]), acc);
  }
  return acc;
}

Vec riemann_sum(const ReflectedSolution& solution, const CoefficientField& field,
                const BrownianPath& path, const Partition& partition, double t) {
  return riemann_sum(sigma_samples(solution, field), solution, path, partition, t);
}

std::vector<Vec> riemann_prefix(const std::vector<std::pair<double, Mat>>& samples,
                                const ReflectedSolution& solution, const BrownianPath& path,
                                const Partition& partition) {
  check_study_partition(solution, partition, partition.t_end());
  const auto d = static_cast<std::size_t>(path.dim());
  std::vector<Vec> out;
  out.reserve(partition.size());
  Vec acc(d);
  out.push_back(acc);
  const auto& pt = partition.times();
  for (std::size_t k = 0; k + 1 < pt.size(); ++k) {
    const Mat avg = cell_average(samples, pt[k], pt[k + 1]);
    avg.mul_acc(path.increment(pt[k], pt[k + 1]), acc);
    out.push_back(acc);
  }
  return out;
}

Vec reference_integral(const ReflectedSolution& solution, const CoefficientField& field,
                       const BrownianPath& path, double t) {
  const std::size_t end = solution.grid.index_of(t);
  const auto d = static_cast<std::size_t>(path.dim());
  Vec ito(d);
  Vec corr(d);
  Vec va(d), vb(d);
  const auto& ts = solution.grid.times();
  if (end > 0) field.grad_sigma_sigma_into(solution.x[0], va);
  for (std::size_t k = 0; k < end; ++k) {
    field.sigma(solution.x[k]).mul_acc(path.increment(ts[k], ts[k + 1]), ito);
    field.grad_sigma_sigma_into(solution.x[k + 1], vb);
    const double h = ts[k + 1] - ts[k];
    axpy(0.5 * h, va, corr);
    axpy(0.5 * h, vb, corr);
    std::swap(va, vb);
  }
  axpy(0.5, corr, ito);
  return ito;
}

RiemannSumResult riemann_vs_reference(const ReflectedSolution& solution,
                                      const CoefficientField& field, const BrownianPath& path,
                                      const Partition& partition, double t) {
  RiemannSumResult r;
  r.t = t;
  r.s_pi = riemann_sum(solution, field, path, partition, t);
  r.i_ref = reference_integral(solution, field, path, t);
  r.diff_norm = norm(r.s_pi - r.i_ref);
  return r;
}

ConvergenceStudy convergence_study(const Domain& domain, const CoefficientField& field,
                                   const std::vector<Vec>& x0_set, double p, DyadicRange levels,
                                   int fine_level, int replicas, std::uint64_t master_seed,
                                   int workers) {
  if (replicas < 30) throw Error(Errc::InsufficientReplicas, "need at least 30 replicas");
  if (fine_level <= levels.hi)
    throw Error(Errc::NotNested, "fine level must be strictly finer than the study levels");
  const std::size_t n_levels = static_cast<std::size_t>(levels.hi - levels.lo + 1);
  const std::size_t n_x0 = x0_set.size();
  const Partition fine = Partition::dyadic(fine_level);
  std::vector<Partition> study;
  study.reserve(n_levels);
  for (int l = levels.lo; l <= levels.hi; ++l) study.push_back(Partition::dyadic(l));
  const double t_end = 1.0;

  // raw[x0][replica][level] = |S_pi - I|^(2p); sup_raw[replica][level]
  std::vector<std::vector<std::vector<double>>> raw(
      n_x0, std::vector<std::vector<double>>(replicas, std::vector<double>(n_levels)));
  std::vector<std::vector<double>> sup_raw(replicas, std::vector<double>(n_levels, 0.0));

  parallel_for(replicas, workers, [&](std::size_t r) {
    const BrownianPath path = BrownianPath::sample(split_seed(master_seed, r), fine, domain.dim());
    for (std::size_t xi = 0; xi < n_x0; ++xi) {
      const ReflectedSolution sol = solve(domain, field, path, x0_set[xi]);
      const auto samples = sigma_samples(sol, field);
      const Vec i_ref = reference_integral(sol, field, path, t_end);
      for (std::size_t li = 0; li < n_levels; ++li) {
        const Vec s_pi = riemann_sum(samples, sol, path, study[li], t_end);
        const double diff = norm(s_pi - i_ref);
        const double moment = std::pow(diff, 2.0 * p);
        raw[xi][r][li] = moment;
        sup_raw[r][li] = std::max(sup_raw[r][li], moment);
      }
    }
  });

  ConvergenceStudy result;
  for (const Partition& pi : study) result.meshes.push_back(pi.mesh());

  // |S_pi - I| below summation-order noise counts as exactly zero
  const double zero_tol = std::pow(1e-12, 2.0 * p);
  auto aggregate = [&](const std::vector<std::vector<double>>& rows) {
    MomentEstimate est;
    est.meshes = result.meshes;
    est.p = p;
    est.replicas = replicas;
    est.moments.assign(n_levels, 0.0);
    for (const auto& row : rows)
      for (std::size_t li = 0; li < n_levels; ++li) est.moments[li] += row[li];
    double peak = 0.0;
    for (double& m : est.moments) {
      m /= static_cast<double>(replicas);
      peak = std::max(peak, m);
    }
    if (peak <= zero_tol) {
      est.exact_zero = true;
    } else {
      est.fitted_rate = fit_rate_replicated(est.meshes, rows, mix64(master_seed ^ 0xC1u));
    }
    return est;
  };

  for (std::size_t xi = 0; xi < n_x0; ++xi) result.per_x0.push_back(aggregate(raw[xi]));
  result.sup_over_x0 = aggregate(sup_raw);

  // keep the raw rows for the sup and for the initial point nearest the
  // domain's center (the headline series of the reports)
  const auto [blo, bhi] = domain.bounding_box();
  Vec mid(blo.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (blo[i] + bhi[i]);
  std::size_t center = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t xi = 0; xi < n_x0; ++xi) {
    const double d = norm(x0_set[xi] - mid);
    if (d < best) {
      best = d;
      center = xi;
    }
  }
  result.center_index = center;
  result.center_samples = std::move(raw[center]);
  result.sup_samples = std::move(sup_raw);
  return result;
}

double two_point_gap(const Domain& domain, const CoefficientField& field, const Vec& x,
                     const Vec& y, const Partition& partition, int fine_level, double p,
                     int replicas, std::uint64_t master_seed, int workers,
                     std::vector<double>* raw_out) {
  if (domain.contains(x) == Classification::Exterior ||
      domain.contains(y) == Classification::Exterior)
    throw Error(Errc::InvalidPoint, "two-point endpoints must lie in the closure");
  const Partition fine = Partition::dyadic(fine_level);
  std::vector<double> sups(replicas, 0.0);
  parallel_for(replicas, workers, [&](std::size_t r) {
    const BrownianPath path = BrownianPath::sample(split_seed(master_seed, r), fine, domain.dim());
    const ReflectedSolution sa = solve(domain, field, path, x);
    const ReflectedSolution sb = solve(domain, field, path, y);
    const auto pa = riemann_prefix(sigma_samples(sa, field), sa, path, partition);
    const auto pb = riemann_prefix(sigma_samples(sb, field), sb, path, partition);
    double sup = 0.0;
    for (std::size_t m = 0; m < pa.size(); ++m) sup = std::max(sup, norm(pa[m] - pb[m]));
    sups[r] = std::pow(sup, p);
  });
  const double est = mean(sups);
  if (raw_out) *raw_out = std::move(sups);
  return est;
}

}  // namespace sdeflow
