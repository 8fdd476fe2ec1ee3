#include "sdeflow/paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_map>

#include "sdeflow/errors.hpp"
#include "sdeflow/rng.hpp"

namespace sdeflow {

Partition::Partition(std::vector<double> times) : t_(std::move(times)) {
  if (t_.size() < 2) throw Error(Errc::OffGrid, "partition needs at least 2 points");
  if (t_.front() != 0.0) throw Error(Errc::OffGrid, "partition must start at 0");
  if (t_.back() > 1.0) throw Error(Errc::OffGrid, "partition must end at or before 1");
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1])) throw Error(Errc::OffGrid, "partition times must increase strictly");
}

Partition Partition::dyadic(int level, double t_end) {
  const double h = std::ldexp(1.0, -level);
  const double cells_real = t_end / h;
  const auto n = static_cast<std::size_t>(std::llround(cells_real));
  if (n < 1 || static_cast<double>(n) * h != t_end)
    throw Error(Errc::OffGrid, "t_end is not a dyadic grid point at this level");
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = static_cast<double>(k) * h;
  t[n] = t_end;
  return Partition(std::move(t));
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t i = 1; i < t_.size(); ++i) m = std::max(m, t_[i] - t_[i - 1]);
  return m;
}

bool Partition::contains_time(double t) const {
  return std::binary_search(t_.begin(), t_.end(), t);
}

std::size_t Partition::index_of(double t) const {
  auto it = std::lower_bound(t_.begin(), t_.end(), t);
  if (it == t_.end() || *it != t)
    throw Error(Errc::OffGrid, "time " + std::to_string(t) + " is not a grid point");
  return static_cast<std::size_t>(it - t_.begin());
}

bool Partition::nested(const Partition& finer, const Partition& coarser) {
  std::size_t j = 0;
  for (double tc : coarser.times()) {
    while (j < finer.times().size() && finer.times()[j] < tc) ++j;
    if (j == finer.times().size() || finer.times()[j] != tc) return false;
  }
  return true;
}

namespace {

// t = k / 2^J in lowest terms; returns the dyadic neighbours (k-1)/2^J and
// (k+1)/2^J (both of strictly lower level) and the bridge standard deviation
// sqrt(2^-(J+1)). Requires 0 < t < 1.
struct DyadicCell {
  double left, right, sd;
};

DyadicCell dyadic_cell(double t) {
  int exp = 0;
  const double m = std::frexp(t, &exp);  // t = m * 2^exp, m in [0.5, 1)
  auto sig = static_cast<std::uint64_t>(std::ldexp(m, 53));
  const int tz = std::countr_zero(sig);
  const int pow2 = exp - 53 + tz;  // t = (sig >> tz) * 2^pow2, odd significand
  const double ulp = std::ldexp(1.0, pow2);
  DyadicCell c;
  c.left = t - ulp;
  c.right = t + ulp;
  c.sd = std::sqrt(std::ldexp(1.0, pow2 - 1));
  return c;
}

class DyadicEvaluator {
 public:
  DyadicEvaluator(std::uint64_t seed, int dim) : seed_(seed), dim_(dim) {}

  Vec eval(double t) {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(t);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Vec v(dim_);
    if (t == 0.0) {
      // v stays zero
    } else if (t == 1.0) {
      for (int c = 0; c < dim_; ++c) v[c] = normal_from_key(path_key(seed_, 1.0, c));
    } else {
      const DyadicCell cell = dyadic_cell(t);
      const Vec left = eval(cell.left);
      const Vec right = eval(cell.right);
      for (int c = 0; c < dim_; ++c)
        v[c] = 0.5 * (left[c] + right[c]) + cell.sd * normal_from_key(path_key(seed_, t, c));
    }
    memo_.emplace(key, v);
    return v;
  }

 private:
  std::uint64_t seed_;
  int dim_;
  std::unordered_map<std::uint64_t, Vec> memo_;
};

}  // namespace

BrownianPath BrownianPath::sample(std::uint64_t seed, const Partition& grid, int dim) {
  DyadicEvaluator ev(seed, dim);
  std::vector<Vec> values;
  values.reserve(grid.size());
  for (double t : grid.times()) values.push_back(ev.eval(t));
  return BrownianPath(grid, std::move(values), seed, dim, true);
}

BrownianPath BrownianPath::from_values(Partition grid, std::vector<Vec> values,
                                       std::uint64_t seed) {
  if (values.size() != grid.size())
    throw Error(Errc::OffGrid, "one value per grid time required");
  const int dim = static_cast<int>(values.front().size());
  return BrownianPath(std::move(grid), std::move(values), seed, dim, false);
}

Vec BrownianPath::increment(double s, double t) const {
  return value_at(t) - value_at(s);
}

BrownianPath BrownianPath::refine(const Partition& finer) const {
  if (!Partition::nested(finer, grid_))
    throw Error(Errc::NotNested, "refinement grid does not contain the current grid");
  if (sampled_) return sample(seed_, finer, dim_);

  // Fixed-value path: bridge the new times between stored neighbours, coarsest
  // dyadic level first so that chained refinements agree at common times.
  struct NewTime {
    double t;
    int level;
  };
  std::vector<NewTime> fresh;
  for (double t : finer.times())
    if (!grid_.contains_time(t)) {
      int exp = 0;
      const double m = std::frexp(t, &exp);
      const auto sig = static_cast<std::uint64_t>(std::ldexp(m, 53));
      fresh.push_back({t, t == 0.0 ? 0 : 53 - exp - std::countr_zero(sig)});
    }
  std::stable_sort(fresh.begin(), fresh.end(), [](const NewTime& a, const NewTime& b) {
    return a.level != b.level ? a.level < b.level : a.t < b.t;
  });

  std::vector<double> times = grid_.times();
  std::vector<Vec> values = values_;
  for (const NewTime& nt : fresh) {
    auto it = std::upper_bound(times.begin(), times.end(), nt.t);
    const auto idx = static_cast<std::size_t>(it - times.begin());
    if (idx == 0 || idx == times.size())
      throw Error(Errc::NotNested, "refinement time outside the path's span");
    const double s = times[idx - 1], u = times[idx];
    const double frac = (nt.t - s) / (u - s);
    const double sd = std::sqrt((u - nt.t) * (nt.t - s) / (u - s));
    Vec v(dim_);
    for (int c = 0; c < dim_; ++c)
      v[c] = values[idx - 1][c] + frac * (values[idx][c] - values[idx - 1][c]) +
             sd * normal_from_key(path_key(seed_, nt.t, c));
    times.insert(it, nt.t);
    values.insert(values.begin() + static_cast<std::ptrdiff_t>(idx), std::move(v));
  }
  return BrownianPath(Partition(std::move(times)), std::move(values), seed_, dim_, false);
}

Vec BrownianPath::value_global(double t) const {
  if (grid_.contains_time(t)) return value_at(t);
  if (sampled_) {
    DyadicEvaluator ev(seed_, dim_);
    return ev.eval(t);
  }
  auto it = std::upper_bound(grid_.times().begin(), grid_.times().end(), t);
  if (it == grid_.times().begin() || it == grid_.times().end())
    throw Error(Errc::OffGrid, "time outside the path's span");
  const auto idx = static_cast<std::size_t>(it - grid_.times().begin());
  const double s = grid_.times()[idx - 1], u = grid_.times()[idx];
  const double frac = (t - s) / (u - s);
  const double sd = std::sqrt((u - t) * (t - s) / (u - s));
  Vec v(dim_);
  for (int c = 0; c < dim_; ++c)
    v[c] = values_[idx - 1][c] + frac * (values_[idx][c] - values_[idx - 1][c]) +
           sd * normal_from_key(path_key(seed_, t, c));
  return v;
}

Mat cell_average(const std::vector<std::pair<double, Mat>>& samples, double s, double u) {
  if (!(u > s)) throw Error(Errc::InsufficientSamples, "cell average requires u > s");
  auto lo = std::lower_bound(samples.begin(), samples.end(), s,
                             [](const auto& a, double t) { return a.first < t; });
  if (lo == samples.end() || lo->first != s)
    throw Error(Errc::InsufficientSamples, "samples do not cover the cell start");
  auto hi = std::lower_bound(lo, samples.end(), u,
                             [](const auto& a, double t) { return a.first < t; });
  if (hi == samples.end() || hi->first != u)
    throw Error(Errc::InsufficientSamples, "samples do not cover the cell end");

  Mat acc(lo->second.rows(), lo->second.cols());
  for (auto it = lo; it != hi; ++it) {
    const auto next = it + 1;
    const double h = next->first - it->first;
    Mat mid = it->second;
    mid += next->second;
    mid *= 0.5 * h;
    acc += mid;
  }
  acc *= 1.0 / (u - s);
  return acc;
}

}  // namespace sdeflow
