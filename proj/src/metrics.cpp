#include "vpsde/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vpsde/parallel.hpp"

namespace vpsde {

void SampleSet::validate() const {
  if (dim < 1) throw std::invalid_argument("sample set dimension must be positive");
  if (points.size() % dim != 0) throw std::invalid_argument("sample set size is not a multiple of dim");
  if (size() < 2) throw std::invalid_argument("sample set '" + label + "' needs at least 2 points");
  for (double v : points)
    if (!std::isfinite(v)) throw std::invalid_argument("sample set '" + label + "' has non-finite values");
}

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Wasserstein1: return "w1";
    case MetricKind::Energy: return "energy";
    case MetricKind::Mmd: return "mmd";
    case MetricKind::Sliced: return "sliced";
  }
  return "?";
}

MetricKind parse_metric_kind(std::string_view name) {
  for (MetricKind k : {MetricKind::Wasserstein1, MetricKind::Energy, MetricKind::Mmd, MetricKind::Sliced})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown metric kind '" + std::string(name) + "'");
}

namespace {

void require_same_dim(const SampleSet& a, const SampleSet& b) {
  a.validate();
  b.validate();
  if (a.dim != b.dim) throw std::invalid_argument("sample sets have different dimensions");
}

// Fixes the argument order so every metric is exactly symmetric in (a, b):
// floating-point sums are then accumulated in the same order either way.
bool swapped_order(const SampleSet& a, const SampleSet& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return std::lexicographical_compare(b.points.begin(), b.points.end(), a.points.begin(),
                                      a.points.end());
}

double sorted_w1(std::vector<double>& a, std::vector<double>& b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
  }
  // Walk the merged breakpoints of the two empirical quantile functions.
  const std::size_t na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double t = 0.0, acc = 0.0;
  while (i < na && j < nb) {
    const std::size_t lhs = (i + 1) * nb, rhs = (j + 1) * na;
    const double next = lhs <= rhs ? static_cast<double>(i + 1) / na : static_cast<double>(j + 1) / nb;
    acc += (next - t) * std::fabs(a[i] - b[j]);
    t = next;
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
  }
  return acc;
}

// Row indices kept after subsampling; depends only on (seed, n).
std::vector<std::size_t> subsample_rows(std::size_t n, std::size_t max_points, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= max_points) return idx;
  Generator gen(RngState{seed, n});
  for (std::size_t i = 0; i < max_points; ++i) {
    const std::size_t pick = i + static_cast<std::size_t>(gen.uniform() * static_cast<double>(n - i));
    std::swap(idx[i], idx[std::min(pick, n - 1)]);
  }
  idx.resize(max_points);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double euclid(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - y[j];
    acc += d * d;
  }
  return std::sqrt(acc);
}

// Sum over all (i, j) of f(a_i, b_j), reduced row by row in a fixed order.
template <class F>
double pair_sum(const SampleSet& a, const std::vector<std::size_t>& ia, const SampleSet& b,
                const std::vector<std::size_t>& ib, bool skip_diagonal, F&& f) {
  std::vector<double> rows(ia.size(), 0.0);
  parallel_for(ia.size(), [&](std::size_t r) {
    double acc = 0.0;
    const auto x = a.row(ia[r]);
    for (std::size_t c = 0; c < ib.size(); ++c) {
      if (skip_diagonal && c == r) continue;
      acc += f(x, b.row(ib[c]));
    }
    rows[r] = acc;
  });
  double total = 0.0;
  for (double v : rows) total += v;
  return total;
}

}  // namespace

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1_1d needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  return sorted_w1(sa, sb);
}

double wasserstein1_1d(const SampleSet& a, const SampleSet& b) {
  require_same_dim(a, b);
  if (a.dim != 1) throw std::invalid_argument("wasserstein1_1d requires d = 1");
  return wasserstein1_1d(std::span<const double>(a.points), std::span<const double>(b.points));
}

double energy_distance(const SampleSet& a_in, const SampleSet& b_in, std::uint64_t seed,
                       std::size_t max_points) {
  require_same_dim(a_in, b_in);
  const bool swap = swapped_order(a_in, b_in);
  const SampleSet& a = swap ? b_in : a_in;
  const SampleSet& b = swap ? a_in : b_in;
  const auto ia = subsample_rows(a.size(), max_points, seed);
  const auto ib = subsample_rows(b.size(), max_points, seed);

  const double na = static_cast<double>(ia.size()), nb = static_cast<double>(ib.size());
  const double ab = pair_sum(a, ia, b, ib, false, euclid) / (na * nb);
  const double aa = pair_sum(a, ia, a, ia, false, euclid) / (na * na);
  const double bb = pair_sum(b, ib, b, ib, false, euclid) / (nb * nb);
  return 2.0 * ab - aa - bb;
}

double median_heuristic_bandwidth(const SampleSet& a_in, const SampleSet& b_in, std::uint64_t seed) {
  require_same_dim(a_in, b_in);
  const bool swap = swapped_order(a_in, b_in);
  const SampleSet& a = swap ? b_in : a_in;
  const SampleSet& b = swap ? a_in : b_in;

  SampleSet pooled{a.points, a.dim, "pooled"};
  pooled.points.insert(pooled.points.end(), b.points.begin(), b.points.end());
  const auto idx = subsample_rows(pooled.size(), 1000, seed);
  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j)
      dists.push_back(euclid(pooled.row(idx[i]), pooled.row(idx[j])));
  auto mid = dists.begin() + dists.size() / 2;
  std::nth_element(dists.begin(), mid, dists.end());
  const double median = *mid;
  if (!(median > 0.0)) throw std::invalid_argument("median heuristic bandwidth is zero");
  return median;
}

double mmd_gaussian(const SampleSet& a_in, const SampleSet& b_in, std::optional<double> bandwidth,
                    std::uint64_t seed, std::size_t max_points) {
  require_same_dim(a_in, b_in);
  const double bw = bandwidth ? *bandwidth : median_heuristic_bandwidth(a_in, b_in, seed);
  if (!(bw > 0.0)) throw std::invalid_argument("MMD bandwidth must be positive");
  const bool swap = swapped_order(a_in, b_in);
  const SampleSet& a = swap ? b_in : a_in;
  const SampleSet& b = swap ? a_in : b_in;
  const auto ia = subsample_rows(a.size(), max_points, seed);
  const auto ib = subsample_rows(b.size(), max_points, seed);

  const double inv = 1.0 / (2.0 * bw * bw);
  auto kernel = [inv](std::span<const double> x, std::span<const double> y) {
    const double r = euclid(x, y);
    return std::exp(-r * r * inv);
  };
  const double na = static_cast<double>(ia.size()), nb = static_cast<double>(ib.size());
  const double aa = pair_sum(a, ia, a, ia, true, kernel) / (na * (na - 1.0));
  const double bb = pair_sum(b, ib, b, ib, true, kernel) / (nb * (nb - 1.0));
  const double ab = pair_sum(a, ia, b, ib, false, kernel) / (na * nb);
  return aa + bb - 2.0 * ab;
}

double mmd_permutation_null_std(const SampleSet& a, const SampleSet& b, double bandwidth,
                                int permutations, RngState rng) {
  require_same_dim(a, b);
  if (permutations < 2) throw std::invalid_argument("need at least 2 permutations");
  SampleSet pooled{a.points, a.dim, "pooled"};
  pooled.points.insert(pooled.points.end(), b.points.begin(), b.points.end());
  const std::size_t n = pooled.size(), na = a.size();

  std::vector<double> stats;
  for (int p = 0; p < permutations; ++p) {
    Generator gen(rng.child(p));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto k = static_cast<std::size_t>(gen.uniform() * static_cast<double>(i + 1));
      std::swap(order[i], order[std::min(k, i)]);
    }
    SampleSet pa{{}, a.dim, "perm-a"}, pb{{}, a.dim, "perm-b"};
    for (std::size_t i = 0; i < n; ++i) {
      auto& dst = i < na ? pa.points : pb.points;
      const auto r = pooled.row(order[i]);
      dst.insert(dst.end(), r.begin(), r.end());
    }
    stats.push_back(mmd_gaussian(pa, pb, bandwidth));
  }
  const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / stats.size();
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  return std::sqrt(var / (stats.size() - 1));
}

double sliced_wasserstein(const SampleSet& a, const SampleSet& b, int n_projections, RngState rng) {
  require_same_dim(a, b);
  if (a.dim < 2) throw std::invalid_argument("sliced Wasserstein requires d >= 2");
  if (n_projections < 1) throw std::invalid_argument("need at least one projection");

  const int d = a.dim;
  std::vector<double> directions(static_cast<std::size_t>(n_projections) * d);
  Generator gen(rng);
  for (int p = 0; p < n_projections; ++p) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (int j = 0; j < d; ++j) {
        const double g = gen.normal();
        directions[p * d + j] = g;
        norm += g * g;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (int j = 0; j < d; ++j) directions[p * d + j] /= norm;
  }

  std::vector<double> per_projection(n_projections);
  parallel_for(n_projections, [&](std::size_t p) {
    const std::span<const double> u(directions.data() + p * d, d);
    auto project = [&](const SampleSet& s) {
      std::vector<double> out(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto x = s.row(i);
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += x[j] * u[j];
        out[i] = acc;
      }
      return out;
    };
    auto pa = project(a);
    auto pb = project(b);
    per_projection[p] = sorted_w1(pa, pb);
  });
  double total = 0.0;
  for (double v : per_projection) total += v;
  return total / n_projections;
}

double distance(MetricKind kind, const SampleSet& a, const SampleSet& b, const MetricOptions& options) {
  switch (kind) {
    case MetricKind::Wasserstein1: return wasserstein1_1d(a, b);
    case MetricKind::Energy: return energy_distance(a, b, options.seed, options.max_points);
    case MetricKind::Mmd: return mmd_gaussian(a, b, options.bandwidth, options.seed, options.max_points);
    case MetricKind::Sliced: return sliced_wasserstein(a, b, options.projections, RngState{options.seed, 0});
  }
  throw std::invalid_argument("unknown metric kind");
}

}  // namespace vpsde
