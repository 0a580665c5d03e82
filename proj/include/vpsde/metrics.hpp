#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vpsde/rng.hpp"

namespace vpsde {

/// n points in R^d, row-major.
struct SampleSet {
  std::vector<double> points;
  int dim = 1;
  std::string label;

  std::size_t size() const { return dim > 0 ? points.size() / dim : 0; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(points).subspan(i * dim, dim);
  }
  /// Throws std::invalid_argument unless n >= 2, sizes agree and all finite.
  void validate() const;
};

enum class MetricKind { Wasserstein1, Energy, Mmd, Sliced };

std::string_view to_string(MetricKind kind);  // w1 | energy | mmd | sliced
MetricKind parse_metric_kind(std::string_view name);

/// Point sets above this size are subsampled by the pairwise metrics.
inline constexpr std::size_t kPairwiseMaxPoints = 10000;

struct MetricOptions {
  std::optional<double> bandwidth;  // MMD; median heuristic when empty
  int projections = 64;             // sliced Wasserstein
  std::uint64_t seed = 0;           // projections and subsampling
  std::size_t max_points = kPairwiseMaxPoints;
};

/// Exact 1-D Wasserstein-1: mean |a_(i) - b_(i)| for equal sizes, otherwise
/// the integral of |F_a^-1(q) - F_b^-1(q)| over q in (0, 1).
double wasserstein1_1d(const SampleSet& a, const SampleSet& b);
double wasserstein1_1d(std::span<const double> a, std::span<const double> b);

/// 2 E|A-B| - E|A-A'| - E|B-B'| (V-statistic form, so metric(a, a) == 0).
/// Sets larger than max_points are subsampled with a stream fixed by
/// (seed, set size).
double energy_distance(const SampleSet& a, const SampleSet& b, std::uint64_t seed = 0,
                       std::size_t max_points = kPairwiseMaxPoints);

/// Unbiased MMD^2 with k(x, y) = exp(-|x - y|^2 / (2 bw^2)). Without a
/// bandwidth the median pairwise distance of the pooled sample is used.
double mmd_gaussian(const SampleSet& a, const SampleSet& b, std::optional<double> bandwidth,
                    std::uint64_t seed = 0, std::size_t max_points = kPairwiseMaxPoints);

double median_heuristic_bandwidth(const SampleSet& a, const SampleSet& b, std::uint64_t seed = 0);

/// Standard deviation of mmd_gaussian over random relabelings of the pooled
/// sample: the scale of the estimator under the null a ~ b.
double mmd_permutation_null_std(const SampleSet& a, const SampleSet& b, double bandwidth,
                                int permutations, RngState rng);

/// Mean of wasserstein1_1d over n_projections uniform random unit directions.
double sliced_wasserstein(const SampleSet& a, const SampleSet& b, int n_projections, RngState rng);

/// Dispatch by kind; W1 requires d = 1 and sliced d >= 2.
double distance(MetricKind kind, const SampleSet& a, const SampleSet& b,
                const MetricOptions& options = {});

}  // namespace vpsde
