#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vpsde/em_solver.hpp"
#include "vpsde/metrics.hpp"
#include "vpsde/noise.hpp"
#include "vpsde/rng.hpp"
#include "vpsde/schedule.hpp"
#include "vpsde/score_models.hpp"

namespace vpsde {

/// Monte-Carlo error estimates along one abscissa (h, d or T). A point whose
/// batch failed carries NaN error and a non-empty failure reason.
struct ErrorReport {
  std::string kind;           // strong | dimension | substitution
  std::string abscissa_name;  // h | d | T
  std::vector<double> abscissa;
  std::vector<double> error;
  std::vector<double> ci_half_width;  // 95% normal interval
  std::vector<std::string> failures;
  /// Strong and dimension sweeps: sqrt(E |X_fine - X_coarse|^2) at grid
  /// step 0, a fixed-time companion of the sup estimate.
  std::vector<double> terminal_error;
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_paths = 0;

  /// Substitution sweeps only: the Gaussian-driven curve on the same grid and
  /// the metric between two independent exact-target sets of the same size.
  std::vector<double> baseline;
  std::vector<double> baseline_ci;
  double floor = 0.0;

  std::size_t size() const { return abscissa.size(); }
  bool ok(std::size_t i) const { return failures[i].empty(); }
};

/// NaN-aware equality, used for serialization round trips.
bool same_report(const ErrorReport& a, const ErrorReport& b);

struct OrderFit {
  double slope;
  double intercept;
  double r_squared;
};

/// Least squares of log(error) on log(abscissa). Needs >= 3 points, all
/// positive and finite; throws std::invalid_argument otherwise.
OrderFit fit_order(std::span<const double> abscissa, std::span<const double> errors);

/// Fits the successful points of a report in place (left at 0 when fewer
/// than 3 survive).
void fit_report(ErrorReport& report);

/// For each h in h_list: coarse grid T = 1/h, fine grid T r, both built from
/// params and coupled through shared Brownian increments. The error is
/// sqrt(mean over paths of sup_k |X_fine - X_coarse|^2) over the coarse grid.
/// Path i always draws from rng.child(i), whatever h.
ErrorReport strong_error_sweep(const Dynamics& dyn, const ScheduleParams& params,
                               std::span<const double> h_list, int refinement,
                               std::size_t n_paths, RngState rng);

using DynamicsFactory = std::function<std::shared_ptr<const Dynamics>(int dim)>;

/// Strong error at a fixed h for each dimension in d_list; slope is fitted on
/// log d.
ErrorReport dimension_sweep(const DynamicsFactory& factory, const ScheduleParams& params, double h,
                            std::span<const int> d_list, int refinement, std::size_t n_paths,
                            RngState rng);

/// Distance from the reverse-sampled terminal law under spec to the
/// analytic target, for each T, together with the Gaussian-driven baseline
/// and the same-law floor. In d = 1 with W1 the target is represented by its
/// n quantiles F^-1((i + 1/2)/n); otherwise by n exact draws. The CI
/// half-width of every point is the floor.
ErrorReport substitution_error_sweep(std::shared_ptr<const GaussianData> model,
                                     const ScheduleParams& params, const NoiseSpec& spec,
                                     std::span<const int> t_list, std::size_t n_samples,
                                     MetricKind metric, RngState rng,
                                     const MetricOptions& metric_options = {});

/// Reference set representing the exact data law of model (see above).
SampleSet target_reference(const DataModel& model, std::size_t n, MetricKind metric, RngState rng);

/// Inversions of the expected trend between neighbouring successful points
/// (abscissa ascending). An inversion is CI-sized when the jump is within
/// the sum of the two half-widths.
struct TrendCheck {
  int inversions = 0;
  int large_inversions = 0;
};

/// increasing: error should grow with the abscissa (strong error vs h).
TrendCheck trend_check(const ErrorReport& report, bool increasing);

/// a * exp(trapezoid integral of b), with b tabulated on a uniform grid of
/// [0, 1] (table.size() >= 2). Throws on negative a or entries.
double gronwall_continuous_bound(double a, std::span<const double> b_table);

/// bound[n] = a * prod_{j<n} (1 + b_j) for n = 0..N: the closed form of
/// a (1 + sum_{k<n} b_k prod_{k<j<n} (1 + b_j)). Throws on negative input.
std::vector<double> gronwall_discrete_bound(double a, std::span<const double> b_seq);

struct GronwallSelftest {
  int discrete_trials = 0;
  int discrete_failures = 0;
  int continuous_trials = 0;
  int continuous_failures = 0;
  double worst_discrete_ratio = 0.0;    // max u_n / bound_n
  double worst_continuous_ratio = 0.0;  // max u(1) / bound

  bool passed() const { return discrete_failures == 0 && continuous_failures == 0; }
};

/// Randomized dominance trials. Discrete: u_n = a + sum_{k<n} b_k u_k with
/// length <= 200 and b_k in [0, 0.2]. Continuous: u' = b u from u(0) = a for
/// random piecewise-constant b, stepped on a grid 64x finer than its table.
GronwallSelftest gronwall_selftest(int discrete_trials, int continuous_trials, RngState rng);

}  // namespace vpsde
