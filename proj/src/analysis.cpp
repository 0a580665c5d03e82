#include "vpsde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "vpsde/errors.hpp"
#include "vpsde/parallel.hpp"

namespace vpsde {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Relative slack for roundoff when a trial meets its bound with equality.
constexpr double kRoundoff = 1e-12;

bool same_value(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_value(a[i], b[i])) return false;
  return true;
}

struct PointEstimate {
  double error = kNaN;
  double ci = kNaN;
  double terminal = kNaN;
  std::string failure;
};

PointEstimate strong_point(const Dynamics& dyn, const Schedule& fine, const Schedule& coarse,
                           int refinement, std::size_t n_paths, RngState rng) {
  std::vector<double> sup_sq(n_paths, 0.0), terminal_sq(n_paths, 0.0);
  std::vector<int> failed(n_paths, -1);
  parallel_for(n_paths, [&](std::size_t i) {
    Generator gen(rng.child(i));
    try {
      const CoupledError e = coupled_error(dyn, fine, coarse, refinement, gen);
      sup_sq[i] = e.sup_sq;
      terminal_sq[i] = e.terminal_sq;
    } catch (const DivergenceError& e) {
      failed[i] = e.step();
    }
  });

  PointEstimate out;
  const auto n_failed = std::count_if(failed.begin(), failed.end(), [](int s) { return s >= 0; });
  if (n_failed > 0) {
    const auto first = *std::find_if(failed.begin(), failed.end(), [](int s) { return s >= 0; });
    out.failure = std::to_string(n_failed) + " of " + std::to_string(n_paths) +
                  " paths diverged (first at fine step " + std::to_string(first) + ")";
    return out;
  }
  const double n = static_cast<double>(n_paths);
  double mean = 0.0;
  for (double v : sup_sq) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : sup_sq) var += (v - mean) * (v - mean);
  var /= (n - 1.0);
  out.error = std::sqrt(mean);
  out.terminal = std::sqrt(std::accumulate(terminal_sq.begin(), terminal_sq.end(), 0.0) / n);
  // Delta method: sd(sqrt(m)) = sd(m) / (2 sqrt(m)).
  out.ci = out.error > 0.0 ? kZ95 * std::sqrt(var / n) / (2.0 * out.error) : 0.0;
  return out;
}

int steps_for(double h) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0, 1]");
  const double t = std::round(1.0 / h);
  if (std::fabs(t * h - 1.0) > 1e-9) throw std::invalid_argument("1/h must be an integer");
  return static_cast<int>(t);
}

void push_point(ErrorReport& report, double x, const PointEstimate& p) {
  report.abscissa.push_back(x);
  report.error.push_back(p.error);
  report.ci_half_width.push_back(p.ci);
  report.failures.push_back(p.failure);
  if (report.kind != "substitution") report.terminal_error.push_back(p.terminal);
}

SampleSet to_set(const SampleBatch& batch, std::string label) {
  return SampleSet{batch.states, batch.dim, std::move(label)};
}

// Sampler distance for one (spec, T); failures become NaN with a reason.
PointEstimate sampler_point(const Dynamics& dyn, const Schedule& s, const NoiseSpec& spec,
                            std::size_t n, RngState rng, const SampleSet& reference,
                            MetricKind metric, const MetricOptions& opts) {
  PointEstimate p;
  try {
    const SampleBatch batch = reverse_sample(dyn, s, spec, n, rng);
    p.error = distance(metric, to_set(batch, spec.label()), reference, opts);
  } catch (const DivergenceBudgetError& e) {
    p.failure = e.what();
  }
  return p;
}

}  // namespace

bool same_report(const ErrorReport& a, const ErrorReport& b) {
  return a.kind == b.kind && a.abscissa_name == b.abscissa_name &&
         same_values(a.abscissa, b.abscissa) && same_values(a.error, b.error) &&
         same_values(a.ci_half_width, b.ci_half_width) && a.failures == b.failures &&
         same_value(a.fitted_slope, b.fitted_slope) &&
         same_value(a.fitted_intercept, b.fitted_intercept) &&
         same_value(a.r_squared, b.r_squared) && a.n_paths == b.n_paths &&
         same_values(a.terminal_error, b.terminal_error) &&
         same_values(a.baseline, b.baseline) && same_values(a.baseline_ci, b.baseline_ci) &&
         same_value(a.floor, b.floor);
}

OrderFit fit_order(std::span<const double> abscissa, std::span<const double> errors) {
  if (abscissa.size() != errors.size()) throw std::invalid_argument("fit_order: size mismatch");
  if (abscissa.size() < 3) throw std::invalid_argument("fit_order needs at least 3 points");
  const std::size_t n = abscissa.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(abscissa[i] > 0.0) || !(errors[i] > 0.0) || !std::isfinite(abscissa[i]) ||
        !std::isfinite(errors[i]))
      throw std::invalid_argument("fit_order needs positive finite values");
    lx[i] = std::log(abscissa[i]);
    ly[i] = std::log(errors[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_order needs distinct abscissae");
  OrderFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

void fit_report(ErrorReport& report) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < report.size(); ++i) {
    if (report.ok(i) && report.error[i] > 0.0) {
      x.push_back(report.abscissa[i]);
      y.push_back(report.error[i]);
    }
  }
  if (x.size() < 3) return;
  const OrderFit fit = fit_order(x, y);
  report.fitted_slope = fit.slope;
  report.fitted_intercept = fit.intercept;
  report.r_squared = fit.r_squared;
}

ErrorReport strong_error_sweep(const Dynamics& dyn, const ScheduleParams& params,
                               std::span<const double> h_list, int refinement,
                               std::size_t n_paths, RngState rng) {
  if (refinement < 1) throw std::invalid_argument("refinement must be >= 1");
  if (n_paths < 100) throw std::invalid_argument("strong_error_sweep needs n_paths >= 100");
  ErrorReport report;
  report.kind = "strong";
  report.abscissa_name = "h";
  report.n_paths = n_paths;
  for (double h : h_list) {
    const int steps = steps_for(h);
    const Schedule coarse = params.at(steps);
    const Schedule fine = params.at(steps * refinement);
    push_point(report, h, strong_point(dyn, fine, coarse, refinement, n_paths, rng));
  }
  fit_report(report);
  return report;
}

ErrorReport dimension_sweep(const DynamicsFactory& factory, const ScheduleParams& params, double h,
                            std::span<const int> d_list, int refinement, std::size_t n_paths,
                            RngState rng) {
  if (refinement < 1) throw std::invalid_argument("refinement must be >= 1");
  if (n_paths < 100) throw std::invalid_argument("dimension_sweep needs n_paths >= 100");
  const int steps = steps_for(h);
  const Schedule coarse = params.at(steps);
  const Schedule fine = params.at(steps * refinement);
  ErrorReport report;
  report.kind = "dimension";
  report.abscissa_name = "d";
  report.n_paths = n_paths;
  for (int d : d_list) {
    if (d < 1) throw std::invalid_argument("dimensions must be positive");
    const auto dyn = factory(d);
    if (!dyn || dyn->dim() != d) throw std::invalid_argument("factory returned the wrong dimension");
    push_point(report, d, strong_point(*dyn, fine, coarse, refinement, n_paths, rng));
  }
  fit_report(report);
  return report;
}

SampleSet target_reference(const DataModel& model, std::size_t n, MetricKind metric, RngState rng) {
  if (n < 2) throw std::invalid_argument("target reference needs n >= 2");
  const int d = model.dim();
  SampleSet ref{std::vector<double>(n * d), d, "target"};
  const auto comps = model.components();
  if (d == 1 && comps.size() == 1 && metric == MetricKind::Wasserstein1) {
    const double mu = comps[0].mean[0];
    const double sd = std::sqrt(comps[0].variance[0]);
    for (std::size_t i = 0; i < n; ++i)
      ref.points[i] = mu + sd * normal_quantile((static_cast<double>(i) + 0.5) / n);
    return ref;
  }
  Generator gen(rng);
  for (std::size_t i = 0; i < n; ++i)
    model.sample_data(gen, std::span<double>(ref.points).subspan(i * d, d));
  return ref;
}

ErrorReport substitution_error_sweep(std::shared_ptr<const GaussianData> model,
                                     const ScheduleParams& params, const NoiseSpec& spec,
                                     std::span<const int> t_list, std::size_t n_samples,
                                     MetricKind metric, RngState rng,
                                     const MetricOptions& metric_options) {
  if (!model) throw std::invalid_argument("substitution sweep needs a data model");
  spec.validate();
  const SampleSet reference = target_reference(*model, n_samples, metric, rng.child(0));
  const ReverseVpDynamics dyn(model);

  ErrorReport report;
  report.kind = "substitution";
  report.abscissa_name = "T";
  report.n_paths = n_samples;

  // Same-law floor: a fresh exact sample against the reference.
  SampleSet exact{std::vector<double>(n_samples * model->dim()), model->dim(), "exact"};
  Generator gen(rng.child(2));
  for (std::size_t i = 0; i < n_samples; ++i)
    model->sample_data(gen, std::span<double>(exact.points).subspan(i * model->dim(), model->dim()));
  report.floor = distance(metric, exact, reference, metric_options);

  const NoiseSpec gaussian{NoiseFamily::Gaussian, 1.0};
  for (int t : t_list) {
    if (t < 1) throw std::invalid_argument("T must be positive");
    const Schedule s = params.at(t);
    PointEstimate p = sampler_point(dyn, s, spec, n_samples, rng.child(1), reference, metric,
                                    metric_options);
    if (p.failure.empty()) p.ci = report.floor;
    push_point(report, t, p);
    const PointEstimate base = sampler_point(dyn, s, gaussian, n_samples, rng.child(1), reference,
                                             metric, metric_options);
    report.baseline.push_back(base.error);
    report.baseline_ci.push_back(base.failure.empty() ? report.floor : kNaN);
  }
  fit_report(report);
  return report;
}

TrendCheck trend_check(const ErrorReport& report, bool increasing) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < report.size(); ++i)
    if (report.ok(i)) idx.push_back(i);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return report.abscissa[a] < report.abscissa[b]; });
  TrendCheck out;
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const std::size_t i = idx[k - 1], j = idx[k];
    const double jump = increasing ? report.error[i] - report.error[j]
                                   : report.error[j] - report.error[i];
    if (jump <= 0.0) continue;
    ++out.inversions;
    if (jump > report.ci_half_width[i] + report.ci_half_width[j]) ++out.large_inversions;
  }
  return out;
}

double gronwall_continuous_bound(double a, std::span<const double> b_table) {
  if (!(a >= 0.0)) throw std::invalid_argument("gronwall: a must be non-negative");
  if (b_table.size() < 2) throw std::invalid_argument("gronwall: b table needs >= 2 nodes");
  for (double b : b_table)
    if (!(b >= 0.0)) throw std::invalid_argument("gronwall: b must be non-negative");
  const double dx = 1.0 / static_cast<double>(b_table.size() - 1);
  double integral = 0.0;
  for (std::size_t i = 1; i < b_table.size(); ++i) integral += 0.5 * (b_table[i - 1] + b_table[i]);
  return a * std::exp(integral * dx);
}

std::vector<double> gronwall_discrete_bound(double a, std::span<const double> b_seq) {
  if (!(a >= 0.0)) throw std::invalid_argument("gronwall: a must be non-negative");
  std::vector<double> bound(b_seq.size() + 1);
  bound[0] = a;
  for (std::size_t n = 0; n < b_seq.size(); ++n) {
    if (!(b_seq[n] >= 0.0)) throw std::invalid_argument("gronwall: b must be non-negative");
    bound[n + 1] = bound[n] * (1.0 + b_seq[n]);
  }
  return bound;
}

GronwallSelftest gronwall_selftest(int discrete_trials, int continuous_trials, RngState rng) {
  GronwallSelftest out;
  out.discrete_trials = discrete_trials;
  out.continuous_trials = continuous_trials;

  for (int t = 0; t < discrete_trials; ++t) {
    Generator gen(rng.child(2 * static_cast<std::uint64_t>(t)));
    const auto length = 1 + static_cast<std::size_t>(gen.uniform() * 200.0);
    const double a = 10.0 * gen.uniform();
    std::vector<double> b(length);
    for (double& v : b) v = 0.2 * gen.uniform();
    const auto bound = gronwall_discrete_bound(a, b);

    double u = a, weighted = 0.0;
    bool failed = false;
    for (std::size_t n = 0; n <= length; ++n) {
      u = a + weighted;
      out.worst_discrete_ratio = std::max(out.worst_discrete_ratio, bound[n] > 0.0 ? u / bound[n] : 0.0);
      if (u > bound[n] * (1.0 + kRoundoff)) failed = true;
      if (n < length) weighted += b[n] * u;
    }
    if (failed) ++out.discrete_failures;
  }

  constexpr int kTableIntervals = 200;
  constexpr int kSubsteps = 64;
  for (int t = 0; t < continuous_trials; ++t) {
    Generator gen(rng.child(2 * static_cast<std::uint64_t>(t) + 1));
    const double a = 10.0 * gen.uniform();
    const int pieces = 1 + static_cast<int>(gen.uniform() * 10.0);
    std::vector<double> cuts(pieces - 1), values(pieces);
    for (double& c : cuts) c = gen.uniform();
    std::sort(cuts.begin(), cuts.end());
    for (double& v : values) v = 3.0 * gen.uniform();

    std::vector<double> table(kTableIntervals + 1);
    for (int k = 0; k <= kTableIntervals; ++k) {
      const double x = static_cast<double>(k) / kTableIntervals;
      const auto piece = std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin();
      table[k] = values[piece];
    }
    const double bound = gronwall_continuous_bound(a, table);

    // Explicit Euler for u' = b u on the interpolated table, b at substep midpoints.
    const double dt = 1.0 / (kTableIntervals * kSubsteps);
    double u = a;
    for (int k = 0; k < kTableIntervals; ++k) {
      for (int j = 0; j < kSubsteps; ++j) {
        const double w = (j + 0.5) / kSubsteps;
        const double b_mid = (1.0 - w) * table[k] + w * table[k + 1];
        u += b_mid * u * dt;
      }
    }
    out.worst_continuous_ratio = std::max(out.worst_continuous_ratio, bound > 0.0 ? u / bound : 0.0);
    if (u > bound * (1.0 + kRoundoff)) ++out.continuous_failures;
  }
  return out;
}

}  // namespace vpsde
