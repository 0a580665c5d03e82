#include "vpsde/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "vpsde/errors.hpp"

namespace vpsde {

std::string_view to_string(ScheduleKind) { return "linear-scaled"; }

std::string_view to_string(SignalModel signal) {
  return signal == SignalModel::DiscreteProduct ? "product" : "exponential";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "linear-scaled" || name == "linear") return ScheduleKind::LinearScaled;
  throw std::invalid_argument("unknown schedule kind '" + std::string(name) + "'");
}

SignalModel parse_signal_model(std::string_view name) {
  if (name == "product") return SignalModel::DiscreteProduct;
  if (name == "exponential") return SignalModel::ContinuousExponential;
  throw std::invalid_argument("unknown schedule signal model '" + std::string(name) + "'");
}

Schedule Schedule::linear_scaled(int steps, double b_min, double b_max, SignalModel signal) {
  return Schedule(steps, b_min, b_max, signal);
}

Schedule::Schedule(int steps, double b_min, double b_max, SignalModel signal)
    : signal_(signal), steps_(steps), b_min_(b_min), b_max_(b_max) {
  if (steps < 1) throw std::invalid_argument("schedule needs at least one step");
  if (!(b_min >= 0.0) || !std::isfinite(b_max) || b_min > b_max)
    throw std::invalid_argument("schedule requires 0 <= b_min <= b_max");

  const double T = steps;
  beta_.assign(steps + 1, 0.0);
  alpha_bar_.assign(steps + 1, 1.0);
  for (int k = 1; k <= steps; ++k) {
    beta_[k] = (b_min + (k / T) * (b_max - b_min)) / T;
    if (signal == SignalModel::DiscreteProduct) {
      if (!(beta_[k] < 1.0))
        throw std::invalid_argument("beta(" + std::to_string(k) + ") >= 1: T too small for the "
                                    "product signal model with these endpoints");
      alpha_bar_[k] = alpha_bar_[k - 1] * (1.0 - beta_[k]);
    } else {
      const double tau = k / T;
      alpha_bar_[k] = std::exp(-(b_min * tau + 0.5 * (b_max - b_min) * tau * tau));
    }
  }
}

void Schedule::check_step(int step, int lo) const {
  if (step < lo || step > steps_)
    throw std::out_of_range("schedule step " + std::to_string(step) + " outside [" +
                            std::to_string(lo) + ", " + std::to_string(steps_) + "]");
}

double Schedule::beta_at(int step) const {
  check_step(step, 1);
  return beta_[step];
}

double Schedule::rate(int step) const { return beta_at(step) * steps_; }

double Schedule::diffusion(int step) const { return std::sqrt(rate(step)); }

double Schedule::alpha_bar(int step) const {
  check_step(step, 0);
  return alpha_bar_[step];
}

double Schedule::marginal_std(int step) const {
  check_step(step, 1);
  const double var = 1.0 - alpha_bar_[step];
  if (var <= std::numeric_limits<double>::epsilon()) throw SingularTimeError(step);
  return std::sqrt(var);
}

Schedule Schedule::coarsened(int refinement) const {
  if (refinement < 1 || steps_ % refinement != 0)
    throw std::invalid_argument("refinement " + std::to_string(refinement) +
                                " does not divide T = " + std::to_string(steps_));
  return Schedule(steps_ / refinement, b_min_, b_max_, signal_);
}

Schedule Schedule::refined(int refinement) const {
  if (refinement < 1) throw std::invalid_argument("refinement must be >= 1");
  return Schedule(steps_ * refinement, b_min_, b_max_, signal_);
}

std::string Schedule::id() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "linear-scaled(T=%d,b_min=%.17g,b_max=%.17g,signal=%s)",
                steps_, b_min_, b_max_, std::string(to_string(signal_)).c_str());
  return buf;
}

ScheduleParams Schedule::params() const { return {b_min_, b_max_, signal_}; }

TerminalSignalReport terminal_signal_check(const Schedule& s, double tolerance) {
  TerminalSignalReport report;
  report.alpha_bar_T = s.alpha_bar(s.steps());
  report.passed = report.alpha_bar_T <= tolerance;

  const Schedule doubled = s.refined(2);
  report.alpha_bar_2T = doubled.alpha_bar(doubled.steps());
  report.relative_gap = report.alpha_bar_T > 0.0
                            ? std::fabs(report.alpha_bar_T - report.alpha_bar_2T) / report.alpha_bar_T
                            : 0.0;
  report.t_invariant = report.relative_gap <= 0.05;

  for (int k = 1; k < s.steps(); ++k)
    report.max_sigma_jump =
        std::max(report.max_sigma_jump, std::fabs(s.diffusion(k + 1) - s.diffusion(k)));
  report.lipschitz_k = report.max_sigma_jump / std::sqrt(s.h());
  return report;
}

}  // namespace vpsde
