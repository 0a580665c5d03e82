#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vpsde {

enum class ScheduleKind { LinearScaled };

struct ScheduleParams;

/// How the surviving signal fraction alpha_bar is evaluated on the grid.
enum class SignalModel {
  /// prod_{k<=step} (1 - beta(k)); requires every beta(k) < 1.
  DiscreteProduct,
  /// exp(-integral_0^tau rate), the continuous-time limit of the product.
  /// Independent of T, so grids of different resolution discretize the same
  /// SDE. Needed on coarse grids where beta(k) >= 1.
  ContinuousExponential,
};

std::string_view to_string(ScheduleKind kind);
std::string_view to_string(SignalModel signal);
ScheduleKind parse_schedule_kind(std::string_view name);
SignalModel parse_signal_model(std::string_view name);

/// Linear noise schedule with endpoints scaled by 1/T:
///   beta(step) = (b_min + (step/T)(b_max - b_min)) / T,  step = 1..T.
/// The rescaled-time rate T*beta(step) = b_min + tau (b_max - b_min) then does
/// not depend on T. Immutable; all tables are built in the constructor.
class Schedule {
 public:
  static Schedule linear_scaled(int steps, double b_min, double b_max,
                                SignalModel signal = SignalModel::DiscreteProduct);

  ScheduleKind kind() const { return kind_; }
  SignalModel signal() const { return signal_; }
  int steps() const { return steps_; }
  double h() const { return 1.0 / steps_; }
  double b_min() const { return b_min_; }
  double b_max() const { return b_max_; }
  double tau(int step) const { return static_cast<double>(step) / steps_; }

  /// Per-step beta, step in 1..T.
  double beta_at(int step) const;
  /// T * beta(step): the drift/diffusion rate of the time-rescaled SDE.
  double rate(int step) const;
  /// sqrt(rate): the diffusion coefficient sigma(tau) of the rescaled SDE.
  double diffusion(int step) const;
  /// step in 0..T; alpha_bar(0) = 1.
  double alpha_bar(int step) const;
  /// sqrt(1 - alpha_bar(step)), step in 1..T. Throws SingularTimeError where
  /// alpha_bar rounds to 1.
  double marginal_std(int step) const;

  /// Same base constants at T / refinement steps. Throws unless divisible.
  Schedule coarsened(int refinement) const;
  /// Same base constants at T * refinement steps.
  Schedule refined(int refinement) const;

  /// Human-readable identity used in path metadata.
  std::string id() const;
  ScheduleParams params() const;

 private:
  Schedule(int steps, double b_min, double b_max, SignalModel signal);
  void check_step(int step, int lo) const;

  ScheduleKind kind_ = ScheduleKind::LinearScaled;
  SignalModel signal_;
  int steps_;
  double b_min_;
  double b_max_;
  std::vector<double> beta_;       // index 0 unused
  std::vector<double> alpha_bar_;  // index 0..T
};

/// Base constants of a linear-scaled schedule, independent of T.
struct ScheduleParams {
  double b_min = 0.1;
  double b_max = 20.0;
  SignalModel signal = SignalModel::DiscreteProduct;

  Schedule at(int steps) const { return Schedule::linear_scaled(steps, b_min, b_max, signal); }
};

struct TerminalSignalReport {
  bool passed = false;           // alpha_bar(T) <= tolerance
  double alpha_bar_T = 0.0;
  double alpha_bar_2T = 0.0;     // same base constants at 2T
  double relative_gap = 0.0;     // |abar_T - abar_2T| / abar_T
  bool t_invariant = false;      // relative_gap <= 0.05
  double max_sigma_jump = 0.0;   // max |sigma(k+1) - sigma(k)| over adjacent steps
  double lipschitz_k = 0.0;      // max_sigma_jump / sqrt(h)
};

TerminalSignalReport terminal_signal_check(const Schedule& s, double tolerance);

}  // namespace vpsde
