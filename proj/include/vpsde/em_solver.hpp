#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vpsde/noise.hpp"
#include "vpsde/rng.hpp"
#include "vpsde/schedule.hpp"
#include "vpsde/score_models.hpp"

namespace vpsde {

/// |x|_inf above this marks a path as diverged.
inline constexpr double kDivergenceThreshold = 1e6;
/// A batch fails when more than this fraction of its paths diverge.
inline constexpr double kDivergenceBudget = 1e-3;

/// Coefficients b(x, tau) and sigma(tau) of an SDE on rescaled time
/// tau in [0, 1], evaluated on the grid tau_k = k h of a schedule.
class Dynamics {
 public:
  virtual ~Dynamics() = default;
  virtual int dim() const = 0;
  virtual void drift(const Schedule& s, int step, std::span<const double> x,
                     std::span<double> out) const = 0;
  virtual double diffusion(const Schedule& s, int step) const { return s.diffusion(step); }
  virtual std::string describe() const = 0;
};

/// Reverse-time VP-SDE in noise-prediction form:
///   b(x, tau) = rate/s_t * eps(x, tau) - rate/2 * x,   sigma = sqrt(rate),
/// with eps = -s_t * score from the analytic data model and s_t the marginal
/// noise std.
class ReverseVpDynamics final : public Dynamics {
 public:
  explicit ReverseVpDynamics(std::shared_ptr<const DataModel> model);

  int dim() const override { return model_->dim(); }
  void drift(const Schedule& s, int step, std::span<const double> x,
             std::span<double> out) const override;
  std::string describe() const override { return "reverse-vp"; }
  const DataModel& model() const { return *model_; }

 private:
  std::shared_ptr<const DataModel> model_;
};

/// b(x) = coefficient * x with the schedule's diffusion. A flat zero
/// schedule turns it into the linear ODE used as the Euler order-1 oracle.
class LinearDynamics final : public Dynamics {
 public:
  LinearDynamics(int dim, double coefficient);

  int dim() const override { return dim_; }
  void drift(const Schedule& s, int step, std::span<const double> x,
             std::span<double> out) const override;
  std::string describe() const override;
  double coefficient() const { return coefficient_; }

 private:
  int dim_;
  double coefficient_;
};

/// One reverse update:
///   out = x - b(x, tau_step) h - sigma(tau_step) * increment,
/// where increment is the realized sqrt(h) E (or a Brownian increment).
/// Throws DivergenceError on a non-finite result or |out|_inf > 1e6.
void em_step(const Dynamics& dyn, const Schedule& s, int step, std::span<const double> x,
             std::span<const double> increment, std::span<double> out);
std::vector<double> em_step(const Dynamics& dyn, const Schedule& s, int step,
                            std::span<const double> x, std::span<const double> increment);

struct PathMetadata {
  std::string schedule_id;
  std::string noise;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// States indexed by grid step: state(k) is the value at tau_k = k h.
struct Path {
  int dim = 0;
  std::vector<double> times;   // size T + 1
  std::vector<double> states;  // (T + 1) * dim, row k = grid step k
  PathMetadata metadata;

  std::span<const double> state(int step) const {
    return std::span<const double>(states).subspan(static_cast<std::size_t>(step) * dim, dim);
  }
  int steps() const { return static_cast<int>(times.size()) - 1; }
};

/// Coarse and fine reverse paths sharing one Brownian path.
struct PathPair {
  Path fine;
  Path coarse;
  int refinement = 1;
  std::vector<double> fine_increments;    // T_f * dim, row k-1 drives the update at fine step k
  std::vector<double> coarse_increments;  // T_c * dim, each the sum of r fine rows
};

/// Terminal states of a Monte-Carlo batch. Diverged paths are dropped from
/// states and listed separately.
struct SampleBatch {
  int dim = 0;
  std::vector<std::size_t> path_ids;  // completed paths, ascending
  std::vector<double> states;         // path_ids.size() * dim
  std::vector<std::size_t> diverged;
  std::vector<int> diverged_step;
  /// Optional per-step ensembles: step -> n * dim (NaN rows for diverged paths).
  std::map<int, std::vector<double>> snapshots;

  std::size_t size() const { return path_ids.size(); }
};

struct SampleOptions {
  std::vector<int> record_steps;
  double divergence_budget = kDivergenceBudget;
};

/// X_1 ~ N(0, I), then for step = T..1 draw E ~ spec and apply
/// em_step with increment sqrt(h) E. Returns the grid-0 states. Path i uses
/// the stream rng.child(i). Throws DivergenceBudgetError when more than the
/// budgeted fraction of paths diverge.
SampleBatch reverse_sample(const Dynamics& dyn, const Schedule& s, const NoiseSpec& spec,
                           std::size_t n, RngState rng, const SampleOptions& options = {});

/// Forward EM for dX = -1/2 rate X dtau + sqrt(rate) dW from the rows of x0,
/// using rate(k) on the interval (tau_{k-1}, tau_k]. Returns the grid-T
/// states; record_steps adds snapshots.
SampleBatch forward_simulate(std::span<const double> x0, int dim, const Schedule& s,
                             RngState rng, const SampleOptions& options = {});

/// Fine path on s_fine and coarse path on s_fine.coarsened(r) from the same
/// X_1 and the same Gaussian increments; each coarse increment is the sum of
/// the r fine increments it covers.
PathPair coupled_paths(const Dynamics& dyn, const Schedule& s_fine, int refinement, RngState rng);

struct CoupledError {
  double sup_sq = 0.0;       // max over the coarse grid of |X_fine - X_coarse|^2
  double terminal_sq = 0.0;  // |X_fine - X_coarse|^2 at grid step 0
};

/// Streaming form of coupled_paths used by the sweeps, with the coupling
/// drawn from gen.
CoupledError coupled_error(const Dynamics& dyn, const Schedule& fine, const Schedule& coarse,
                           int refinement, Generator& gen);

}  // namespace vpsde
