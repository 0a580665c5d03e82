#include "vpsde/em_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "vpsde/errors.hpp"
#include "vpsde/parallel.hpp"

namespace vpsde {

ReverseVpDynamics::ReverseVpDynamics(std::shared_ptr<const DataModel> model)
    : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("reverse dynamics needs a data model");
}

void ReverseVpDynamics::drift(const Schedule& s, int step, std::span<const double> x,
                              std::span<double> out) const {
  model_->score(x, s, step, out);
  const double rate = s.rate(step);
  const double std_t = s.marginal_std(step);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double eps = -std_t * out[j];
    out[j] = rate / std_t * eps - 0.5 * rate * x[j];
  }
}

LinearDynamics::LinearDynamics(int dim, double coefficient) : dim_(dim), coefficient_(coefficient) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
}

void LinearDynamics::drift(const Schedule&, int, std::span<const double> x,
                           std::span<double> out) const {
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = coefficient_ * x[j];
}

std::string LinearDynamics::describe() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "linear(a=%.17g)", coefficient_);
  return buf;
}

void em_step(const Dynamics& dyn, const Schedule& s, int step, std::span<const double> x,
             std::span<const double> increment, std::span<double> out) {
  if (step < 1) throw std::out_of_range("em_step requires step >= 1");
  if (x.size() != increment.size() || x.size() != out.size())
    throw std::invalid_argument("em_step: state, increment and output sizes differ");

  thread_local std::vector<double> drift;
  drift.resize(x.size());
  dyn.drift(s, step, x, drift);
  const double h = s.h();
  const double sigma = dyn.diffusion(s, step);
  bool ok = true;
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = x[j] - drift[j] * h - sigma * increment[j];
    ok = ok && std::fabs(out[j]) <= kDivergenceThreshold;  // false for NaN as well
  }
  if (!ok) throw DivergenceError(step);
}

std::vector<double> em_step(const Dynamics& dyn, const Schedule& s, int step,
                            std::span<const double> x, std::span<const double> increment) {
  std::vector<double> out(x.size());
  em_step(dyn, s, step, x, increment, out);
  return out;
}

namespace {

void init_snapshots(SampleBatch& batch, const SampleOptions& options, const Schedule& s,
                    std::size_t n, int dim) {
  for (int step : options.record_steps) {
    if (step < 0 || step > s.steps()) throw std::out_of_range("record step outside the grid");
    batch.snapshots[step].assign(n * dim, std::numeric_limits<double>::quiet_NaN());
  }
}

void record(SampleBatch& batch, int step, std::size_t path, std::span<const double> x) {
  auto it = batch.snapshots.find(step);
  if (it == batch.snapshots.end()) return;
  std::copy(x.begin(), x.end(), it->second.begin() + path * x.size());
}

// Splits per-path results into completed/diverged and applies the budget.
void finalize(SampleBatch& batch, std::size_t n, const std::vector<double>& terminal,
              const std::vector<int>& failed_at, double budget) {
  const auto d = static_cast<std::size_t>(batch.dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (failed_at[i] >= 0) {
      batch.diverged.push_back(i);
      batch.diverged_step.push_back(failed_at[i]);
      continue;
    }
    batch.path_ids.push_back(i);
    batch.states.insert(batch.states.end(), terminal.begin() + i * d, terminal.begin() + (i + 1) * d);
  }
  if (static_cast<double>(batch.diverged.size()) > budget * static_cast<double>(n))
    throw DivergenceBudgetError(std::to_string(batch.diverged.size()) + " of " +
                                std::to_string(n) + " paths diverged (first at step " +
                                std::to_string(batch.diverged_step.front()) + ")");
}

}  // namespace

SampleBatch reverse_sample(const Dynamics& dyn, const Schedule& s, const NoiseSpec& spec,
                           std::size_t n, RngState rng, const SampleOptions& options) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("reverse_sample needs n >= 1");
  const int d = dyn.dim();
  SampleBatch batch;
  batch.dim = d;
  init_snapshots(batch, options, s, n, d);

  std::vector<double> terminal(n * d);
  std::vector<int> failed_at(n, -1);
  const double sqrt_h = std::sqrt(s.h());

  parallel_for(n, [&](std::size_t i) {
    Generator gen(rng.child(i));
    std::vector<double> x(d), next(d), increment(d);
    for (double& v : x) v = gen.normal();
    record(batch, s.steps(), i, x);
    try {
      for (int step = s.steps(); step >= 1; --step) {
        fill_noise(spec, gen, increment);
        for (double& v : increment) v *= sqrt_h;
        em_step(dyn, s, step, x, increment, next);
        x.swap(next);
        record(batch, step - 1, i, x);
      }
      std::copy(x.begin(), x.end(), terminal.begin() + i * d);
    } catch (const DivergenceError& e) {
      failed_at[i] = e.step();
    }
  });

  finalize(batch, n, terminal, failed_at, options.divergence_budget);
  return batch;
}

SampleBatch forward_simulate(std::span<const double> x0, int dim, const Schedule& s, RngState rng,
                             const SampleOptions& options) {
  if (dim < 1 || x0.empty() || x0.size() % dim != 0)
    throw std::invalid_argument("forward_simulate: x0 must hold n rows of dimension dim");
  for (double v : x0)
    if (!std::isfinite(v)) throw std::invalid_argument("forward_simulate: non-finite x0");
  const std::size_t n = x0.size() / dim;
  SampleBatch batch;
  batch.dim = dim;
  init_snapshots(batch, options, s, n, dim);

  std::vector<double> terminal(n * dim);
  std::vector<int> failed_at(n, -1);
  const double h = s.h();
  const double sqrt_h = std::sqrt(h);

  parallel_for(n, [&](std::size_t i) {
    Generator gen(rng.child(i));
    std::vector<double> x(x0.begin() + i * dim, x0.begin() + (i + 1) * dim);
    record(batch, 0, i, x);
    for (int step = 1; step <= s.steps(); ++step) {
      const double rate = s.rate(step);
      const double sigma = std::sqrt(rate);
      bool ok = true;
      for (double& v : x) {
        v = v - 0.5 * rate * v * h + sigma * sqrt_h * gen.normal();
        ok = ok && std::fabs(v) <= kDivergenceThreshold;
      }
      if (!ok) {
        failed_at[i] = step;
        return;
      }
      record(batch, step, i, x);
    }
    std::copy(x.begin(), x.end(), terminal.begin() + i * dim);
  });

  finalize(batch, n, terminal, failed_at, options.divergence_budget);
  return batch;
}

namespace {

// Shared driver for the coupled fine/coarse integration. on_fine(k, x, dw)
// sees every fine update, on_coarse(k, x_fine, x_coarse, dW) every coarse one
// (k is the grid step just reached).
template <class OnFine, class OnCoarse>
void run_coupled(const Dynamics& dyn, const Schedule& fine, const Schedule& coarse, int r,
                 Generator& gen, OnFine&& on_fine, OnCoarse&& on_coarse) {
  if (r < 1 || fine.steps() != coarse.steps() * r)
    throw std::invalid_argument("fine grid must have refinement * coarse steps");
  const int d = dyn.dim();
  const double sqrt_hf = std::sqrt(fine.h());

  std::vector<double> xf(d), xc(d), next(d), dw(d), sum(d);
  for (double& v : xf) v = gen.normal();
  xc = xf;
  on_coarse(coarse.steps(), std::span<const double>(xf), std::span<const double>(xc),
            std::span<const double>());

  for (int kc = coarse.steps(); kc >= 1; --kc) {
    for (int j = 0; j < r; ++j) {
      const int kf = r * kc - j;
      for (int c = 0; c < d; ++c) {
        dw[c] = sqrt_hf * gen.normal();
        sum[c] = (j == 0) ? dw[c] : sum[c] + dw[c];
      }
      em_step(dyn, fine, kf, xf, dw, next);
      xf.swap(next);
      on_fine(kf - 1, std::span<const double>(xf), std::span<const double>(dw));
    }
    em_step(dyn, coarse, kc, xc, sum, next);
    xc.swap(next);
    on_coarse(kc - 1, std::span<const double>(xf), std::span<const double>(xc),
              std::span<const double>(sum));
  }
}

Path empty_path(const Schedule& s, int dim, RngState rng) {
  Path p;
  p.dim = dim;
  p.times.resize(s.steps() + 1);
  for (int k = 0; k <= s.steps(); ++k) p.times[k] = s.tau(k);
  p.states.assign(static_cast<std::size_t>(s.steps() + 1) * dim, 0.0);
  p.metadata = {s.id(), "gaussian", rng.seed, rng.stream};
  return p;
}

}  // namespace

PathPair coupled_paths(const Dynamics& dyn, const Schedule& s_fine, int refinement, RngState rng) {
  if (refinement < 1) throw std::invalid_argument("refinement must be >= 1");
  const Schedule coarse = s_fine.coarsened(refinement);
  const int d = dyn.dim();

  PathPair pair;
  pair.refinement = refinement;
  pair.fine = empty_path(s_fine, d, rng);
  pair.coarse = empty_path(coarse, d, rng);
  pair.fine_increments.assign(static_cast<std::size_t>(s_fine.steps()) * d, 0.0);
  pair.coarse_increments.assign(static_cast<std::size_t>(coarse.steps()) * d, 0.0);

  auto put = [d](std::vector<double>& dst, int row, std::span<const double> src) {
    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::size_t>(row) * d);
  };

  Generator gen(rng);
  bool initial = true;
  run_coupled(
      dyn, s_fine, coarse, refinement, gen,
      [&](int k, std::span<const double> x, std::span<const double> dw) {
        put(pair.fine.states, k, x);
        put(pair.fine_increments, k, dw);
      },
      [&](int k, std::span<const double> xf, std::span<const double> xc,
          std::span<const double> sum) {
        put(pair.coarse.states, k, xc);
        if (initial) {
          put(pair.fine.states, s_fine.steps(), xf);
          initial = false;
        } else {
          put(pair.coarse_increments, k, sum);
        }
      });
  return pair;
}

CoupledError coupled_error(const Dynamics& dyn, const Schedule& fine, const Schedule& coarse,
                           int refinement, Generator& gen) {
  CoupledError err;
  run_coupled(
      dyn, fine, coarse, refinement, gen, [](int, std::span<const double>, std::span<const double>) {},
      [&](int k, std::span<const double> xf, std::span<const double> xc, std::span<const double>) {
        double acc = 0.0;
        for (std::size_t j = 0; j < xf.size(); ++j) {
          const double diff = xf[j] - xc[j];
          acc += diff * diff;
        }
        err.sup_sq = std::max(err.sup_sq, acc);
        if (k == 0) err.terminal_sq = acc;
      });
  return err;
}

}  // namespace vpsde
