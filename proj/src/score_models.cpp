#include "vpsde/score_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace vpsde {

namespace {

void require_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("score evaluated at a non-finite state");
}

void require_dim(std::span<const double> x, int dim) {
  if (static_cast<int>(x.size()) != dim)
    throw std::invalid_argument("state dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(dim));
}

// Log-density and score of one diagonal component pushed forward to alpha_bar.
double component_log_density(std::span<const double> x, const DiagonalGaussian& g, double abar) {
  const double signal = std::sqrt(abar);
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double var = abar * g.variance[j] + (1.0 - abar);
    const double diff = x[j] - signal * g.mean[j];
    acc += diff * diff / var + std::log(2.0 * std::numbers::pi * var);
  }
  return -0.5 * acc;
}

void component_score(std::span<const double> x, const DiagonalGaussian& g, double abar,
                     double weight, std::span<double> out) {
  const double signal = std::sqrt(abar);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double var = abar * g.variance[j] + (1.0 - abar);
    out[j] += weight * (-(x[j] - signal * g.mean[j]) / var);
  }
}

void draw_component(const DiagonalGaussian& g, Generator& gen, std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = g.mean[j] + std::sqrt(g.variance[j]) * gen.normal();
}

}  // namespace

void DiagonalGaussian::validate() const {
  if (mean.empty()) throw std::invalid_argument("Gaussian needs at least one dimension");
  if (variance.size() != mean.size())
    throw std::invalid_argument("mean and variance sizes differ");
  for (double v : variance)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("covariance diagonal entries must be positive");
  for (double m : mean)
    if (!std::isfinite(m)) throw std::invalid_argument("mean must be finite");
}

std::vector<double> DataModel::score(std::span<const double> x, const Schedule& s,
                                     int step) const {
  std::vector<double> out(x.size());
  score(x, s, step, out);
  return out;
}

GaussianData::GaussianData(DiagonalGaussian dist) : dist_(std::move(dist)) { dist_.validate(); }

GaussianData GaussianData::isotropic(int dim, double mean, double variance) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  return GaussianData({std::vector<double>(dim, mean), std::vector<double>(dim, variance)});
}

DiagonalGaussian GaussianData::forward_marginal(const Schedule& s, int step) const {
  if (step < 1) throw std::out_of_range("forward marginal requires step >= 1");
  const double abar = s.alpha_bar(step);
  const double signal = std::sqrt(abar);
  DiagonalGaussian out = dist_;
  for (int j = 0; j < dim(); ++j) {
    out.mean[j] = signal * dist_.mean[j];
    out.variance[j] = abar * dist_.variance[j] + (1.0 - abar);
  }
  return out;
}

void GaussianData::score(std::span<const double> x, const Schedule& s, int step,
                         std::span<double> out) const {
  require_dim(x, dim());
  require_finite(x);
  std::fill(out.begin(), out.end(), 0.0);
  component_score(x, dist_, s.alpha_bar(step), 1.0, out);
}

double GaussianData::log_density(std::span<const double> x, const Schedule& s, int step) const {
  require_dim(x, dim());
  return component_log_density(x, dist_, s.alpha_bar(step));
}

void GaussianData::sample_data(Generator& gen, std::span<double> out) const {
  draw_component(dist_, gen, out);
}

GmmData::GmmData(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    c.dist.validate();
    if (c.dist.dim() != components_.front().dist.dim())
      throw std::invalid_argument("mixture components have different dimensions");
    if (!(c.weight > 0.0 && c.weight <= 1.0))
      throw std::invalid_argument("mixture weights must lie in (0, 1]");
    total += c.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
}

void GmmData::score(std::span<const double> x, const Schedule& s, int step,
                    std::span<double> out) const {
  require_dim(x, dim());
  require_finite(x);
  const double abar = s.alpha_bar(step);

  // Responsibilities in log space, shifted by the max before exponentiating.
  thread_local std::vector<double> logr;
  logr.resize(components_.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < components_.size(); ++i) {
    logr[i] = std::log(components_[i].weight) + component_log_density(x, components_[i].dist, abar);
    top = std::max(top, logr[i]);
  }
  double norm = 0.0;
  for (double& l : logr) {
    l = std::exp(l - top);
    norm += l;
  }

  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < components_.size(); ++i)
    component_score(x, components_[i].dist, abar, logr[i] / norm, out);
}

double GmmData::log_density(std::span<const double> x, const Schedule& s, int step) const {
  require_dim(x, dim());
  const double abar = s.alpha_bar(step);
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for (const auto& c : components_) {
    logs.push_back(std::log(c.weight) + component_log_density(x, c.dist, abar));
    top = std::max(top, logs.back());
  }
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - top);
  return top + std::log(acc);
}

void GmmData::sample_data(Generator& gen, std::span<double> out) const {
  const double u = gen.uniform();
  double cumulative = 0.0;
  const Component* chosen = &components_.back();
  for (const auto& c : components_) {
    cumulative += c.weight;
    if (u < cumulative) {
      chosen = &c;
      break;
    }
  }
  draw_component(chosen->dist, gen, out);
}

std::vector<DiagonalGaussian> GmmData::components() const {
  std::vector<DiagonalGaussian> out;
  for (const auto& c : components_) out.push_back(c.dist);
  return out;
}

std::vector<double> GmmData::weights() const {
  std::vector<double> out;
  for (const auto& c : components_) out.push_back(c.weight);
  return out;
}

std::vector<double> eps_from_score(std::span<const double> score, const Schedule& s, int step) {
  const double std_t = s.marginal_std(step);
  std::vector<double> out(score.size());
  for (std::size_t j = 0; j < score.size(); ++j) out[j] = -std_t * score[j];
  return out;
}

std::vector<double> score_from_eps(std::span<const double> eps, const Schedule& s, int step) {
  const double std_t = s.marginal_std(step);
  std::vector<double> out(eps.size());
  for (std::size_t j = 0; j < eps.size(); ++j) out[j] = -eps[j] / std_t;
  return out;
}

}  // namespace vpsde
