#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vpsde/rng.hpp"
#include "vpsde/schedule.hpp"

namespace vpsde {

/// Axis-aligned Gaussian: mean and per-coordinate variance.
struct DiagonalGaussian {
  std::vector<double> mean;
  std::vector<double> variance;

  int dim() const { return static_cast<int>(mean.size()); }
  /// Throws std::invalid_argument on size mismatch or non-positive variance.
  void validate() const;
};

/// Analytic data distribution with closed-form scores of its VP forward
/// marginals; stands in for a trained noise-prediction network.
class DataModel {
 public:
  virtual ~DataModel() = default;

  virtual int dim() const = 0;

  /// grad_x log p_step(x), where p_step is the forward marginal at the grid
  /// step (alpha_bar(step) from the schedule). Throws on non-finite x.
  virtual void score(std::span<const double> x, const Schedule& s, int step,
                     std::span<double> out) const = 0;

  virtual double log_density(std::span<const double> x, const Schedule& s, int step) const = 0;

  /// One exact draw from the data distribution.
  virtual void sample_data(Generator& gen, std::span<double> out) const = 0;

  /// Mixture view of the data distribution; a Gaussian is one component.
  virtual std::vector<DiagonalGaussian> components() const = 0;
  virtual std::vector<double> weights() const = 0;

  std::vector<double> score(std::span<const double> x, const Schedule& s, int step) const;
};

class GaussianData final : public DataModel {
 public:
  explicit GaussianData(DiagonalGaussian dist);
  static GaussianData isotropic(int dim, double mean, double variance);

  using DataModel::score;

  int dim() const override { return dist_.dim(); }
  const DiagonalGaussian& distribution() const { return dist_; }

  /// (sqrt(abar) mu0, abar Sigma0 + (1 - abar) I) at the given step.
  DiagonalGaussian forward_marginal(const Schedule& s, int step) const;

  void score(std::span<const double> x, const Schedule& s, int step,
             std::span<double> out) const override;
  double log_density(std::span<const double> x, const Schedule& s, int step) const override;
  void sample_data(Generator& gen, std::span<double> out) const override;
  std::vector<DiagonalGaussian> components() const override { return {dist_}; }
  std::vector<double> weights() const override { return {1.0}; }

 private:
  DiagonalGaussian dist_;
};

class GmmData final : public DataModel {
 public:
  struct Component {
    double weight;
    DiagonalGaussian dist;
  };

  /// Requires >= 1 component, equal dimensions, weights in (0, 1] summing to
  /// 1 within 1e-12.
  explicit GmmData(std::vector<Component> components);

  using DataModel::score;

  int dim() const override { return components_.front().dist.dim(); }
  const std::vector<Component>& mixture() const { return components_; }

  void score(std::span<const double> x, const Schedule& s, int step,
             std::span<double> out) const override;
  double log_density(std::span<const double> x, const Schedule& s, int step) const override;
  void sample_data(Generator& gen, std::span<double> out) const override;
  std::vector<DiagonalGaussian> components() const override;
  std::vector<double> weights() const override;

 private:
  std::vector<Component> components_;
};

/// Noise prediction from a score: eps = -marginal_std(step) * score.
std::vector<double> eps_from_score(std::span<const double> score, const Schedule& s, int step);
/// Inverse of eps_from_score.
std::vector<double> score_from_eps(std::span<const double> eps, const Schedule& s, int step);

}  // namespace vpsde
