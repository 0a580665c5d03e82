#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vpsde/em_solver.hpp"
#include "vpsde/metrics.hpp"
#include "vpsde/noise.hpp"
#include "vpsde/report_io.hpp"
#include "vpsde/schedule.hpp"
#include "vpsde/score_models.hpp"

namespace vpsde {

enum class ExperimentKind {
  NoiseTable,
  ScaleAblation,
  Converge,
  Dims,
  Substitute,
  ScheduleCheck,
  GronwallSelftest,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

/// A config problem, located as "file:line: message".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::LinearScaled;
  int steps = 1000;
  double b_min = 0.1;
  double b_max = 20.0;
  SignalModel signal = SignalModel::DiscreteProduct;

  ScheduleParams params() const { return {b_min, b_max, signal}; }
  Schedule build() const { return params().at(steps); }
};

struct DataConfig {
  std::string kind = "gaussian";  // gaussian | gmm | linear
  std::vector<double> mean{0.0};
  std::vector<double> variance{1.0};
  std::vector<GmmData::Component> components;
  double coefficient = 1.0;  // linear: drift a x
  int dim = 1;               // linear only

  int data_dim() const;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Substitute;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  unsigned threads = 0;
  std::size_t n_paths = 2000;

  ScheduleConfig schedule;
  DataConfig data;

  std::vector<NoiseFamily> families{NoiseFamily::Gaussian};
  double noise_scale = 1.0;
  std::vector<double> scales;

  MetricKind metric = MetricKind::Wasserstein1;
  std::optional<double> bandwidth;
  int projections = 64;
  std::size_t reference_n = 200000;

  std::vector<double> h_list;
  std::vector<int> d_list;
  std::vector<int> t_list;
  int refine = 64;

  int discrete_trials = 1000;
  int continuous_trials = 100;
  double tolerance = 1e-3;

  std::uint64_t require_seed() const;
  NoiseSpec noise() const { return {families.front(), noise_scale}; }
};

/// Settings that reproduce the reference experiment of each kind.
ExperimentConfig defaults_for(ExperimentKind kind);

/// Parses a YAML experiment file on top of defaults_for(experiment). Files
/// without an 'experiment' key are accepted only when a fallback is given.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<ExperimentKind> fallback = std::nullopt);
ExperimentConfig parse_config(std::string_view yaml_text, const std::string& source = "<string>",
                              std::optional<ExperimentKind> fallback = std::nullopt);

/// Resolved config for output metadata. The output directory and thread
/// count do not influence results and are left out.
Json config_to_json(const ExperimentConfig& cfg);

/// Accepts "0.0625" or "1/16".
double parse_fraction(std::string_view text);
std::vector<double> parse_double_list(std::string_view csv);
std::vector<int> parse_int_list(std::string_view csv);

std::shared_ptr<const DataModel> build_model(const DataConfig& data);
std::shared_ptr<const GaussianData> build_gaussian(const DataConfig& data);
/// Dynamics of the configured model; dim > 0 replicates coordinate 0 of an
/// isotropic Gaussian (or sizes the linear model) to that dimension.
std::shared_ptr<const Dynamics> build_dynamics(const DataConfig& data, int dim = 0);

}  // namespace vpsde
