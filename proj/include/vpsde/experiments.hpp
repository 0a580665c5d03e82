#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vpsde/analysis.hpp"
#include "vpsde/config.hpp"
#include "vpsde/report_io.hpp"

namespace vpsde {

struct ExperimentResult {
  std::string experiment;
  /// Flat key -> number map; manifest assertions refer to these keys.
  Json summary = Json::object();
  std::vector<std::string> notes;
  CsvTable table;
  std::optional<ErrorReport> report;
  std::optional<CsvTable> plot;
};

ExperimentResult run_noise_table(const ExperimentConfig& cfg);
ExperimentResult run_scale_ablation(const ExperimentConfig& cfg);
ExperimentResult run_converge(const ExperimentConfig& cfg);
ExperimentResult run_dims(const ExperimentConfig& cfg);
ExperimentResult run_substitute(const ExperimentConfig& cfg);
ExperimentResult run_schedule_check(const ExperimentConfig& cfg);
ExperimentResult run_gronwall_selftest(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// beta, alpha_bar and marginal std per step of the configured schedule.
CsvTable schedule_table(const Schedule& s);

/// Writes <stem>.csv, <stem>.json and, for sweeps, <stem>_plot.csv under dir.
/// Every file carries the schema version and config_to_json(cfg).
void write_result(const ExperimentResult& result, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir, const std::string& stem);

struct Assertion {
  std::string key;
  std::optional<double> min;
  std::optional<double> max;
};

struct ManifestEntry {
  std::string name;
  std::filesystem::path config;
  std::vector<Assertion> asserts;
};

/// YAML: experiments: [{name, config, assert: [{key, min, max}]}]. Config
/// paths are relative to the manifest file.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

struct RunAllOptions {
  std::filesystem::path out = "results";
  std::optional<std::uint64_t> seed;  // overrides every config
};

/// Runs every entry, writes per-experiment outputs plus summary.md and
/// summary.json. Returns 0 iff every assertion holds and every experiment ran.
int run_all(const std::filesystem::path& manifest, const RunAllOptions& options, std::ostream& log);

}  // namespace vpsde
