// Command-line front end. Precedence: built-in defaults < --config file < flags.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "vpsde/experiments.hpp"
#include "vpsde/parallel.hpp"

namespace fs = std::filesystem;
using namespace vpsde;

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = "results";
  unsigned threads = 0;
  std::string format = "csv";
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

// Flag values that override config keys when given.
struct Overrides {
  std::string noise, h_list, d_list, t_list, scales, kind, signal, data;
  double noise_scale = 1.0, tolerance = 1e-3;
  int steps = 0, refine = 64, projections = 64;
  std::size_t n = 0, paths = 0;
  std::map<std::string, std::vector<CLI::Option*>> given;

  bool has(const std::string& name) const {
    auto it = given.find(name);
    if (it == given.end()) return false;
    for (const auto* opt : it->second)
      if (opt->count() > 0) return true;
    return false;
  }
};

template <class T>
void flag(CLI::App* cmd, Overrides& o, const std::string& name, T& target, const std::string& help) {
  o.given[name].push_back(cmd->add_option("--" + name, target, help));
}

ExperimentConfig resolve(ExperimentKind kind, const Globals& g, const Overrides& o) {
  ExperimentConfig cfg = defaults_for(kind);
  if (!g.config.empty()) {
    cfg = load_config(g.config);
    if (cfg.experiment != kind)
      throw ConfigError(g.config + ": config is for '" + std::string(to_string(cfg.experiment)) +
                        "', not '" + std::string(to_string(kind)) + "'");
  }
  if (!o.data.empty()) {
    const ExperimentConfig d = load_config(o.data, kind);
    cfg.data = d.data;
    cfg.schedule = d.schedule;
  }
  if (g.seed_opt->count()) cfg.seed = g.seed;
  if (g.out_opt->count()) cfg.out = g.out;
  if (g.threads_opt->count()) cfg.threads = g.threads;

  if (o.has("noise")) {
    cfg.families.clear();
    std::size_t start = 0;
    while (start <= o.noise.size()) {
      const auto comma = o.noise.find(',', start);
      cfg.families.push_back(parse_noise_family(o.noise.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (o.has("noise-scale")) cfg.noise_scale = o.noise_scale;
  if (o.has("scales")) cfg.scales = parse_double_list(o.scales);
  if (o.has("steps")) cfg.schedule.steps = o.steps;
  if (o.has("signal")) cfg.schedule.signal = parse_signal_model(o.signal);
  if (o.has("n")) cfg.n_paths = o.n;
  if (o.has("paths")) cfg.n_paths = o.paths;
  if (o.has("h-list")) cfg.h_list = parse_double_list(o.h_list);
  if (o.has("d-list")) cfg.d_list = parse_int_list(o.d_list);
  if (o.has("t-list")) cfg.t_list = parse_int_list(o.t_list);
  if (o.has("refine")) cfg.refine = o.refine;
  if (o.has("kind")) cfg.metric = parse_metric_kind(o.kind);
  if (o.has("projections")) cfg.projections = o.projections;
  if (o.has("tolerance")) cfg.tolerance = o.tolerance;
  cfg.noise().validate();
  (void)cfg.require_seed();
  return cfg;
}

void print_table(const CsvTable& t) {
  auto row = [](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) std::cout << (i ? "," : "") << r[i];
    std::cout << '\n';
  };
  row(t.header);
  for (const auto& r : t.rows) row(r);
}

int run_experiment_command(ExperimentKind kind, const Globals& g, const Overrides& o,
                           const std::string& dump_schedule) {
  const ExperimentConfig cfg = resolve(kind, g, o);
  set_thread_count(cfg.threads);
  const ExperimentResult result = run_experiment(cfg);
  write_result(result, cfg, cfg.out, std::string(to_string(kind)));
  if (!dump_schedule.empty())
    write_csv(dump_schedule, schedule_table(cfg.schedule.build()), csv_preamble(config_to_json(cfg)));
  if (g.format == "json") {
    Json j;
    j["experiment"] = result.experiment;
    j["summary"] = result.summary;
    j["notes"] = result.notes;
    std::cout << j.dump(2) << '\n';
  } else {
    print_table(result.table);
    for (const auto& n : result.notes) std::cerr << "note: " << n << '\n';
  }
  return 0;
}

int run_sample(const Globals& g, const Overrides& o) {
  ExperimentConfig cfg = resolve(ExperimentKind::Substitute, g, o);
  if (!o.has("noise") && g.config.empty()) cfg.families = {NoiseFamily::Gaussian};
  set_thread_count(cfg.threads);
  const auto dyn = build_dynamics(cfg.data);
  const Schedule s = cfg.schedule.build();
  const NoiseSpec spec = cfg.noise();
  const SampleBatch batch = reverse_sample(*dyn, s, spec, cfg.n_paths, RngState{*cfg.seed, 0});

  fs::path csv = g.out_opt->count() ? fs::path(g.out) : fs::path("samples.csv");
  if (csv.extension() != ".csv") csv /= "samples.csv";
  CsvTable table;
  table.header = {"path_id"};
  for (int j = 0; j < batch.dim; ++j) table.header.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::vector<std::string> row = {std::to_string(batch.path_ids[i])};
    for (int j = 0; j < batch.dim; ++j) row.push_back(format_double(batch.states[i * batch.dim + j]));
    table.rows.push_back(std::move(row));
  }
  const Json config = config_to_json(cfg);
  write_csv(csv, table, csv_preamble(config));

  Json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["config"] = config;
  meta["noise"] = spec.label();
  meta["schedule_id"] = s.id();
  meta["rng_algorithm"] = kRngAlgorithm;
  meta["n_completed"] = batch.size();
  meta["diverged"] = batch.diverged;
  meta["diverged_step"] = batch.diverged_step;
  fs::path sidecar = csv;
  write_json(sidecar.replace_extension(".json"), meta);
  std::cout << csv.string() << '\n';
  return 0;
}

int run_metric(const Globals& g, const Overrides& o, const std::string& a_path, const std::string& b_path,
               CLI::Option* bandwidth_opt, double bandwidth) {
  const SampleSet a = read_sample_csv(a_path);
  const SampleSet b = read_sample_csv(b_path);
  MetricOptions opts;
  opts.seed = g.seed;
  opts.projections = o.projections;
  if (bandwidth_opt->count()) opts.bandwidth = bandwidth;
  const MetricKind kind = parse_metric_kind(o.kind.empty() ? "w1" : o.kind);
  set_thread_count(g.threads);
  const double value = distance(kind, a, b, opts);

  Json params;
  params["seed"] = g.seed;
  if (kind == MetricKind::Sliced) params["projections"] = opts.projections;
  if (kind == MetricKind::Mmd)
    params["bandwidth"] = opts.bandwidth ? *opts.bandwidth : median_heuristic_bandwidth(a, b, g.seed);
  if (kind == MetricKind::Energy || kind == MetricKind::Mmd) params["max_points"] = opts.max_points;
  Json j;
  j["kind"] = to_string(kind);
  j["value"] = value;
  j["n_a"] = a.size();
  j["n_b"] = b.size();
  j["params"] = params;
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Maruyama sampling of the reverse VP-SDE with moment-matched noise"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Experiment config (YAML)");
  g.seed_opt = app.add_option("--seed", g.seed, "Root seed");
  g.out_opt = app.add_option("--out", g.out, "Output directory (sample: CSV path)");
  g.threads_opt = app.add_option("--threads", g.threads, "Worker threads, 0 = hardware");
  app.add_option("--format", g.format, "Stdout format")->check(CLI::IsMember({"csv", "json"}));

  Overrides o;
  std::string dump_schedule, manifest, a_path, b_path;
  double bandwidth = 0.0;
  CLI::Option* bandwidth_opt = nullptr;

  auto* sample = app.add_subcommand("sample", "Reverse-sample terminal states to CSV");
  flag(sample, o, "data", o.data, "Config file holding data and schedule blocks");
  flag(sample, o, "noise", o.noise, "Noise family");
  flag(sample, o, "noise-scale", o.noise_scale, "Noise scale alpha");
  flag(sample, o, "steps", o.steps, "Step count T");
  flag(sample, o, "signal", o.signal, "product | exponential");
  flag(sample, o, "n", o.n, "Number of paths");

  auto* converge = app.add_subcommand("converge", "Strong-error sweep over h");
  flag(converge, o, "h-list", o.h_list, "Comma list, e.g. 1/16,1/32");
  flag(converge, o, "refine", o.refine, "Fine/coarse refinement r");
  flag(converge, o, "paths", o.paths, "Monte-Carlo paths");

  auto* dims = app.add_subcommand("dims", "Strong error across dimensions at fixed h");
  flag(dims, o, "d-list", o.d_list, "Comma list of dimensions");
  flag(dims, o, "h-list", o.h_list, "Single h");
  flag(dims, o, "refine", o.refine, "Fine/coarse refinement r");
  flag(dims, o, "paths", o.paths, "Monte-Carlo paths");

  auto* substitute = app.add_subcommand("substitute", "Distance to the target across T");
  flag(substitute, o, "t-list", o.t_list, "Comma list of step counts");
  flag(substitute, o, "noise", o.noise, "Noise family");
  flag(substitute, o, "noise-scale", o.noise_scale, "Noise scale alpha");
  flag(substitute, o, "n", o.n, "Samples per T");
  flag(substitute, o, "kind", o.kind, "Metric kind");

  auto* table = app.add_subcommand("noise-table", "One row per noise family");
  flag(table, o, "noise", o.noise, "Comma list of families");
  flag(table, o, "n", o.n, "Samples per family");
  flag(table, o, "steps", o.steps, "Step count T");
  flag(table, o, "kind", o.kind, "Metric kind");
  flag(table, o, "projections", o.projections, "Sliced-W projections");

  auto* ablation = app.add_subcommand("scale-ablation", "One row per noise scale");
  flag(ablation, o, "noise", o.noise, "Noise family");
  flag(ablation, o, "scales", o.scales, "Comma list of alpha values");
  flag(ablation, o, "n", o.n, "Samples per alpha");
  flag(ablation, o, "steps", o.steps, "Step count T");
  flag(ablation, o, "kind", o.kind, "Metric kind");
  flag(ablation, o, "projections", o.projections, "Sliced-W projections");

  auto* check = app.add_subcommand("schedule-check", "Terminal signal and T-invariance");
  flag(check, o, "t-list", o.t_list, "Comma list of step counts");
  flag(check, o, "steps", o.steps, "Step count for --dump-schedule");
  flag(check, o, "signal", o.signal, "product | exponential");
  flag(check, o, "tolerance", o.tolerance, "alpha_bar(T) tolerance");
  check->add_option("--dump-schedule", dump_schedule, "Write beta, alpha_bar, std per step to CSV");

  auto* gronwall = app.add_subcommand("gronwall-selftest", "Randomized Gronwall dominance trials");

  auto* metric = app.add_subcommand("metric", "Distance between two sample CSVs");
  flag(metric, o, "kind", o.kind, "w1 | energy | mmd | sliced");
  metric->add_option("--a", a_path, "First sample CSV")->required();
  metric->add_option("--b", b_path, "Second sample CSV")->required();
  bandwidth_opt = metric->add_option("--bandwidth", bandwidth, "MMD bandwidth");
  flag(metric, o, "projections", o.projections, "Sliced-W projections");

  auto* all = app.add_subcommand("run-all", "Run a manifest of experiments with assertions");
  all->add_option("manifest", manifest, "Manifest YAML")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) return run_sample(g, o);
    if (*converge) return run_experiment_command(ExperimentKind::Converge, g, o, "");
    if (*dims) return run_experiment_command(ExperimentKind::Dims, g, o, "");
    if (*substitute) return run_experiment_command(ExperimentKind::Substitute, g, o, "");
    if (*table) return run_experiment_command(ExperimentKind::NoiseTable, g, o, "");
    if (*ablation) return run_experiment_command(ExperimentKind::ScaleAblation, g, o, "");
    if (*check) return run_experiment_command(ExperimentKind::ScheduleCheck, g, o, dump_schedule);
    if (*gronwall) return run_experiment_command(ExperimentKind::GronwallSelftest, g, o, "");
    if (*metric) return run_metric(g, o, a_path, b_path, bandwidth_opt, bandwidth);
    if (*all) {
      set_thread_count(g.threads);
      RunAllOptions opts;
      opts.out = g.out;
      if (g.seed_opt->count()) opts.seed = g.seed;
      return run_all(manifest, opts, std::cerr);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
