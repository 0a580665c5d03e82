#include "vpsde/experiments.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "vpsde/errors.hpp"

namespace vpsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

MetricOptions metric_options(const ExperimentConfig& cfg) {
  MetricOptions o;
  o.bandwidth = cfg.bandwidth;
  o.projections = cfg.projections;
  o.seed = cfg.require_seed();
  return o;
}

SampleSet exact_draws(const DataModel& model, std::size_t n, RngState rng) {
  const int d = model.dim();
  SampleSet set{std::vector<double>(n * d), d, "exact"};
  Generator gen(rng);
  for (std::size_t i = 0; i < n; ++i)
    model.sample_data(gen, std::span<double>(set.points).subspan(i * d, d));
  return set;
}

struct SamplerRow {
  double value = kNaN;
  std::size_t diverged = 0;
  std::string failure;
};

// Shared setup of the table experiments: one reference set, one floor and
// common random numbers across rows (every row samples from the same stream).
class TableBench {
 public:
  explicit TableBench(const ExperimentConfig& cfg)
      : cfg_(cfg),
        model_(build_model(cfg.data)),
        dyn_(model_),
        schedule_(cfg.schedule.build()),
        root_{cfg.require_seed(), 0},
        opts_(metric_options(cfg)),
        reference_(target_reference(*model_, cfg.reference_n, cfg.metric, root_.child(0))) {
    floor_ = distance(cfg.metric, exact_draws(*model_, cfg.n_paths, root_.child(2)), reference_, opts_);
  }

  SamplerRow run(const NoiseSpec& spec) const {
    SamplerRow row;
    try {
      const SampleBatch batch = reverse_sample(dyn_, schedule_, spec, cfg_.n_paths, root_.child(1));
      row.diverged = batch.diverged.size();
      row.value = distance(cfg_.metric, SampleSet{batch.states, batch.dim, spec.label()}, reference_, opts_);
    } catch (const DivergenceBudgetError& e) {
      row.failure = e.what();
    }
    return row;
  }

  double floor() const { return floor_; }

 private:
  const ExperimentConfig& cfg_;
  std::shared_ptr<const DataModel> model_;
  ReverseVpDynamics dyn_;
  Schedule schedule_;
  RngState root_;
  MetricOptions opts_;
  SampleSet reference_;
  double floor_ = 0.0;
};

std::string status_of(const std::string& failure) {
  if (failure.empty()) return "ok";
  std::string s = "failed: " + failure;
  std::replace(s.begin(), s.end(), ',', ';');
  return s;
}

void add_report_summary(ExperimentResult& r, const ErrorReport& rep, bool increasing) {
  r.summary["slope"] = num(rep.fitted_slope);
  r.summary["intercept"] = num(rep.fitted_intercept);
  r.summary["r_squared"] = num(rep.r_squared);
  const TrendCheck trend = trend_check(rep, increasing);
  r.summary["inversions"] = trend.inversions;
  r.summary["large_inversions"] = trend.large_inversions;
  int failed = 0;
  for (std::size_t i = 0; i < rep.size(); ++i) {
    failed += rep.ok(i) ? 0 : 1;
    if (!rep.ok(i)) r.notes.push_back(rep.abscissa_name + " = " + format_double(rep.abscissa[i]) + ": " + rep.failures[i]);
  }
  r.summary["failed_points"] = failed;
  r.table = report_table(rep);
  r.plot = plot_table(rep.abscissa, rep.error, rep.ci_half_width);
  r.report = rep;
}

}  // namespace

ExperimentResult run_noise_table(const ExperimentConfig& cfg) {
  if (cfg.families.empty()) throw std::invalid_argument("noise-table needs at least one family");
  const TableBench bench(cfg);
  ExperimentResult r;
  r.experiment = "noise-table";

  std::map<NoiseFamily, SamplerRow> rows;
  auto row_for = [&](NoiseFamily f) -> const SamplerRow& {
    auto it = rows.find(f);
    if (it == rows.end()) it = rows.emplace(f, bench.run({f, cfg.noise_scale})).first;
    return it->second;
  };
  const double gaussian = row_for(NoiseFamily::Gaussian).value;

  r.table.header = {"family", "scale", "value", "ci_half_width", "ratio_to_gaussian", "diverged", "status"};
  std::vector<double> xs, ys, cis;
  double max_symmetric = 0.0;
  int failed = 0;
  for (std::size_t i = 0; i < cfg.families.size(); ++i) {
    const NoiseFamily f = cfg.families[i];
    const SamplerRow& row = row_for(f);
    const double ratio = row.value / gaussian;
    r.table.rows.push_back({std::string(to_string(f)), format_double(cfg.noise_scale),
                            format_double(row.value), format_double(bench.floor()),
                            format_double(ratio), std::to_string(row.diverged), status_of(row.failure)});
    xs.push_back(static_cast<double>(i));
    ys.push_back(row.value);
    cis.push_back(bench.floor());
    const std::string name(to_string(f));
    r.summary["value_" + name] = num(row.value);
    r.summary["ratio_" + name] = num(ratio);
    if (!row.failure.empty()) {
      ++failed;
      r.notes.push_back(name + ": " + row.failure);
    }
    if (f != NoiseFamily::Gaussian && f != NoiseFamily::Laplace && row.failure.empty())
      max_symmetric = std::max(max_symmetric, ratio);
    if (f == NoiseFamily::Laplace && row.failure.empty() && row.value < gaussian)
      r.notes.push_back("laplace value is below the gaussian value (soft expectation: laplace >= gaussian)");
  }
  r.summary["gaussian"] = num(gaussian);
  r.summary["floor"] = num(bench.floor());
  r.summary["max_symmetric_ratio"] = max_symmetric;
  r.summary["failed_rows"] = failed;
  r.plot = plot_table(xs, ys, cis);
  return r;
}

ExperimentResult run_scale_ablation(const ExperimentConfig& cfg) {
  if (cfg.scales.empty()) throw std::invalid_argument("scale-ablation needs noise.scales");
  if (std::find(cfg.scales.begin(), cfg.scales.end(), 1.0) == cfg.scales.end())
    throw std::invalid_argument("scale-ablation grid must include 1.0");
  const TableBench bench(cfg);
  const NoiseFamily family = cfg.families.front();
  ExperimentResult r;
  r.experiment = "scale-ablation";

  std::vector<SamplerRow> rows;
  for (double a : cfg.scales) rows.push_back(bench.run({family, a}));
  double unit = kNaN;
  std::size_t best = cfg.scales.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (cfg.scales[i] == 1.0) unit = rows[i].value;
    if (rows[i].failure.empty() && (best == cfg.scales.size() || rows[i].value < rows[best].value)) best = i;
  }

  r.table.header = {"family", "alpha", "value", "ci_half_width", "ratio_to_alpha1", "argmin", "status"};
  std::vector<double> ys, cis;
  int failed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double ratio = rows[i].value / unit;
    r.table.rows.push_back({std::string(to_string(family)), format_double(cfg.scales[i]),
                            format_double(rows[i].value), format_double(bench.floor()),
                            format_double(ratio), i == best ? "1" : "0", status_of(rows[i].failure)});
    ys.push_back(rows[i].value);
    cis.push_back(bench.floor());
    r.summary["value_" + format_double(cfg.scales[i])] = num(rows[i].value);
    r.summary["ratio_" + format_double(cfg.scales[i])] = num(ratio);
    if (!rows[i].failure.empty()) {
      ++failed;
      r.notes.push_back("alpha = " + format_double(cfg.scales[i]) + ": " + rows[i].failure);
    }
  }
  r.summary["argmin_alpha"] = best < cfg.scales.size() ? num(cfg.scales[best]) : Json(nullptr);
  r.summary["floor"] = num(bench.floor());
  r.summary["failed_rows"] = failed;
  r.plot = plot_table(cfg.scales, ys, cis);
  return r;
}

ExperimentResult run_converge(const ExperimentConfig& cfg) {
  const auto dyn = build_dynamics(cfg.data);
  const ErrorReport rep = strong_error_sweep(*dyn, cfg.schedule.params(), cfg.h_list, cfg.refine,
                                             cfg.n_paths, RngState{cfg.require_seed(), 0});
  ExperimentResult r;
  r.experiment = "converge";
  add_report_summary(r, rep, true);
  for (std::size_t i = 0; i < rep.size(); ++i)
    r.summary["error_h" + format_double(rep.abscissa[i])] = num(rep.error[i]);
  return r;
}

ExperimentResult run_dims(const ExperimentConfig& cfg) {
  if (cfg.h_list.size() != 1) throw std::invalid_argument("dims needs exactly one h in sweep.h_list");
  const DataConfig data = cfg.data;
  const ErrorReport rep = dimension_sweep([&](int d) { return build_dynamics(data, d); },
                                          cfg.schedule.params(), cfg.h_list.front(), cfg.d_list,
                                          cfg.refine, cfg.n_paths, RngState{cfg.require_seed(), 0});
  ExperimentResult r;
  r.experiment = "dims";
  add_report_summary(r, rep, true);
  std::map<int, std::size_t> by_d;
  for (std::size_t i = 0; i < rep.size(); ++i) {
    const int d = static_cast<int>(rep.abscissa[i]);
    by_d.emplace(d, i);
    r.summary["error_d" + std::to_string(d)] = num(rep.error[i]);
  }
  if (by_d.count(1) && by_d.count(4)) {
    const std::size_t one = by_d[1], four = by_d[4];
    r.summary["ratio_4_1"] = num(rep.error[four] / rep.error[one]);
    r.summary["terminal_ratio_4_1"] = num(rep.terminal_error[four] / rep.terminal_error[one]);
  }
  return r;
}

ExperimentResult run_substitute(const ExperimentConfig& cfg) {
  if (cfg.t_list.empty()) throw std::invalid_argument("substitute needs sweep.t_list");
  MetricOptions opts = metric_options(cfg);
  const ErrorReport rep =
      substitution_error_sweep(build_gaussian(cfg.data), cfg.schedule.params(), cfg.noise(), cfg.t_list,
                               cfg.n_paths, cfg.metric, RngState{cfg.require_seed(), 0}, opts);
  ExperimentResult r;
  r.experiment = "substitute";
  add_report_summary(r, rep, false);
  const auto last = std::max_element(rep.abscissa.begin(), rep.abscissa.end()) - rep.abscissa.begin();
  r.summary["final"] = num(rep.error[last]);
  r.summary["baseline_final"] = num(rep.baseline[last]);
  r.summary["floor"] = num(rep.floor);
  for (std::size_t i = 0; i < rep.size(); ++i)
    r.summary["value_T" + format_double(rep.abscissa[i])] = num(rep.error[i]);
  return r;
}

CsvTable schedule_table(const Schedule& s) {
  CsvTable t;
  t.header = {"step", "tau", "beta", "alpha_bar", "marginal_std"};
  for (int k = 0; k <= s.steps(); ++k) {
    const bool interior = k >= 1;
    double std_k = 0.0;
    if (interior) {
      try {
        std_k = s.marginal_std(k);
      } catch (const SingularTimeError&) {
        std_k = 0.0;
      }
    }
    t.rows.push_back({std::to_string(k), format_double(s.tau(k)),
                      interior ? format_double(s.beta_at(k)) : "nan", format_double(s.alpha_bar(k)),
                      format_double(std_k)});
  }
  return t;
}

ExperimentResult run_schedule_check(const ExperimentConfig& cfg) {
  if (cfg.t_list.empty()) throw std::invalid_argument("schedule-check needs sweep.t_list");
  ExperimentResult r;
  r.experiment = "schedule-check";
  r.table.header = {"T", "alpha_bar_T", "alpha_bar_2T", "relative_gap", "t_invariant", "passed",
                    "max_sigma_jump", "lipschitz_k"};
  const ScheduleParams params = cfg.schedule.params();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, worst_gap = 0.0;
  bool all_passed = true;
  std::vector<double> xs, ys, cis;
  for (int t : cfg.t_list) {
    const TerminalSignalReport rep = terminal_signal_check(params.at(t), cfg.tolerance);
    r.table.rows.push_back({std::to_string(t), format_double(rep.alpha_bar_T),
                            format_double(rep.alpha_bar_2T), format_double(rep.relative_gap),
                            rep.t_invariant ? "1" : "0", rep.passed ? "1" : "0",
                            format_double(rep.max_sigma_jump), format_double(rep.lipschitz_k)});
    lo = std::min(lo, rep.alpha_bar_T);
    hi = std::max(hi, rep.alpha_bar_T);
    worst_gap = std::max(worst_gap, rep.relative_gap);
    all_passed = all_passed && rep.passed;
    xs.push_back(t);
    ys.push_back(rep.alpha_bar_T);
    cis.push_back(0.0);
  }
  r.summary["max_alpha_bar"] = hi;
  r.summary["min_alpha_bar"] = lo;
  r.summary["spread"] = (hi - lo) / lo;
  r.summary["max_doubling_gap"] = worst_gap;
  r.summary["all_below_tolerance"] = all_passed ? 1 : 0;
  r.plot = plot_table(xs, ys, cis);
  return r;
}

ExperimentResult run_gronwall_selftest(const ExperimentConfig& cfg) {
  const GronwallSelftest g =
      gronwall_selftest(cfg.discrete_trials, cfg.continuous_trials, RngState{cfg.require_seed(), 0});
  ExperimentResult r;
  r.experiment = "gronwall-selftest";
  r.table.header = {"version", "trials", "failures", "worst_ratio"};
  r.table.rows.push_back({"discrete", std::to_string(g.discrete_trials), std::to_string(g.discrete_failures),
                          format_double(g.worst_discrete_ratio)});
  r.table.rows.push_back({"continuous", std::to_string(g.continuous_trials),
                          std::to_string(g.continuous_failures), format_double(g.worst_continuous_ratio)});
  r.summary["discrete_failures"] = g.discrete_failures;
  r.summary["continuous_failures"] = g.continuous_failures;
  r.summary["worst_discrete_ratio"] = g.worst_discrete_ratio;
  r.summary["worst_continuous_ratio"] = g.worst_continuous_ratio;
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::NoiseTable: return run_noise_table(cfg);
    case ExperimentKind::ScaleAblation: return run_scale_ablation(cfg);
    case ExperimentKind::Converge: return run_converge(cfg);
    case ExperimentKind::Dims: return run_dims(cfg);
    case ExperimentKind::Substitute: return run_substitute(cfg);
    case ExperimentKind::ScheduleCheck: return run_schedule_check(cfg);
    case ExperimentKind::GronwallSelftest: return run_gronwall_selftest(cfg);
  }
  throw std::invalid_argument("unknown experiment");
}

void write_result(const ExperimentResult& result, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir, const std::string& stem) {
  const Json config = config_to_json(cfg);
  const auto preamble = csv_preamble(config);
  write_csv(dir / (stem + ".csv"), result.table, preamble);
  if (result.plot) write_csv(dir / (stem + "_plot.csv"), *result.plot, preamble);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = result.experiment;
  j["config"] = config;
  j["summary"] = result.summary;
  j["notes"] = result.notes;
  j["table"] = {{"header", result.table.header}, {"rows", result.table.rows}};
  if (result.report) j["report"] = report_to_json(*result.report);
  write_json(dir / (stem + ".json"), j);
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  const std::string src = path.string();
  auto fail = [&](const YAML::Node& n, const std::string& msg) -> ConfigError {
    return ConfigError(src + ":" + std::to_string(n.Mark().line + 1) + ": " + msg);
  };
  YAML::Node root;
  try {
    root = YAML::LoadFile(src);
  } catch (const YAML::BadFile&) {
    throw ConfigError(src + ":0: cannot open manifest");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(src + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  std::vector<ManifestEntry> entries;
  if (root.IsNull()) return entries;
  if (!root.IsMap()) throw fail(root, "manifest must be a mapping");
  const auto list = root["experiments"];
  if (!list || list.IsNull()) return entries;
  if (!list.IsSequence()) throw fail(list, "'experiments' must be a list");
  const auto base = path.parent_path();
  for (const auto& e : list) {
    if (!e.IsMap() || !e["config"]) throw fail(e, "each experiment needs a 'config' path");
    ManifestEntry entry;
    entry.config = base / e["config"].as<std::string>();
    entry.name = e["name"] ? e["name"].as<std::string>() : entry.config.stem().string();
    if (const auto asserts = e["assert"]) {
      if (!asserts.IsSequence()) throw fail(asserts, "'assert' must be a list");
      for (const auto& a : asserts) {
        if (!a.IsMap() || !a["key"]) throw fail(a, "each assertion needs a 'key'");
        Assertion as{a["key"].as<std::string>(), std::nullopt, std::nullopt};
        try {
          if (a["min"]) as.min = parse_fraction(a["min"].Scalar());
          if (a["max"]) as.max = parse_fraction(a["max"].Scalar());
        } catch (const std::invalid_argument& ex) {
          throw fail(a, ex.what());
        }
        if (!as.min && !as.max) throw fail(a, "assertion '" + as.key + "' has neither min nor max");
        entry.asserts.push_back(as);
      }
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

namespace {

std::string bound_text(const Assertion& a) {
  if (a.min && a.max) return "[" + format_double(*a.min) + ", " + format_double(*a.max) + "]";
  if (a.min) return ">= " + format_double(*a.min);
  return "<= " + format_double(*a.max);
}

}  // namespace

int run_all(const std::filesystem::path& manifest, const RunAllOptions& options, std::ostream& log) {
  const auto entries = load_manifest(manifest);
  Json runs = Json::array();
  std::string md = "# Summary\n\n| experiment | check | value | bound | status |\n|---|---|---|---|---|\n";
  bool all_ok = true;

  for (const auto& entry : entries) {
    Json run;
    run["name"] = entry.name;
    Json checks = Json::array();
    try {
      ExperimentConfig cfg = load_config(entry.config);
      if (options.seed) cfg.seed = options.seed;
      run["experiment"] = to_string(cfg.experiment);
      log << "running " << entry.name << " (" << to_string(cfg.experiment) << ")\n";
      const ExperimentResult result = run_experiment(cfg);
      write_result(result, cfg, options.out, entry.name);
      run["summary"] = result.summary;
      run["notes"] = result.notes;
      for (const auto& a : entry.asserts) {
        double value = kNaN;
        if (result.summary.contains(a.key) && result.summary[a.key].is_number())
          value = result.summary[a.key].get<double>();
        const bool ok = std::isfinite(value) && (!a.min || value >= *a.min) && (!a.max || value <= *a.max);
        all_ok = all_ok && ok;
        checks.push_back({{"key", a.key}, {"value", num(value)}, {"bound", bound_text(a)}, {"passed", ok}});
        md += "| " + entry.name + " | " + a.key + " | " + format_double(value) + " | " + bound_text(a) +
              " | " + (ok ? "pass" : "FAIL") + " |\n";
        if (!ok) log << "  FAIL " << entry.name << ": " << a.key << " = " << format_double(value) << " not "
                     << bound_text(a) << "\n";
      }
      if (entry.asserts.empty()) md += "| " + entry.name + " | (none) | | | ran |\n";
    } catch (const std::exception& e) {
      all_ok = false;
      run["error"] = e.what();
      md += "| " + entry.name + " | run | | | FAIL: " + std::string(e.what()) + " |\n";
      log << "  FAIL " << entry.name << ": " << e.what() << "\n";
    }
    run["assertions"] = checks;
    runs.push_back(run);
  }

  Json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["passed"] = all_ok;
  summary["experiments"] = runs;
  write_json(options.out / "summary.json", summary);
  md += std::string("\n") + (all_ok ? "All checks passed.\n" : "Some checks failed.\n");
  std::filesystem::create_directories(options.out);
  std::ofstream(options.out / "summary.md", std::ios::binary) << md;
  return all_ok ? 0 : 1;
}

}  // namespace vpsde
