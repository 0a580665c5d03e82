#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "vpsde/config.hpp"
#include "vpsde/experiments.hpp"
#include "vpsde/report_io.hpp"

using namespace vpsde;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("vpsde_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(std::string_view yaml) {
  try {
    parse_config(yaml, "exp.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing fills defaults and overrides") {
  const auto cfg = parse_config(
      "experiment: converge\n"
      "seed: 5\n"
      "schedule: {T: 100, signal: exponential}\n"
      "sweep: {h_list: [1/16, 0.03125], refine: 8}\n");
  CHECK(cfg.experiment == ExperimentKind::Converge);
  CHECK(cfg.require_seed() == 5);
  CHECK(cfg.schedule.steps == 100);
  CHECK(cfg.schedule.signal == SignalModel::ContinuousExponential);
  CHECK(cfg.h_list == std::vector<double>{0.0625, 0.03125});
  CHECK(cfg.refine == 8);
  CHECK(cfg.n_paths == defaults_for(ExperimentKind::Converge).n_paths);
}

TEST_CASE("config errors carry file and line") {
  CHECK(error_of("experiment: converge\nseed: 1\nbogus: 3\n").find("exp.yaml:3:") == 0);
  CHECK(error_of("experiment: converge\nseed: 1\nschedule:\n  T: abc\n").find("exp.yaml:4:") == 0);
  CHECK(error_of("experiment: unknown\n").find("exp.yaml:1:") == 0);
  CHECK(error_of("experiment: converge\nnoise: {family: cauchy}\n").find("exp.yaml:2:") == 0);
  CHECK(error_of("seed: 1\n").find("exp.yaml") == 0);
  CHECK_THROWS_AS(parse_config("experiment: converge\n").require_seed(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/file.yaml"), ConfigError);
}

TEST_CASE("fractions and lists") {
  CHECK(parse_fraction("1/16") == 0.0625);
  CHECK(parse_fraction("0.25") == 0.25);
  CHECK_THROWS(parse_fraction("1/0"));
  CHECK_THROWS(parse_fraction("x"));
  CHECK(parse_int_list("1,4,16") == std::vector<int>{1, 4, 16});
  CHECK(parse_double_list("0.5,1") == std::vector<double>{0.5, 1.0});
}

TEST_CASE("embedded config leaves out the output directory and thread count") {
  auto cfg = parse_config("experiment: substitute\nseed: 3\nout: somewhere\nthreads: 4\n");
  const auto j = config_to_json(cfg);
  CHECK_FALSE(j.contains("out"));
  CHECK_FALSE(j.contains("threads"));
  CHECK(j.at("seed") == 3);
  cfg.threads = 1;
  cfg.out = "elsewhere";
  CHECK(config_to_json(cfg) == j);
}

TEST_CASE("doubles format and parse exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) CHECK(parse_double(format_double(v)) == v);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(std::isnan(parse_double("nan")));
  CHECK(std::isinf(parse_double("inf")));
}

TEST_CASE("report JSON round trip") {
  ErrorReport r;
  r.kind = "strong";
  r.abscissa_name = "h";
  r.abscissa = {0.0625, 0.03125, 0.015625};
  r.error = {0.1, std::numeric_limits<double>::quiet_NaN(), 0.025};
  r.ci_half_width = {0.01, std::numeric_limits<double>::quiet_NaN(), 0.002};
  r.failures = {"", "3 of 100 paths diverged", ""};
  r.terminal_error = {0.05, std::numeric_limits<double>::quiet_NaN(), 0.01};
  r.fitted_slope = 1.0 / 3.0;
  r.fitted_intercept = -0.7;
  r.r_squared = 0.99;
  r.n_paths = 100;
  const auto j = report_to_json(r);
  CHECK(j.at("error").at(1).is_null());
  CHECK(same_report(r, report_from_json(j)));
  CHECK(same_report(r, report_from_json(Json::parse(j.dump()))));

  ErrorReport other = r;
  other.error[0] = 0.2;
  CHECK_FALSE(same_report(r, other));
}

TEST_CASE("CSV round trip with preamble") {
  TempDir dir("csv");
  CsvTable t{{"a", "b"}, {{"1", "0.5"}, {"2", "nan"}}};
  const std::vector<std::string> pre = csv_preamble(Json{{"seed", 1}});
  write_csv(dir.path / "t.csv", t, pre);
  const auto text = read_text(dir.path / "t.csv");
  CHECK(text.rfind("# schema_version: 1\n# config: {\"seed\":1}\n", 0) == 0);
  const auto back = read_csv(dir.path / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);

  write_text(dir.path / "s.csv", "path_id,x0,x1\n0,1.5,2\n1,-1,0.25\n");
  const auto s = read_sample_csv(dir.path / "s.csv");
  CHECK(s.dim == 2);
  CHECK(s.points == std::vector<double>{1.5, 2.0, -1.0, 0.25});
}

TEST_CASE("noise table with a single Gaussian family") {
  auto cfg = parse_config(
      "experiment: noise-table\nseed: 2\nn_paths: 500\nschedule: {T: 30}\n"
      "noise: {families: [gaussian]}\nmetric: {kind: sliced, projections: 8, reference_n: 1000}\n");
  const auto res = run_noise_table(cfg);
  CHECK(res.table.rows.size() == 1);
  CHECK(res.summary.at("ratio_gaussian").get<double>() == 1.0);

  cfg.families = {NoiseFamily::Uniform, NoiseFamily::Uniform};
  const auto twin = run_noise_table(cfg);
  REQUIRE(twin.table.rows.size() == 2);
  CHECK(twin.table.rows[0] == twin.table.rows[1]);
}

TEST_CASE("scale ablation on a one-point grid") {
  const auto cfg = parse_config(
      "experiment: scale-ablation\nseed: 2\nn_paths: 500\nschedule: {T: 30}\n"
      "noise: {scales: [1.0]}\nmetric: {kind: sliced, projections: 8, reference_n: 1000}\n");
  const auto res = run_scale_ablation(cfg);
  CHECK(res.table.rows.size() == 1);
  CHECK(res.summary.at("argmin_alpha").get<double>() == 1.0);
}

TEST_CASE("schedule table has one row per grid step") {
  const auto t = schedule_table(Schedule::linear_scaled(100, 0.1, 20.0));
  CHECK(t.rows.size() == 101);
}

TEST_CASE("run_all with an empty manifest") {
  TempDir dir("empty");
  write_text(dir.path / "m.yaml", "experiments: []\n");
  std::ostringstream log;
  CHECK(run_all(dir.path / "m.yaml", {dir.path / "out", std::nullopt}, log) == 0);
  CHECK(fs::exists(dir.path / "out" / "summary.md"));
  CHECK(fs::exists(dir.path / "out" / "summary.json"));
}

TEST_CASE("run_all reports a failing assertion") {
  TempDir dir("failing");
  write_text(dir.path / "g.yaml", "experiment: gronwall-selftest\nseed: 1\ngronwall: {discrete_trials: 10, continuous_trials: 2}\n");
  write_text(dir.path / "m.yaml",
             "experiments:\n  - name: g\n    config: g.yaml\n    assert:\n      - {key: discrete_failures, min: 1}\n");
  std::ostringstream log;
  CHECK(run_all(dir.path / "m.yaml", {dir.path / "out", std::nullopt}, log) != 0);
  CHECK(read_text(dir.path / "out" / "summary.md").find("FAIL") != std::string::npos);
  CHECK(fs::exists(dir.path / "out" / "g.json"));

  write_text(dir.path / "m2.yaml", "experiments:\n  - {name: g, config: missing.yaml}\n");
  CHECK(run_all(dir.path / "m2.yaml", {dir.path / "out2", std::nullopt}, log) != 0);
}
