#include "vpsde/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace vpsde {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::NoiseTable: return "noise-table";
    case ExperimentKind::ScaleAblation: return "scale-ablation";
    case ExperimentKind::Converge: return "converge";
    case ExperimentKind::Dims: return "dims";
    case ExperimentKind::Substitute: return "substitute";
    case ExperimentKind::ScheduleCheck: return "schedule-check";
    case ExperimentKind::GronwallSelftest: return "gronwall-selftest";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::NoiseTable, ExperimentKind::ScaleAblation, ExperimentKind::Converge,
                 ExperimentKind::Dims, ExperimentKind::Substitute, ExperimentKind::ScheduleCheck,
                 ExperimentKind::GronwallSelftest})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

int DataConfig::data_dim() const {
  if (kind == "linear") return dim;
  if (kind == "gmm") return components.empty() ? 0 : components.front().dist.dim();
  return static_cast<int>(mean.size());
}

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) throw ConfigError("a seed is required (config key 'seed' or --seed)");
  return *seed;
}

namespace {

std::vector<GmmData::Component> default_gmm() {
  return {{0.5, {{-1.5, 0.0}, {0.25, 0.25}}}, {0.5, {{1.5, 0.0}, {0.25, 0.25}}}};
}

std::vector<double> dyadic_h_list() {
  std::vector<double> h;
  for (int t = 16; t <= 512; t *= 2) h.push_back(1.0 / t);
  return h;
}

}  // namespace

ExperimentConfig defaults_for(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::NoiseTable:
    case ExperimentKind::ScaleAblation:
      c.schedule.steps = 200;
      c.data.kind = "gmm";
      c.data.components = default_gmm();
      c.n_paths = 50000;
      c.metric = MetricKind::Sliced;
      if (kind == ExperimentKind::NoiseTable) {
        c.families.assign(kAllNoiseFamilies.begin(), kAllNoiseFamilies.end());
      } else {
        c.families = {NoiseFamily::Rademacher};
        c.scales = {0.1, 0.2, 0.4, 0.5, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.5};
      }
      break;
    case ExperimentKind::Converge:
    case ExperimentKind::Dims:
      c.schedule.signal = SignalModel::ContinuousExponential;
      c.data.mean = {3.0};
      c.data.variance = {0.25};
      c.n_paths = 2000;
      if (kind == ExperimentKind::Converge) {
        c.h_list = dyadic_h_list();
      } else {
        c.h_list = {1.0 / 128};
        c.d_list = {1, 4, 16, 64};
      }
      break;
    case ExperimentKind::Substitute:
      c.schedule.signal = SignalModel::ContinuousExponential;
      c.data.mean = {3.0};
      c.data.variance = {1.0};
      c.families = {NoiseFamily::Rademacher};
      c.t_list = {8, 32, 128, 512};
      c.n_paths = 50000;
      break;
    case ExperimentKind::ScheduleCheck:
      c.t_list = {500, 1000, 2000};
      break;
    case ExperimentKind::GronwallSelftest:
      break;
  }
  return c;
}

double parse_fraction(std::string_view text) {
  auto parse = [&](std::string_view s) {
    double v = 0.0;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
      throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse(text);
  const double den = parse(text.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return parse(text.substr(0, slash)) / den;
}

std::vector<double> parse_double_list(std::string_view csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const auto item = csv.substr(start, comma == std::string_view::npos ? csv.size() - start : comma - start);
    out.push_back(parse_fraction(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<int> parse_int_list(std::string_view csv) {
  std::vector<int> out;
  for (double v : parse_double_list(csv)) {
    if (v != std::floor(v)) throw std::invalid_argument("expected integers in '" + std::string(csv) + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const auto mark = node.Mark();
    const int line = mark.line >= 0 ? mark.line + 1 : 0;
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                  const std::string& where) const {
    if (!map.IsMap()) fail(map, where + " must be a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      if (!known) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "invalid value '" + node.Scalar() + "' for " + what);
    }
  }

  double number(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a number");
    try {
      return parse_fraction(node.Scalar());
    } catch (const std::invalid_argument&) {
      fail(node, "invalid number '" + node.Scalar() + "' for " + what);
    }
  }

  std::vector<double> numbers(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + " must be a list");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(number(item, what));
    return out;
  }

  std::vector<int> integers(const YAML::Node& node, const std::string& what) const {
    std::vector<int> out;
    for (double v : numbers(node, what)) {
      if (v != std::floor(v)) fail(node, what + " must hold integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  template <class F>
  auto parsed(const YAML::Node& node, const std::string& what, F&& parse) const {
    const auto text = scalar<std::string>(node, what);
    try {
      return parse(text);
    } catch (const std::invalid_argument& e) {
      fail(node, e.what());
    }
  }

 private:
  std::string source_;
};

void read_schedule(const Reader& r, const YAML::Node& n, ScheduleConfig& s) {
  r.check_keys(n, {"kind", "T", "b_min", "b_max", "signal"}, "schedule");
  if (n["kind"]) s.kind = r.parsed(n["kind"], "schedule.kind", parse_schedule_kind);
  if (n["T"]) s.steps = r.scalar<int>(n["T"], "schedule.T");
  if (n["b_min"]) s.b_min = r.number(n["b_min"], "schedule.b_min");
  if (n["b_max"]) s.b_max = r.number(n["b_max"], "schedule.b_max");
  if (n["signal"]) s.signal = r.parsed(n["signal"], "schedule.signal", parse_signal_model);
  try {
    (void)s.build();
  } catch (const std::exception& e) {
    r.fail(n, std::string("invalid schedule: ") + e.what());
  }
}

void read_data(const Reader& r, const YAML::Node& n, DataConfig& d) {
  r.check_keys(n, {"kind", "mean", "variance", "components", "coefficient", "dim"}, "data");
  if (n["kind"]) {
    d.kind = r.scalar<std::string>(n["kind"], "data.kind");
    if (d.kind != "gaussian" && d.kind != "gmm" && d.kind != "linear")
      r.fail(n["kind"], "data.kind must be gaussian, gmm or linear");
  }
  if (n["mean"]) d.mean = r.numbers(n["mean"], "data.mean");
  if (n["variance"]) d.variance = r.numbers(n["variance"], "data.variance");
  if (n["coefficient"]) d.coefficient = r.number(n["coefficient"], "data.coefficient");
  if (n["dim"]) d.dim = r.scalar<int>(n["dim"], "data.dim");
  if (n["components"]) {
    const auto& list = n["components"];
    if (!list.IsSequence()) r.fail(list, "data.components must be a list");
    d.components.clear();
    for (const auto& c : list) {
      r.check_keys(c, {"weight", "mean", "variance"}, "data.components entry");
      if (!c["weight"] || !c["mean"] || !c["variance"])
        r.fail(c, "each component needs weight, mean and variance");
      d.components.push_back({r.number(c["weight"], "weight"),
                              {r.numbers(c["mean"], "mean"), r.numbers(c["variance"], "variance")}});
    }
  }
  try {
    (void)build_dynamics(d);
  } catch (const std::exception& e) {
    r.fail(n, std::string("invalid data block: ") + e.what());
  }
}

void read_noise(const Reader& r, const YAML::Node& n, ExperimentConfig& c) {
  r.check_keys(n, {"families", "family", "scale", "scales"}, "noise");
  if (n["family"]) c.families = {r.parsed(n["family"], "noise.family", parse_noise_family)};
  if (n["families"]) {
    if (!n["families"].IsSequence()) r.fail(n["families"], "noise.families must be a list");
    c.families.clear();
    for (const auto& f : n["families"]) c.families.push_back(r.parsed(f, "noise.families", parse_noise_family));
    if (c.families.empty()) r.fail(n["families"], "noise.families is empty");
  }
  if (n["scale"]) {
    c.noise_scale = r.number(n["scale"], "noise.scale");
    if (!(c.noise_scale > 0.0)) r.fail(n["scale"], "noise.scale must be positive");
  }
  if (n["scales"]) {
    c.scales = r.numbers(n["scales"], "noise.scales");
    for (double a : c.scales)
      if (!(a > 0.0)) r.fail(n["scales"], "noise.scales must be positive");
  }
}

void read_metric(const Reader& r, const YAML::Node& n, ExperimentConfig& c) {
  r.check_keys(n, {"kind", "bandwidth", "projections", "reference_n"}, "metric");
  if (n["kind"]) c.metric = r.parsed(n["kind"], "metric.kind", parse_metric_kind);
  if (n["bandwidth"]) {
    c.bandwidth = r.number(n["bandwidth"], "metric.bandwidth");
    if (!(*c.bandwidth > 0.0)) r.fail(n["bandwidth"], "metric.bandwidth must be positive");
  }
  if (n["projections"]) c.projections = r.scalar<int>(n["projections"], "metric.projections");
  if (n["reference_n"]) c.reference_n = r.scalar<std::size_t>(n["reference_n"], "metric.reference_n");
}

void read_sweep(const Reader& r, const YAML::Node& n, ExperimentConfig& c) {
  r.check_keys(n, {"h_list", "d_list", "t_list", "refine"}, "sweep");
  if (n["h_list"]) c.h_list = r.numbers(n["h_list"], "sweep.h_list");
  if (n["d_list"]) c.d_list = r.integers(n["d_list"], "sweep.d_list");
  if (n["t_list"]) c.t_list = r.integers(n["t_list"], "sweep.t_list");
  if (n["refine"]) c.refine = r.scalar<int>(n["refine"], "sweep.refine");
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text, const std::string& source,
                              std::optional<ExperimentKind> fallback) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  const Reader r(source);
  if (!root.IsMap()) r.fail(root, "config must be a mapping");
  r.check_keys(root,
               {"experiment", "seed", "out", "threads", "n_paths", "schedule", "data", "noise",
                "metric", "sweep", "gronwall", "check"},
               "config");
  if (!root["experiment"] && !fallback) r.fail(root, "missing key 'experiment'");
  ExperimentConfig c = defaults_for(root["experiment"]
                                        ? r.parsed(root["experiment"], "experiment", parse_experiment_kind)
                                        : *fallback);

  if (root["seed"]) c.seed = r.scalar<std::uint64_t>(root["seed"], "seed");
  if (root["out"]) c.out = r.scalar<std::string>(root["out"], "out");
  if (root["threads"]) c.threads = r.scalar<unsigned>(root["threads"], "threads");
  if (root["n_paths"]) c.n_paths = r.scalar<std::size_t>(root["n_paths"], "n_paths");
  if (root["schedule"]) read_schedule(r, root["schedule"], c.schedule);
  if (root["data"]) read_data(r, root["data"], c.data);
  if (root["noise"]) read_noise(r, root["noise"], c);
  if (root["metric"]) read_metric(r, root["metric"], c);
  if (root["sweep"]) read_sweep(r, root["sweep"], c);
  if (const auto g = root["gronwall"]) {
    r.check_keys(g, {"discrete_trials", "continuous_trials"}, "gronwall");
    if (g["discrete_trials"]) c.discrete_trials = r.scalar<int>(g["discrete_trials"], "discrete_trials");
    if (g["continuous_trials"])
      c.continuous_trials = r.scalar<int>(g["continuous_trials"], "continuous_trials");
  }
  if (const auto k = root["check"]) {
    r.check_keys(k, {"tolerance"}, "check");
    if (k["tolerance"]) c.tolerance = r.number(k["tolerance"], "check.tolerance");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ":0: cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), fallback);
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["n_paths"] = c.n_paths;
  j["schedule"] = {{"kind", to_string(c.schedule.kind)},
                   {"T", c.schedule.steps},
                   {"b_min", c.schedule.b_min},
                   {"b_max", c.schedule.b_max},
                   {"signal", to_string(c.schedule.signal)}};
  Json data;
  data["kind"] = c.data.kind;
  if (c.data.kind == "gaussian") {
    data["mean"] = c.data.mean;
    data["variance"] = c.data.variance;
  } else if (c.data.kind == "gmm") {
    data["components"] = Json::array();
    for (const auto& comp : c.data.components)
      data["components"].push_back(
          {{"weight", comp.weight}, {"mean", comp.dist.mean}, {"variance", comp.dist.variance}});
  } else {
    data["coefficient"] = c.data.coefficient;
    data["dim"] = c.data.dim;
  }
  j["data"] = data;
  Json families = Json::array();
  for (auto f : c.families) families.push_back(to_string(f));
  j["noise"] = {{"families", families}, {"scale", c.noise_scale}, {"scales", c.scales}};
  j["metric"] = {{"kind", to_string(c.metric)},
                 {"bandwidth", c.bandwidth ? Json(*c.bandwidth) : Json(nullptr)},
                 {"projections", c.projections},
                 {"reference_n", c.reference_n}};
  j["sweep"] = {{"h_list", c.h_list}, {"d_list", c.d_list}, {"t_list", c.t_list}, {"refine", c.refine}};
  j["gronwall"] = {{"discrete_trials", c.discrete_trials}, {"continuous_trials", c.continuous_trials}};
  j["check"] = {{"tolerance", c.tolerance}};
  j["rng"] = kRngAlgorithm;
  return j;
}

std::shared_ptr<const GaussianData> build_gaussian(const DataConfig& d) {
  if (d.kind != "gaussian") throw std::invalid_argument("this experiment needs data.kind = gaussian");
  return std::make_shared<const GaussianData>(DiagonalGaussian{d.mean, d.variance});
}

std::shared_ptr<const DataModel> build_model(const DataConfig& d) {
  if (d.kind == "gaussian") return build_gaussian(d);
  if (d.kind == "gmm") return std::make_shared<const GmmData>(d.components);
  throw std::invalid_argument("data.kind = " + d.kind + " has no data distribution");
}

std::shared_ptr<const Dynamics> build_dynamics(const DataConfig& d, int dim) {
  if (d.kind == "linear") return std::make_shared<const LinearDynamics>(dim > 0 ? dim : d.dim, d.coefficient);
  if (dim > 0) {
    if (d.kind != "gaussian") throw std::invalid_argument("dimension sweeps need gaussian or linear data");
    const auto base = build_gaussian(d);
    const auto& dist = base->distribution();
    return std::make_shared<const ReverseVpDynamics>(std::make_shared<const GaussianData>(
        GaussianData::isotropic(dim, dist.mean.at(0), dist.variance.at(0))));
  }
  return std::make_shared<const ReverseVpDynamics>(build_model(d));
}

}  // namespace vpsde
