#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vpsde/analysis.hpp"
#include "vpsde/config.hpp"
#include "vpsde/em_solver.hpp"
#include "vpsde/experiments.hpp"
#include "vpsde/metrics.hpp"
#include "vpsde/noise.hpp"
#include "vpsde/parallel.hpp"
#include "vpsde/schedule.hpp"

namespace py = pybind11;
using namespace vpsde;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  Array out({rows, cols});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SampleSet to_set(const Array& a) {
  SampleSet s;
  if (a.ndim() == 1) {
    s.dim = 1;
  } else if (a.ndim() == 2) {
    s.dim = static_cast<int>(a.shape(1));
  } else {
    throw std::invalid_argument("samples must be a 1-D or 2-D array");
  }
  s.points.assign(a.data(), a.data() + a.size());
  return s;
}

ScheduleParams params(double b_min, double b_max, const std::string& signal) {
  return {b_min, b_max, parse_signal_model(signal)};
}

std::shared_ptr<const GaussianData> gaussian(std::vector<double> mean, std::vector<double> variance) {
  return std::make_shared<GaussianData>(DiagonalGaussian{std::move(mean), std::move(variance)});
}

py::object to_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Euler-Maruyama sampling of the reverse VP-SDE with moment-matched noise";

  m.attr("noise_families") = [] {
    std::vector<std::string> names;
    for (auto f : kAllNoiseFamilies) names.emplace_back(to_string(f));
    return names;
  }();

  m.def("set_threads", &set_thread_count, py::arg("threads"));

  m.def(
      "sample_noise",
      [](const std::string& family, std::size_t n, std::uint64_t seed, double scale, std::uint64_t stream) {
        return to_array(sample({parse_noise_family(family), scale}, n, {seed, stream}));
      },
      py::arg("family"), py::arg("n"), py::arg("seed"), py::arg("scale") = 1.0, py::arg("stream") = 0);

  m.def(
      "analytic_moments",
      [](const std::string& family, double scale) {
        const auto mo = analytic_moments({parse_noise_family(family), scale});
        return py::dict(py::arg("mean") = mo.mean, py::arg("variance") = mo.variance,
                        py::arg("fourth_moment") = mo.fourth_moment);
      },
      py::arg("family"), py::arg("scale") = 1.0);

  m.def(
      "schedule",
      [](int steps, double b_min, double b_max, const std::string& signal) {
        const auto s = params(b_min, b_max, signal).at(steps);
        std::vector<double> beta(steps + 1, 0.0), abar(steps + 1);
        for (int k = 0; k <= steps; ++k) {
          abar[k] = s.alpha_bar(k);
          if (k > 0) beta[k] = s.beta_at(k);
        }
        return py::dict(py::arg("beta") = to_array(beta), py::arg("alpha_bar") = to_array(abar));
      },
      py::arg("steps"), py::arg("b_min") = 0.1, py::arg("b_max") = 20.0, py::arg("signal") = "product");

  m.def(
      "reverse_sample",
      [](std::vector<double> mean, std::vector<double> variance, int steps, const std::string& family,
         std::size_t n, std::uint64_t seed, double scale, double b_min, double b_max, const std::string& signal) {
        const auto model = gaussian(std::move(mean), std::move(variance));
        const ReverseVpDynamics dyn(model);
        SampleBatch batch;
        {
          py::gil_scoped_release release;
          batch = reverse_sample(dyn, params(b_min, b_max, signal).at(steps),
                                 {parse_noise_family(family), scale}, n, {seed, 0});
        }
        return to_array(batch.states, batch.size(), batch.dim);
      },
      py::arg("mean"), py::arg("variance"), py::arg("steps"), py::arg("family") = "gaussian", py::arg("n") = 1000,
      py::arg("seed") = 0, py::arg("scale") = 1.0, py::arg("b_min") = 0.1, py::arg("b_max") = 20.0,
      py::arg("signal") = "product");

  m.def(
      "strong_error_sweep",
      [](std::vector<double> mean, std::vector<double> variance, std::vector<double> h_list, int refine,
         std::size_t n_paths, std::uint64_t seed, double b_min, double b_max, const std::string& signal) {
        const ReverseVpDynamics dyn(gaussian(std::move(mean), std::move(variance)));
        ErrorReport rep;
        {
          py::gil_scoped_release release;
          rep = strong_error_sweep(dyn, params(b_min, b_max, signal), h_list, refine, n_paths, {seed, 0});
        }
        return to_python(report_to_json(rep));
      },
      py::arg("mean"), py::arg("variance"), py::arg("h_list"), py::arg("refine") = 64, py::arg("n_paths") = 2000,
      py::arg("seed") = 0, py::arg("b_min") = 0.1, py::arg("b_max") = 20.0, py::arg("signal") = "exponential");

  m.def(
      "distance",
      [](const std::string& kind, const Array& a, const Array& b, std::optional<double> bandwidth,
         int projections, std::uint64_t seed) {
        MetricOptions opts;
        opts.bandwidth = bandwidth;
        opts.projections = projections;
        opts.seed = seed;
        return distance(parse_metric_kind(kind), to_set(a), to_set(b), opts);
      },
      py::arg("kind"), py::arg("a"), py::arg("b"), py::arg("bandwidth") = py::none(),
      py::arg("projections") = 64, py::arg("seed") = 0);

  m.def(
      "gronwall_discrete_bound",
      [](double a, const std::vector<double>& b) { return to_array(gronwall_discrete_bound(a, b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "gronwall_continuous_bound",
      [](double a, const std::vector<double>& b) { return gronwall_continuous_bound(a, b); }, py::arg("a"),
      py::arg("b_table"));
  m.def(
      "gronwall_selftest",
      [](int discrete, int continuous, std::uint64_t seed) {
        const auto r = gronwall_selftest(discrete, continuous, {seed, 0});
        return py::dict(py::arg("discrete_failures") = r.discrete_failures,
                        py::arg("continuous_failures") = r.continuous_failures,
                        py::arg("worst_discrete_ratio") = r.worst_discrete_ratio,
                        py::arg("worst_continuous_ratio") = r.worst_continuous_ratio);
      },
      py::arg("discrete_trials") = 1000, py::arg("continuous_trials") = 100, py::arg("seed") = 0);

  m.def(
      "run_experiment",
      [](const std::string& config_path) {
        const auto cfg = load_config(config_path);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        return to_python(r.summary);
      },
      py::arg("config"));
}
