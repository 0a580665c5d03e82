#include "doctest.h"

#include <cmath>
#include <memory>
#include <vector>

#include "vpsde/analysis.hpp"

using namespace vpsde;

namespace {

std::shared_ptr<const GaussianData> gaussian(int d, double mean, double var) {
  return std::make_shared<GaussianData>(GaussianData::isotropic(d, mean, var));
}

const ScheduleParams kExp{0.1, 20.0, SignalModel::ContinuousExponential};

}  // namespace

TEST_CASE("fit_order recovers exact power laws") {
  const std::vector<double> h{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  for (double p : {1.0, 0.5}) {
    std::vector<double> e;
    for (double x : h) e.push_back(0.3 * std::pow(x, p));
    const auto fit = fit_order(h, e);
    CHECK(fit.slope == doctest::Approx(p).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(0.3)).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> scaled;
    for (double v : e) scaled.push_back(7.0 * v);
    CHECK(fit_order(h, scaled).slope == doctest::Approx(fit.slope).epsilon(1e-12));
  }
}

TEST_CASE("fit_order with 10% multiplicative noise over a decade") {
  Generator gen({21, 0});
  std::vector<double> h, e;
  for (int i = 0; i <= 10; ++i) {
    const double x = 0.01 * std::pow(10.0, i / 10.0);
    h.push_back(x);
    e.push_back(std::sqrt(x) * (1.0 + 0.1 * gen.normal()));
  }
  const double slope = fit_order(h, e).slope;
  CHECK(slope >= 0.35);
  CHECK(slope <= 0.65);
}

TEST_CASE("fit_order rejects bad input") {
  const std::vector<double> two{0.1, 0.2}, three{0.1, 0.2, 0.4}, neg{1.0, -1.0, 2.0};
  CHECK_THROWS_AS(fit_order(two, two), std::invalid_argument);
  CHECK_THROWS_AS(fit_order(three, neg), std::invalid_argument);
  CHECK_THROWS_AS(fit_order(neg, three), std::invalid_argument);
}

TEST_CASE("discrete Gronwall bound") {
  CHECK(gronwall_discrete_bound(0.0, std::vector<double>{0.1, 0.5}).back() == 0.0);
  const std::vector<double> zeros(10, 0.0);
  for (double v : gronwall_discrete_bound(2.5, zeros)) CHECK(v == 2.5);

  const std::vector<double> flat(20, 0.1);
  const auto bound = gronwall_discrete_bound(1.0, flat);
  for (int n = 0; n <= 20; ++n) CHECK(bound[n] == doctest::Approx(std::pow(1.1, n)).epsilon(1e-13));

  // Expanded form a (1 + sum_{k<n} b_k prod_{k<j<n} (1 + b_j)), summed directly.
  Generator gen({22, 0});
  std::vector<double> b(60);
  for (double& v : b) v = 0.3 * gen.uniform();
  const double a = 1.7;
  const auto closed = gronwall_discrete_bound(a, b);
  for (std::size_t n = 0; n <= b.size(); ++n) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double prod = b[k];
      for (std::size_t j = k + 1; j < n; ++j) prod *= 1.0 + b[j];
      sum += prod;
    }
    REQUIRE(closed[n] == doctest::Approx(a * (1.0 + sum)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gronwall_discrete_bound(-1.0, b), std::invalid_argument);
  CHECK_THROWS_AS(gronwall_discrete_bound(1.0, std::vector<double>{0.1, -0.1}), std::invalid_argument);
}

TEST_CASE("continuous Gronwall bound") {
  CHECK(gronwall_continuous_bound(0.0, std::vector<double>{1.0, 2.0}) == 0.0);
  CHECK(gronwall_continuous_bound(2.0, std::vector<double>(11, 0.7)) == doctest::Approx(2.0 * std::exp(0.7)).epsilon(1e-14));
  std::vector<double> ramp(101);
  for (int i = 0; i <= 100; ++i) ramp[i] = i / 100.0;
  CHECK(gronwall_continuous_bound(1.0, ramp) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK_THROWS_AS(gronwall_continuous_bound(1.0, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(gronwall_continuous_bound(1.0, std::vector<double>{1.0, -0.5}), std::invalid_argument);
}

TEST_CASE("Gronwall self-test holds on random instances") {
  const auto r = gronwall_selftest(1000, 100, {23, 0});
  CHECK(r.discrete_trials == 1000);
  CHECK(r.continuous_trials == 100);
  CHECK(r.passed());
  CHECK(r.worst_discrete_ratio <= 1.0 + 1e-12);
  CHECK(r.worst_continuous_ratio <= 1.0);
}

TEST_CASE("strong order one on the linear ODE") {
  const LinearDynamics dyn(1, 1.0);
  const ScheduleParams zero{0.0, 0.0, SignalModel::DiscreteProduct};
  const std::vector<double> h{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  const auto rep = strong_error_sweep(dyn, zero, h, 16, 100, {24, 0});
  CHECK(rep.fitted_slope == doctest::Approx(1.0).epsilon(0.1));
  CHECK(trend_check(rep, true).inversions == 0);
  CHECK_THROWS_AS(strong_error_sweep(dyn, zero, h, 16, 99, {24, 0}), std::invalid_argument);
}

TEST_CASE("strong sweep CI shrinks like 1/sqrt(n)") {
  const ReverseVpDynamics dyn(gaussian(1, 1.0, 0.5));
  const std::vector<double> h{1.0 / 16};
  const auto small = strong_error_sweep(dyn, kExp, h, 4, 400, {25, 0});
  const auto large = strong_error_sweep(dyn, kExp, h, 4, 1600, {25, 0});
  const double ratio = large.ci_half_width[0] / small.ci_half_width[0];
  CHECK(ratio >= 0.35);
  CHECK(ratio <= 0.65);
  CHECK(large.terminal_error[0] <= large.error[0]);
}

TEST_CASE("strong errors are monotone in h within their intervals") {
  const ReverseVpDynamics dyn(gaussian(1, 3.0, 0.25));
  const std::vector<double> h{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  const auto rep = strong_error_sweep(dyn, kExp, h, 8, 400, {26, 0});
  CHECK(trend_check(rep, true).large_inversions == 0);
  CHECK(rep.fitted_slope > 0.0);
}

TEST_CASE("dimension sweep is reproducible") {
  const DynamicsFactory factory = [](int d) {
    return std::make_shared<ReverseVpDynamics>(gaussian(d, 3.0, 0.25));
  };
  const std::vector<int> d1{1, 1};
  const auto rep = dimension_sweep(factory, kExp, 1.0 / 32, d1, 4, 200, {27, 0});
  CHECK(rep.error[0] == rep.error[1]);
  CHECK(rep.ci_half_width[0] == rep.ci_half_width[1]);
}

TEST_CASE("trend check counts inversions") {
  ErrorReport r;
  r.abscissa = {1, 2, 3, 4};
  r.error = {1.0, 0.9, 2.0, 1.0};
  r.ci_half_width = {0.1, 0.1, 0.1, 0.1};
  r.failures.assign(4, "");
  const auto up = trend_check(r, true);
  CHECK(up.inversions == 2);
  CHECK(up.large_inversions == 1);
  r.failures[3] = "diverged";
  CHECK(trend_check(r, true).inversions == 1);
  CHECK(trend_check(r, false).inversions == 1);
}

TEST_CASE("target reference in d = 1 is the quantile grid") {
  const auto m = GaussianData::isotropic(1, 3.0, 4.0);
  const auto ref = target_reference(m, 4, MetricKind::Wasserstein1, {1, 0});
  REQUIRE(ref.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(ref.points[i] == doctest::Approx(3.0 + 2.0 * normal_quantile((i + 0.5) / 4)));
}

TEST_CASE("halving the noise scale degrades the terminal law") {
  const auto model = gaussian(1, 3.0, 1.0);
  const std::vector<int> t{512};
  const auto full = substitution_error_sweep(model, kExp, {NoiseFamily::Rademacher, 1.0}, t, 20000,
                                             MetricKind::Wasserstein1, {28, 0});
  const auto half = substitution_error_sweep(model, kExp, {NoiseFamily::Rademacher, 0.5}, t, 20000,
                                             MetricKind::Wasserstein1, {28, 0});
  CHECK(half.error[0] >= 3.0 * full.error[0]);
  CHECK(full.floor > 0.0);
  CHECK(full.ci_half_width[0] == full.floor);
  CHECK(full.baseline[0] == half.baseline[0]);
}
