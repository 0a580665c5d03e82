#include "doctest.h"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vpsde/noise.hpp"
#include "vpsde/rng.hpp"

using namespace vpsde;

namespace {

double integrate(double lo, double hi, int n, auto f) {
  // Composite Simpson, n even.
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("normal quantile agrees with boost erfc_inv") {
  for (double p : {1e-300, 1e-20, 1e-8, 1e-3, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97575, 1 - 1e-8}) {
    const double expected = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    CHECK(normal_quantile(p) == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("uniform draws stay inside the open interval") {
  Generator gen(RngState{1, 2});
  for (int i = 0; i < 100000; ++i) {
    const double u = gen.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(u != 0.5);
  }
}

TEST_CASE("rng streams are reproducible and distinct") {
  const RngState a{42, 0};
  CHECK(sample({NoiseFamily::Gaussian}, 100, a) == sample({NoiseFamily::Gaussian}, 100, a));
  CHECK(sample({NoiseFamily::Gaussian}, 100, a) != sample({NoiseFamily::Gaussian}, 100, a.child(0)));
  CHECK(a.child(3) == a.child(3));
  CHECK_FALSE(a.child(3) == a.child(4));
}

TEST_CASE("family names round-trip") {
  for (auto f : kAllNoiseFamilies) CHECK(parse_noise_family(to_string(f)) == f);
  CHECK(to_string(NoiseFamily::DiscreteGaussian) == "discrete-gaussian");
  CHECK_THROWS_AS(parse_noise_family("cauchy"), std::invalid_argument);
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(sample({NoiseFamily::Uniform}, 0, {}), std::invalid_argument);
  CHECK_THROWS_AS(sample({NoiseFamily::Uniform, 0.0}, 10, {}), std::invalid_argument);
  CHECK_THROWS_AS(sample({NoiseFamily::Uniform, -1.0}, 10, {}), std::invalid_argument);
  CHECK_THROWS_AS(sample({NoiseFamily::Uniform, NAN}, 10, {}), std::invalid_argument);
}

TEST_CASE("rademacher and discrete-gaussian take only their atoms") {
  const auto r = sample({NoiseFamily::Rademacher}, 10000, {3, 0});
  for (double v : r) REQUIRE((v == 1.0 || v == -1.0));

  const double s3 = std::sqrt(3.0);
  const auto d = sample({NoiseFamily::DiscreteGaussian}, 10000, {3, 1});
  for (double v : d) REQUIRE((v == s3 || v == -s3 || v == 0.0));
}

TEST_CASE("discrete-gaussian frequencies pass a chi-square test") {
  const std::size_t n = 1000000;
  const auto d = sample({NoiseFamily::DiscreteGaussian}, n, {11, 0});
  double neg = 0, zero = 0, pos = 0;
  for (double v : d) (v < 0 ? neg : v > 0 ? pos : zero) += 1;
  const double e_side = n / 6.0, e_zero = 2.0 * n / 3.0;
  const double chi2 = (neg - e_side) * (neg - e_side) / e_side + (pos - e_side) * (pos - e_side) / e_side +
                      (zero - e_zero) * (zero - e_zero) / e_zero;
  CHECK(chi2 < 13.82);  // chi-square(2) upper 0.1% point
}

TEST_CASE("bounded families respect their support") {
  for (auto f : kAllNoiseFamilies) {
    for (double scale : {1.0, 0.5, 2.0}) {
      const NoiseSpec spec{f, scale};
      const auto sup = support(spec);
      if (f == NoiseFamily::Gaussian || f == NoiseFamily::Laplace) {
        CHECK_FALSE(sup.has_value());
        continue;
      }
      REQUIRE(sup.has_value());
      for (double v : sample(spec, 200000, {5, static_cast<std::uint64_t>(f)})) {
        REQUIRE(v >= sup->lo);
        REQUIRE(v <= sup->hi);
      }
    }
  }
  const auto u = support({NoiseFamily::Uniform});
  CHECK(u->hi == doctest::Approx(std::sqrt(3.0)));
  const auto t = support({NoiseFamily::Triangular});
  CHECK(t->hi == doctest::Approx(std::sqrt(6.0)));
}

TEST_CASE("empirical moments match at n = 1e6") {
  const std::size_t n = 1000000;
  for (auto f : kAllNoiseFamilies) {
    CAPTURE(to_string(f));
    const auto m = analytic_moments({f});
    const auto x = sample({f}, n, {2024, static_cast<std::uint64_t>(f)});
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= (n - 1);
    CHECK(std::fabs(mean) <= 5.0 * std::sqrt(m.variance / n));
    CHECK(std::fabs(mean) <= 5e-3);
    const double var_se = std::max(std::sqrt((m.fourth_moment - 1.0) / n), 1.0 / n);
    CHECK(std::fabs(var - 1.0) <= 5.0 * var_se);
    CHECK(std::fabs(var - 1.0) <= 1e-2);
  }
}

TEST_CASE("analytic moments") {
  auto eq = [](NoiseMoments m, double mean, double var, double m4) {
    CHECK(m.mean == mean);
    CHECK(m.variance == doctest::Approx(var).epsilon(1e-14));
    CHECK(m.fourth_moment == doctest::Approx(m4).epsilon(1e-14));
  };
  eq(analytic_moments({NoiseFamily::Rademacher}), 0, 1, 1);
  eq(analytic_moments({NoiseFamily::Laplace}), 0, 1, 6);
  eq(analytic_moments({NoiseFamily::Gaussian, 2.0}), 0, 4, 48);
  eq(analytic_moments({NoiseFamily::DiscreteGaussian}), 0, 1, 3);
}

TEST_CASE("fourth moments by numerical integration") {
  const double b = 1.0 / std::numbers::sqrt2;
  const double laplace =
      2.0 * integrate(0.0, 80.0 * b, 200000, [&](double x) { return std::pow(x, 4) * std::exp(-x / b) / (2 * b); });
  CHECK(laplace == doctest::Approx(analytic_moments({NoiseFamily::Laplace}).fourth_moment).epsilon(1e-9));

  const double c = std::sqrt(6.0);
  const double tri = 2.0 * integrate(0.0, c, 20000, [&](double x) { return std::pow(x, 4) * (c - x) / (c * c); });
  CHECK(tri == doctest::Approx(analytic_moments({NoiseFamily::Triangular}).fourth_moment).epsilon(1e-10));

  const double s3 = std::sqrt(3.0);
  const double uni = integrate(-s3, s3, 20000, [&](double x) { return std::pow(x, 4) / (2 * s3); });
  CHECK(uni == doctest::Approx(analytic_moments({NoiseFamily::Uniform}).fourth_moment).epsilon(1e-10));

  // x = sqrt2 sin(theta), theta uniform on (-pi/2, pi/2).
  const double arc = integrate(-std::numbers::pi / 2, std::numbers::pi / 2, 20000,
                               [](double t) { return 4.0 * std::pow(std::sin(t), 4) / std::numbers::pi; });
  CHECK(arc == doctest::Approx(analytic_moments({NoiseFamily::Arcsine}).fourth_moment).epsilon(1e-10));
}

TEST_CASE("scaling multiplies the unit draw exactly") {
  for (auto f : kAllNoiseFamilies) {
    const auto unit = sample({f, 1.0}, 1000, {9, 9});
    const auto scaled = sample({f, 1.7}, 1000, {9, 9});
    for (std::size_t i = 0; i < unit.size(); ++i) REQUIRE(scaled[i] == 1.7 * unit[i]);
  }
}

TEST_CASE("inverse-CDF maps by hand") {
  const double u = 0.3;
  CHECK(unit_noise(NoiseFamily::Arcsine, u) == doctest::Approx(std::numbers::sqrt2 * std::sin(std::numbers::pi * (u - 0.5))));
  const double b = 1.0 / std::numbers::sqrt2;
  CHECK(unit_noise(NoiseFamily::Laplace, u) == doctest::Approx(-b * -1.0 * std::log(1.0 - 2.0 * 0.2)));
  CHECK(unit_noise(NoiseFamily::DiscreteGaussian, 0.1) == doctest::Approx(-std::sqrt(3.0)));
  CHECK(unit_noise(NoiseFamily::DiscreteGaussian, 0.2) == doctest::Approx(std::sqrt(3.0)));
  CHECK(unit_noise(NoiseFamily::DiscreteGaussian, 0.5) == 0.0);
  // Triangular with a = -c, mode 0: F(0) = 1/2.
  CHECK(unit_noise(NoiseFamily::Triangular, 0.5 - 1e-12) == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(unit_noise(NoiseFamily::Triangular, 0.125) == doctest::Approx(-std::sqrt(6.0) / 2));
}
