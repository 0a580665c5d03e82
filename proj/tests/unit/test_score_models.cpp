#include "doctest.h"

#include <cmath>
#include <vector>

#include "vpsde/score_models.hpp"

using namespace vpsde;

namespace {

// Central differences of log_density, step 1e-5.
std::vector<double> fd_score(const DataModel& m, std::vector<double> x, const Schedule& s, int step) {
  const double h = 1e-5;
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double keep = x[j];
    x[j] = keep + h;
    const double up = m.log_density(x, s, step);
    x[j] = keep - h;
    const double down = m.log_density(x, s, step);
    x[j] = keep;
    g[j] = (up - down) / (2 * h);
  }
  return g;
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += (a[j] - b[j]) * (a[j] - b[j]);
    den += b[j] * b[j];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

GmmData two_blobs() {
  return GmmData({{0.3, {{-1.5, 0.0}, {0.25, 0.25}}}, {0.7, {{1.5, 0.5}, {0.25, 1.0}}}});
}

}  // namespace

TEST_CASE("standard normal data has score -x") {
  const auto s = Schedule::linear_scaled(100, 0.1, 20.0);
  const auto m = GaussianData::isotropic(3, 0.0, 1.0);
  const std::vector<double> x{0.5, -2.0, 1.25};
  for (int step : {1, 50, 100}) {
    const auto sc = m.score(x, s, step);
    for (int j = 0; j < 3; ++j) CHECK(sc[j] == doctest::Approx(-x[j]).epsilon(1e-14));
  }
}

TEST_CASE("Gaussian score against finite differences and closed form") {
  const auto s = Schedule::linear_scaled(200, 0.1, 20.0);
  const GaussianData m({{3.0, -1.0}, {0.25, 4.0}});
  const std::vector<double> x{2.0, 0.7};
  for (int step : {1, 20, 100, 200}) {
    const auto sc = m.score(x, s, step);
    CHECK(rel_err(sc, fd_score(m, x, s, step)) <= 1e-6);
    const double ab = s.alpha_bar(step);
    const double v0 = ab * 0.25 + 1 - ab, v1 = ab * 4.0 + 1 - ab;
    CHECK(sc[0] == doctest::Approx(-(2.0 - std::sqrt(ab) * 3.0) / v0).epsilon(1e-13));
    CHECK(sc[1] == doctest::Approx(-(0.7 + std::sqrt(ab)) / v1).epsilon(1e-13));
  }
}

TEST_CASE("mixture score against finite differences") {
  const auto s = Schedule::linear_scaled(200, 0.1, 20.0);
  const auto m = two_blobs();
  for (const std::vector<double>& x : {std::vector<double>{0.1, 0.2}, {-1.4, 0.0}, {2.5, -1.0}, {0.0, 3.0}}) {
    for (int step : {1, 10, 100, 200}) CHECK(rel_err(m.score(x, s, step), fd_score(m, x, s, step)) <= 1e-5);
  }
}

TEST_CASE("symmetric mixture has zero score at the origin") {
  const auto s = Schedule::linear_scaled(100, 0.1, 20.0);
  const GmmData m({{0.5, {{-1.5}, {0.25}}}, {0.5, {{1.5}, {0.25}}}});
  for (int step : {1, 30, 100}) CHECK(std::fabs(m.score(std::vector<double>{0.0}, s, step)[0]) <= 1e-15);
}

TEST_CASE("one-component mixture equals the Gaussian") {
  const auto s = Schedule::linear_scaled(100, 0.1, 20.0);
  const DiagonalGaussian g{{1.0, -2.0}, {0.5, 2.0}};
  const GaussianData a(g);
  const GmmData b({{1.0, g}});
  const std::vector<double> x{0.3, 0.9};
  for (int step : {1, 40, 100}) {
    CHECK(a.score(x, s, step) == b.score(x, s, step));
    CHECK(a.log_density(x, s, step) == doctest::Approx(b.log_density(x, s, step)).epsilon(1e-15));
  }
}

TEST_CASE("forward marginal by hand") {
  // Flat exponential schedule with b = ln 4 gives alpha_bar = 1/4 after one step.
  const auto s = Schedule::linear_scaled(1, std::log(4.0), std::log(4.0), SignalModel::ContinuousExponential);
  const auto fm = GaussianData::isotropic(1, 3.0, 4.0).forward_marginal(s, 1);
  CHECK(fm.mean[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fm.variance[0] == doctest::Approx(1.75).epsilon(1e-12));
}

TEST_CASE("eps and score round trip") {
  const auto s = Schedule::linear_scaled(100, 0.1, 20.0);
  const auto m = two_blobs();
  const std::vector<double> x{0.4, -0.3};
  for (int step : {1, 50, 100}) {
    const auto sc = m.score(x, s, step);
    const auto back = score_from_eps(eps_from_score(sc, s, step), s, step);
    for (int j = 0; j < 2; ++j) CHECK(back[j] == doctest::Approx(sc[j]).epsilon(1e-12));
  }
  const auto eps0 = eps_from_score(std::vector<double>{0.0, 0.0}, s, 10);
  CHECK(eps0[0] == 0.0);
  CHECK(eps0[1] == 0.0);
}

TEST_CASE("exact data draws have the right moments") {
  const auto m = two_blobs();
  Generator gen({4, 4});
  const int n = 200000;
  double m0 = 0, m1 = 0;
  std::vector<double> x(2);
  for (int i = 0; i < n; ++i) {
    m.sample_data(gen, x);
    m0 += x[0];
    m1 += x[1];
  }
  m0 /= n;
  m1 /= n;
  // mean of coordinate 0: 0.3(-1.5) + 0.7(1.5) = 0.6, variance 0.25 + 0.21 * 9
  CHECK(std::fabs(m0 - 0.6) < 3 * std::sqrt((0.25 + 0.21 * 9) / n));
  CHECK(std::fabs(m1 - 0.35) < 3 * std::sqrt((0.3 * 0.25 + 0.7 * 1.0 + 0.21 * 0.25) / n));
}

TEST_CASE("invalid inputs") {
  const auto s = Schedule::linear_scaled(10, 0.1, 20.0, SignalModel::ContinuousExponential);
  const auto m = GaussianData::isotropic(2, 0.0, 1.0);
  CHECK_THROWS_AS(m.score(std::vector<double>{NAN, 0.0}, s, 3), std::invalid_argument);
  CHECK_THROWS_AS(m.score(std::vector<double>{0.0}, s, 3), std::invalid_argument);
  CHECK_THROWS_AS(GaussianData({{0.0}, {0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(GmmData({{0.5, {{0.0}, {1.0}}}, {0.4, {{1.0}, {1.0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(GmmData({{0.5, {{0.0}, {1.0}}}, {0.5, {{1.0, 0.0}, {1.0, 1.0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(GmmData({}), std::invalid_argument);
}
