#include "vpsde/noise.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace vpsde {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt6 = std::sqrt(6.0);

struct FamilyInfo {
  NoiseFamily family;
  std::string_view name;
  double fourth_moment;  // at unit scale
  double bound;          // half-width of the support, 0 if unbounded
};

const FamilyInfo& info(NoiseFamily family) {
  static const FamilyInfo table[] = {
      {NoiseFamily::Gaussian, "gaussian", 3.0, 0.0},
      {NoiseFamily::DiscreteGaussian, "discrete-gaussian", 3.0, kSqrt3},
      {NoiseFamily::Uniform, "uniform", 9.0 / 5.0, kSqrt3},
      {NoiseFamily::Rademacher, "rademacher", 1.0, 1.0},
      {NoiseFamily::Laplace, "laplace", 6.0, 0.0},
      {NoiseFamily::Triangular, "triangular", 12.0 / 5.0, kSqrt6},
      {NoiseFamily::Arcsine, "arcsine", 3.0 / 2.0, kSqrt2},
  };
  for (const auto& entry : table)
    if (entry.family == family) return entry;
  throw std::invalid_argument("unknown noise family");
}

}  // namespace

std::string_view to_string(NoiseFamily family) { return info(family).name; }

NoiseFamily parse_noise_family(std::string_view name) {
  for (NoiseFamily family : kAllNoiseFamilies)
    if (info(family).name == name) return family;
  throw std::invalid_argument("unknown noise family '" + std::string(name) + "'");
}

void NoiseSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("noise scale must be positive and finite");
}

std::string NoiseSpec::label() const {
  std::string out(to_string(family));
  if (scale != 1.0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "@%.17g", scale);
    out += buf;
  }
  return out;
}

std::optional<Support> support(const NoiseSpec& spec) {
  const double bound = info(spec.family).bound;
  if (bound == 0.0) return std::nullopt;
  return Support{-spec.scale * bound, spec.scale * bound};
}

double unit_noise(NoiseFamily family, double u) {
  switch (family) {
    case NoiseFamily::Gaussian:
      return normal_quantile(u);
    case NoiseFamily::DiscreteGaussian:
      if (u < 1.0 / 6.0) return -kSqrt3;
      if (u < 1.0 / 3.0) return kSqrt3;
      return 0.0;
    case NoiseFamily::Uniform:
      return -kSqrt3 + 2.0 * kSqrt3 * u;
    case NoiseFamily::Rademacher:
      return u < 0.5 ? -1.0 : 1.0;
    case NoiseFamily::Laplace: {
      const double b = 1.0 / kSqrt2;
      const double c = u - 0.5;
      const double sign = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
      return -b * sign * std::log1p(-2.0 * std::fabs(c));
    }
    case NoiseFamily::Triangular: {
      // a = -sqrt6, mode 0, c = sqrt6; the branch point (mode - a)/(c - a) is 1/2.
      const double a = -kSqrt6, mode = 0.0, c = kSqrt6;
      if (u < (mode - a) / (c - a)) return a + std::sqrt(u * (mode - a) * (c - a));
      return c - std::sqrt((1.0 - u) * (c - mode) * (c - a));
    }
    case NoiseFamily::Arcsine:
      return kSqrt2 * std::sin(std::numbers::pi * (u - 0.5));
  }
  throw std::invalid_argument("unknown noise family");
}

void fill_noise(const NoiseSpec& spec, Generator& gen, std::span<double> out) {
  for (double& v : out) v = spec.scale * unit_noise(spec.family, gen.uniform());
}

std::vector<double> sample(const NoiseSpec& spec, std::size_t count, RngState rng) {
  spec.validate();
  if (count == 0) throw std::invalid_argument("sample count must be at least 1");
  std::vector<double> out(count);
  Generator gen(rng);
  fill_noise(spec, gen, out);
  return out;
}

NoiseMoments analytic_moments(const NoiseSpec& spec) {
  const double a2 = spec.scale * spec.scale;
  return {0.0, a2, a2 * a2 * info(spec.family).fourth_moment};
}

}  // namespace vpsde
