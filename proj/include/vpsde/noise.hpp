#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vpsde/rng.hpp"

namespace vpsde {

/// Driving-noise families. Every family has mean 0 and variance 1 at scale 1.
enum class NoiseFamily {
  Gaussian,
  DiscreteGaussian,  // three-point law on {-sqrt3, 0, +sqrt3} with P(0) = 2/3
  Uniform,           // U[-sqrt3, sqrt3]
  Rademacher,        // +-1
  Laplace,           // scale 1/sqrt2
  Triangular,        // support [-sqrt6, sqrt6], mode 0
  Arcsine,           // sqrt2 * sin(pi (u - 1/2))
};

inline constexpr std::array<NoiseFamily, 7> kAllNoiseFamilies = {
    NoiseFamily::Gaussian,   NoiseFamily::DiscreteGaussian, NoiseFamily::Uniform,
    NoiseFamily::Rademacher, NoiseFamily::Laplace,          NoiseFamily::Triangular,
    NoiseFamily::Arcsine};

/// Lowercase CLI/config name, e.g. "discrete-gaussian".
std::string_view to_string(NoiseFamily family);
NoiseFamily parse_noise_family(std::string_view name);

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Gaussian;
  double scale = 1.0;

  /// Throws std::invalid_argument unless scale is finite and positive.
  void validate() const;
  std::string label() const;
  bool operator==(const NoiseSpec&) const = default;
};

struct Support {
  double lo;
  double hi;
};

/// Closed support of scale * E for bounded families; nullopt otherwise.
std::optional<Support> support(const NoiseSpec& spec);

/// Maps one uniform u in (0, 1) to a unit-scale draw of the family. Every
/// family consumes exactly one uniform per draw, so two families driven by
/// the same generator state see the same uniforms.
double unit_noise(NoiseFamily family, double u);

/// Fills out with i.i.d. draws of scale * E.
void fill_noise(const NoiseSpec& spec, Generator& gen, std::span<double> out);

/// count i.i.d. draws of scale * E from the stream identified by rng.
std::vector<double> sample(const NoiseSpec& spec, std::size_t count, RngState rng);

struct NoiseMoments {
  double mean;
  double variance;
  double fourth_moment;
};

/// Closed-form moments of scale * E.
NoiseMoments analytic_moments(const NoiseSpec& spec);

}  // namespace vpsde
