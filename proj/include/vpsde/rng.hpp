#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vpsde {

/// Identifies one reproducible random stream. Equal states yield bit-identical
/// sequences; distinct stream ids under the same seed yield independent ones.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Sub-stream for the index-th child (a path, a batch, a replicate).
  RngState child(std::uint64_t index) const;

  bool operator==(const RngState&) const = default;
};

/// Recorded in every output's metadata so results can be regenerated.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64 seeded by splitmix64(seed, stream); "
    "uniform = ((bits >> 12) + 0.5) * 2^-52; normal = AS241 inverse CDF";

std::uint64_t splitmix64(std::uint64_t x);

/// Standard normal quantile (Wichura AS241, ~1e-16 relative accuracy).
/// Requires 0 < p < 1.
double normal_quantile(double p);

class Generator {
 public:
  explicit Generator(RngState state);

  std::uint64_t bits() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns 0, 1/2 or 1.
  double uniform() {
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1p-52;
  }

  double normal() { return normal_quantile(uniform()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vpsde
