#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string_view>

namespace basinlab {

/// Deterministic seeded stream. Substreams are addressed by (seed, label,
/// index) so parallel trials can draw independently regardless of worker
/// scheduling. xoshiro256++ state, seeded through splitmix64; all variate
/// code is hand-rolled so results are identical across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::string_view label = {},
                     std::uint64_t index = 0);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// +1 or -1 with equal probability.
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  std::uint64_t uniform_index(std::uint64_t bound);  // in [0, bound)

  /// Standard normal via the Marsaglia polar method.
  double gaussian();

  Eigen::VectorXd gaussian_vector(Eigen::Index n);

  /// Uniform on the unit sphere in R^d (normalized Gaussian).
  Eigen::VectorXd unit_vector(Eigen::Index d);

 private:
  std::uint64_t s_[4];
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64_next(std::uint64_t& state);

}  // namespace basinlab
