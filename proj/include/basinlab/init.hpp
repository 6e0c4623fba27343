#pragma once

#include "basinlab/rng.hpp"
#include "basinlab/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace basinlab {

/// Spherically symmetric per-neuron initialization. Every neuron's weight
/// vector (bias folded in for deep nets) is drawn independently; the zero
/// vector has probability zero. Any scale is admissible: scale does not
/// change which basin a neuron lands in.
struct InitDistribution {
  enum class Kind { GaussianIID, UniformSphere };

  Kind kind = Kind::GaussianIID;
  double scale = 1.0;  // Gaussian stddev, or sphere radius
  std::uint64_t rng_seed = 0;

  void validate() const;
};

std::string init_kind_name(InitDistribution::Kind kind);
InitDistribution::Kind init_kind_from_name(const std::string& name);

/// Width-n first layer over R^d plus n output weights. v entries are drawn
/// from the 1-D spherically symmetric distribution (sign uniform on {-1,+1}).
/// Deterministic in (rng_seed, stream_index).
TwoLayerParams sample_two_layer(const InitDistribution& dist, Index n, Index d,
                                std::uint64_t stream_index = 0);

/// layer_sizes = [d, n_1, ..., n_{h-1}, k]. Each hidden neuron's
/// (weights, bias) vector is drawn jointly from the (fan-in + 1)-dimensional
/// distribution; output rows are drawn likewise with no bias.
DeepParams sample_deep(const InitDistribution& dist,
                       const std::vector<Index>& layer_sizes,
                       std::uint64_t stream_index = 0);

/// One draw from the dist in the given dimension (used by both samplers).
Vector sample_neuron(const InitDistribution& dist, Index dim, RngStream& stream);

}  // namespace basinlab
