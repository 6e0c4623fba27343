#include "basinlab/init.hpp"

#include <stdexcept>

namespace basinlab {

void InitDistribution::validate() const {
  if (!(scale > 0.0)) throw std::invalid_argument("init scale/radius must be positive");
}

std::string init_kind_name(InitDistribution::Kind kind) {
  return kind == InitDistribution::Kind::GaussianIID ? "gaussian" : "uniform_sphere";
}

InitDistribution::Kind init_kind_from_name(const std::string& name) {
  if (name == "gaussian") return InitDistribution::Kind::GaussianIID;
  if (name == "uniform_sphere") return InitDistribution::Kind::UniformSphere;
  throw std::invalid_argument("unknown init kind: " + name);
}

Vector sample_neuron(const InitDistribution& dist, Index dim, RngStream& stream) {
  if (dist.kind == InitDistribution::Kind::GaussianIID)
    return dist.scale * stream.gaussian_vector(dim);
  return dist.scale * stream.unit_vector(dim);
}

TwoLayerParams sample_two_layer(const InitDistribution& dist, Index n, Index d,
                                std::uint64_t stream_index) {
  dist.validate();
  if (n < 1 || d < 1) throw std::invalid_argument("sample_two_layer needs n, d >= 1");
  RngStream stream(dist.rng_seed, "init/two_layer", stream_index);
  TwoLayerParams params;
  params.W.resize(n, d);
  params.v.resize(n);
  for (Index i = 0; i < n; ++i) params.W.row(i) = sample_neuron(dist, d, stream).transpose();
  for (Index i = 0; i < n; ++i) {
    // 1-D spherically symmetric: magnitude per kind, sign uniform on {-1,+1}
    const double magnitude = dist.kind == InitDistribution::Kind::GaussianIID
                                 ? dist.scale * std::abs(stream.gaussian())
                                 : dist.scale;
    params.v(i) = stream.sign() * magnitude;
  }
  return params;
}

DeepParams sample_deep(const InitDistribution& dist, const std::vector<Index>& layer_sizes,
                       std::uint64_t stream_index) {
  dist.validate();
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("layer_sizes needs at least [input, output]");
  for (Index size : layer_sizes)
    if (size < 1) throw std::invalid_argument("all layer sizes must be >= 1");
  RngStream stream(dist.rng_seed, "init/deep", stream_index);
  DeepParams params;
  const size_t depth = layer_sizes.size();
  for (size_t layer = 1; layer + 1 < depth; ++layer) {
    const Index fan_in = layer_sizes[layer - 1];
    const Index fan_out = layer_sizes[layer];
    DeepParams::Layer l;
    l.W.resize(fan_out, fan_in);
    l.b.resize(fan_out);
    for (Index i = 0; i < fan_out; ++i) {
      // weights and bias drawn jointly from the (fan_in + 1)-dim distribution
      const Vector neuron = sample_neuron(dist, fan_in + 1, stream);
      l.W.row(i) = neuron.head(fan_in).transpose();
      l.b(i) = neuron(fan_in);
    }
    params.hidden.push_back(std::move(l));
  }
  const Index fan_in = layer_sizes[depth - 2];
  const Index k = layer_sizes[depth - 1];
  params.output_W.resize(k, fan_in);
  for (Index i = 0; i < k; ++i)
    params.output_W.row(i) = sample_neuron(dist, fan_in, stream).transpose();
  return params;
}

}  // namespace basinlab
