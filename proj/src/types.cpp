#include "basinlab/types.hpp"

#include <algorithm>
#include <sstream>

namespace basinlab {

std::string loss_name(LossKind kind) {
  return kind == LossKind::SquaredLoss ? "squared" : "cross_entropy";
}

LossKind loss_from_name(const std::string& name) {
  if (name == "squared") return LossKind::SquaredLoss;
  if (name == "cross_entropy") return LossKind::CrossEntropySoftmax;
  throw std::invalid_argument("unknown loss kind: " + name);
}

namespace detail {
[[noreturn]] void throw_shape(const std::string& what, Index rows_a, Index cols_a,
                              Index rows_b, Index cols_b) {
  std::ostringstream msg;
  msg << what << ": " << rows_a << "x" << cols_a << " vs " << rows_b << "x" << cols_b;
  throw DimensionError(msg.str());
}
}  // namespace detail

void Dataset::validate() const {
  if (m() < 1 || d() < 1)
    throw std::invalid_argument("dataset needs m >= 1 instances and d >= 1 features, got m=" +
                                std::to_string(m()) + " d=" + std::to_string(d()));
  if (targets.rows() != m())
    detail::throw_shape("targets rows must equal instance count", targets.rows(),
                        targets.cols(), m(), d());
  if (loss == LossKind::SquaredLoss) {
    if (targets.cols() != prediction_dim)
      detail::throw_shape("squared-loss targets must be m x k", targets.rows(),
                          targets.cols(), m(), prediction_dim);
  } else {
    if (targets.cols() != 1)
      throw std::invalid_argument("cross-entropy targets must be one class index per row");
    if (prediction_dim < 2)
      throw std::invalid_argument("cross-entropy needs at least 2 classes");
    for (Index t = 0; t < m(); ++t) {
      const double label = targets(t, 0);
      if (label < 0 || label >= static_cast<double>(prediction_dim) ||
          label != static_cast<double>(static_cast<Index>(label)))
        throw std::invalid_argument("class index out of range at instance " +
                                    std::to_string(t));
    }
  }
  if (!cluster_ids.empty()) {
    if (static_cast<Index>(cluster_ids.size()) != m())
      throw std::invalid_argument("cluster_ids length must equal m");
    const int max_id = *std::max_element(cluster_ids.begin(), cluster_ids.end());
    const int min_id = *std::min_element(cluster_ids.begin(), cluster_ids.end());
    if (min_id < 1 || static_cast<Index>(max_id) > d())
      throw std::invalid_argument("cluster ids must lie in [1..k] with k <= d");
  }
}

void TwoLayerParams::validate() const {
  if (n() < 1) throw std::invalid_argument("two-layer net needs n >= 1 neurons");
  if (v.size() != n())
    detail::throw_shape("output weight count must match first-layer rows", W.rows(),
                        W.cols(), v.size(), 1);
}

void DeepParams::validate() const {
  if (output_W.rows() < 1) throw std::invalid_argument("output layer must be nonempty");
  Index prev = input_dim();
  for (size_t i = 0; i < hidden.size(); ++i) {
    const Layer& layer = hidden[i];
    if (layer.W.cols() != prev)
      detail::throw_shape("layer " + std::to_string(i + 1) + " fan-in mismatch",
                          layer.W.rows(), layer.W.cols(), prev, 1);
    if (layer.b.size() != layer.W.rows())
      detail::throw_shape("layer " + std::to_string(i + 1) + " bias length mismatch",
                          layer.W.rows(), layer.W.cols(), layer.b.size(), 1);
    prev = layer.W.rows();
  }
  if (output_W.cols() != prev)
    detail::throw_shape("output layer fan-in mismatch", output_W.rows(), output_W.cols(),
                        prev, 1);
}

}  // namespace basinlab
