#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace basinlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class LossKind { SquaredLoss, CrossEntropySoftmax };

std::string loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);

/// Training sample. Rows of X are instances. For SquaredLoss, `targets` is
/// m x k (k = 1 for scalar regression). For CrossEntropySoftmax, `targets`
/// is m x 1 holding the class index of each instance and `prediction_dim`
/// is the number of classes.
struct Dataset {
  Matrix X;
  Matrix targets;
  Index prediction_dim = 1;
  LossKind loss = LossKind::SquaredLoss;
  std::vector<int> cluster_ids;  // optional, values in [1..k]
  std::string provenance;        // generator tag, empty if hand-built

  Index m() const { return X.rows(); }
  Index d() const { return X.cols(); }
  Index k() const { return prediction_dim; }

  void validate() const;
};

/// Two-layer net without bias: x -> sum_i v_i * relu(<w_i, x>).
/// Row i of W is the weight vector of the i-th first-layer neuron.
struct TwoLayerParams {
  Matrix W;  // n x d
  Vector v;  // n

  Index n() const { return W.rows(); }
  Index d() const { return W.cols(); }

  void validate() const;
};

/// Fully connected ReLU net of arbitrary depth. Hidden layers carry a bias
/// and a ReLU; the output layer is purely linear with no bias.
struct DeepParams {
  struct Layer {
    Matrix W;  // n_i x n_{i-1}
    Vector b;  // n_i
  };
  std::vector<Layer> hidden;
  Matrix output_W;  // k x n_{h-1}

  Index input_dim() const {
    return hidden.empty() ? output_W.cols() : hidden.front().W.cols();
  }
  Index output_dim() const { return output_W.rows(); }
  /// Width of the last layer before the output neurons.
  Index last_hidden_dim() const {
    return hidden.empty() ? output_W.cols() : hidden.back().W.rows();
  }

  void validate() const;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {
[[noreturn]] void throw_shape(const std::string& what, Index rows_a, Index cols_a,
                              Index rows_b, Index cols_b);
}

}  // namespace basinlab
