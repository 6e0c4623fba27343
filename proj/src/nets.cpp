#include "basinlab/nets.hpp"

#include <cmath>
#include <sstream>

namespace basinlab {

double forward_two_layer(const TwoLayerParams& params, const Eigen::Ref<const Vector>& x) {
  params.validate();
  if (x.size() != params.d())
    detail::throw_shape("input dimension must match first-layer columns", x.size(), 1,
                        params.W.rows(), params.W.cols());
  const Vector pre = params.W * x;
  double out = 0.0;
  for (Index i = 0; i < pre.size(); ++i) out += params.v(i) * relu(pre(i));
  return out;
}

Vector forward_deep(const DeepParams& params, const Eigen::Ref<const Vector>& x) {
  params.validate();
  if (x.size() != params.input_dim())
    detail::throw_shape("input dimension must match first hidden layer", x.size(), 1,
                        params.input_dim(), 1);
  Vector activation = x;
  for (const DeepParams::Layer& layer : params.hidden)
    activation = (layer.W * activation + layer.b).cwiseMax(0.0);
  return params.output_W * activation;
}

Matrix prediction_matrix(const TwoLayerParams& params, const Dataset& data) {
  data.validate();
  params.validate();
  if (params.d() != data.d())
    detail::throw_shape("params and dataset dimensions disagree", params.W.rows(),
                        params.W.cols(), data.X.rows(), data.X.cols());
  // row t of X * W^T holds the pre-activations of all neurons on x_t
  const Matrix pre = data.X * params.W.transpose();
  Matrix P(data.m(), 1);
  P.col(0) = pre.cwiseMax(0.0) * params.v;
  return P;
}

Matrix prediction_matrix(const DeepParams& params, const Dataset& data) {
  data.validate();
  params.validate();
  if (params.input_dim() != data.d())
    detail::throw_shape("params and dataset dimensions disagree", params.input_dim(), 1,
                        data.X.rows(), data.X.cols());
  Matrix activation = data.X;
  for (const DeepParams::Layer& layer : params.hidden)
    activation =
        ((activation * layer.W.transpose()).rowwise() + layer.b.transpose()).cwiseMax(0.0);
  return activation * params.output_W.transpose();
}

namespace {

double cross_entropy_row(const Eigen::Ref<const Vector>& p, Index label) {
  // log-sum-exp with max subtraction; exact for arbitrarily scaled rows
  const double pmax = p.maxCoeff();
  double sum = 0.0;
  for (Index j = 0; j < p.size(); ++j) sum += std::exp(p(j) - pmax);
  return std::log(sum) + pmax - p(label);
}

}  // namespace

double objective(LossKind loss, const Matrix& P, const Matrix& targets) {
  if (P.rows() != targets.rows())
    detail::throw_shape("prediction rows must equal target rows", P.rows(), P.cols(),
                        targets.rows(), targets.cols());
  if (!P.allFinite()) throw std::invalid_argument("prediction matrix has non-finite entries");
  const Index m = P.rows();
  double total = 0.0;
  if (loss == LossKind::SquaredLoss) {
    if (P.cols() != targets.cols())
      detail::throw_shape("prediction and target widths disagree", P.rows(), P.cols(),
                          targets.rows(), targets.cols());
    total = (P - targets).squaredNorm();
  } else {
    for (Index t = 0; t < m; ++t) {
      const Index label = static_cast<Index>(targets(t, 0));
      if (label < 0 || label >= P.cols())
        throw std::invalid_argument("class index out of range at instance " +
                                    std::to_string(t));
      total += cross_entropy_row(P.row(t).transpose(), label);
    }
  }
  return total / static_cast<double>(m);
}

double objective_at_scale(LossKind loss, const Matrix& P, const Matrix& targets, double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("scale factor must be finite");
  return objective(loss, c * P, targets);
}

double row_loss(LossKind loss, const Eigen::Ref<const Vector>& prediction,
                const Eigen::Ref<const Vector>& target) {
  if (loss == LossKind::SquaredLoss) return (prediction - target).squaredNorm();
  return cross_entropy_row(prediction, static_cast<Index>(target(0)));
}

void objective_gradient_two_layer(const TwoLayerParams& params, const Dataset& data,
                                  Matrix& grad_W, Vector& grad_v) {
  if (data.loss != LossKind::SquaredLoss || data.k() != 1)
    throw std::invalid_argument("two-layer gradient is defined for scalar squared loss");
  const Matrix P = prediction_matrix(params, data);
  const Index m = data.m();
  const Vector resid = 2.0 / static_cast<double>(m) * (P.col(0) - data.targets.col(0));
  const Matrix pre = data.X * params.W.transpose();  // m x n
  grad_W = Matrix::Zero(params.n(), params.d());
  grad_v = Vector::Zero(params.n());
  for (Index t = 0; t < m; ++t) {
    for (Index i = 0; i < params.n(); ++i) {
      if (pre(t, i) > 0.0) {
        grad_W.row(i) += resid(t) * params.v(i) * data.X.row(t);
        grad_v(i) += resid(t) * pre(t, i);
      }
    }
  }
}

double objective_floor(LossKind) { return 0.0; }

TwoLayerParams scale_output_weights(const TwoLayerParams& params, double c) {
  TwoLayerParams out = params;
  out.v *= c;
  return out;
}

DeepParams scale_output_weights(const DeepParams& params, double c) {
  DeepParams out = params;
  out.output_W *= c;
  return out;
}

}  // namespace basinlab
