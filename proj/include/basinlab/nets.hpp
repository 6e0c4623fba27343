#pragma once

#include "basinlab/types.hpp"

namespace basinlab {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

double forward_two_layer(const TwoLayerParams& params,
                         const Eigen::Ref<const Vector>& x);

Vector forward_deep(const DeepParams& params, const Eigen::Ref<const Vector>& x);

/// Stacks the forward pass over all instances; row t is the prediction on x_t.
Matrix prediction_matrix(const TwoLayerParams& params, const Dataset& data);
Matrix prediction_matrix(const DeepParams& params, const Dataset& data);

/// Average loss (1/m) sum_t l(P_t, y_t). Cross-entropy is evaluated in
/// log-space so arbitrarily large prediction scales stay finite.
double objective(LossKind loss, const Matrix& P, const Matrix& targets);

double objective_at_scale(LossKind loss, const Matrix& P, const Matrix& targets,
                          double c);

inline double objective(const Dataset& data, const Matrix& P) {
  return objective(data.loss, P, data.targets);
}

/// Per-row loss primitives used by the loss-convexity property tests.
double row_loss(LossKind loss, const Eigen::Ref<const Vector>& prediction,
                const Eigen::Ref<const Vector>& target);

/// Closed-form gradient of the squared-loss objective of a two-layer net.
/// Defined wherever no pre-activation sits exactly at zero; relu'(0) := 0.
void objective_gradient_two_layer(const TwoLayerParams& params, const Dataset& data,
                                  Matrix& grad_W, Vector& grad_v);

/// The minimum of the loss over unconstrained predictions: the floor every
/// basin value must respect. Zero for both implemented losses.
double objective_floor(LossKind loss);

TwoLayerParams scale_output_weights(const TwoLayerParams& params, double c);
DeepParams scale_output_weights(const DeepParams& params, double c);

}  // namespace basinlab
