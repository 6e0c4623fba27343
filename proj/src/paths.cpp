#include "basinlab/paths.hpp"

#include "basinlab/parallel.hpp"

#include <cmath>
#include <sstream>

namespace basinlab {

Matrix prediction_matrix(const NetParams& params, const Dataset& data) {
  return std::visit([&](const auto& p) { return prediction_matrix(p, data); }, params);
}

NetParams interpolate_params(const NetParams& a, const NetParams& b, double lambda) {
  if (a.index() != b.index())
    throw std::invalid_argument("cannot interpolate between different architectures");
  if (std::holds_alternative<TwoLayerParams>(a)) {
    const auto& pa = std::get<TwoLayerParams>(a);
    const auto& pb = std::get<TwoLayerParams>(b);
    if (pa.W.rows() != pb.W.rows() || pa.W.cols() != pb.W.cols())
      detail::throw_shape("endpoint shapes disagree", pa.W.rows(), pa.W.cols(), pb.W.rows(),
                          pb.W.cols());
    TwoLayerParams out;
    out.W = (1.0 - lambda) * pa.W + lambda * pb.W;
    out.v = (1.0 - lambda) * pa.v + lambda * pb.v;
    return out;
  }
  const auto& pa = std::get<DeepParams>(a);
  const auto& pb = std::get<DeepParams>(b);
  if (pa.hidden.size() != pb.hidden.size())
    throw std::invalid_argument("endpoint depths disagree");
  DeepParams out;
  out.hidden.resize(pa.hidden.size());
  for (size_t l = 0; l < pa.hidden.size(); ++l) {
    if (pa.hidden[l].W.rows() != pb.hidden[l].W.rows() ||
        pa.hidden[l].W.cols() != pb.hidden[l].W.cols())
      detail::throw_shape("endpoint shapes disagree at layer " + std::to_string(l + 1),
                          pa.hidden[l].W.rows(), pa.hidden[l].W.cols(), pb.hidden[l].W.rows(),
                          pb.hidden[l].W.cols());
    out.hidden[l].W = (1.0 - lambda) * pa.hidden[l].W + lambda * pb.hidden[l].W;
    out.hidden[l].b = (1.0 - lambda) * pa.hidden[l].b + lambda * pb.hidden[l].b;
  }
  out.output_W = (1.0 - lambda) * pa.output_W + lambda * pb.output_W;
  return out;
}

NetParams scale_output_weights(const NetParams& params, double c) {
  return std::visit([&](const auto& p) { return NetParams(scale_output_weights(p, c)); },
                    params);
}

double v_schedule(double lambda, double L0, double Lzero, double L1) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("schedule lambda must lie in [0, 1]");
  const double tail = std::max(Lzero, L1);
  if (!(L0 > tail))
    throw std::invalid_argument("schedule needs L0 > max(L(0), L1)");
  return (1.0 - lambda / 3.0) * L0 + (lambda / 3.0) * tail;
}

std::optional<double> condition1_margin(LossKind loss, const Matrix& P,
                                        const Matrix& targets, double L0, double eps,
                                        double c_max) {
  if (!(c_max > 0.0)) throw std::invalid_argument("c_max must be positive");
  for (double c = 1.0; c <= c_max; c *= 2.0) {
    if (objective_at_scale(loss, P, targets, c) >= L0 + eps) return c;
  }
  return std::nullopt;
}

double rescale_root_find(LossKind loss, const Matrix& P, const Matrix& targets,
                         double target_value, double c_hi) {
  if (!(c_hi > 0.0)) throw std::invalid_argument("c_hi must be positive");
  auto f = [&](double c) { return objective_at_scale(loss, P, targets, c); };
  if (!(f(c_hi) > target_value)) {
    std::ostringstream msg;
    msg << "bracket violation: L(c_hi*P) = " << f(c_hi) << " must exceed target "
        << target_value;
    throw std::invalid_argument(msg.str());
  }
  double lo = 0.0;
  if (!(f(lo) < target_value)) {
    // level sits below L(0): restrict to the increasing branch right of the
    // scalar minimizer of the convex map c -> L(c*P)
    double a = 0.0, b = c_hi;
    for (int i = 0; i < 200; ++i) {
      const double m1 = a + (b - a) / 3.0;
      const double m2 = b - (b - a) / 3.0;
      if (f(m1) <= f(m2))
        b = m2;
      else
        a = m1;
    }
    lo = 0.5 * (a + b);
    if (!(f(lo) < target_value)) {
      std::ostringstream msg;
      msg << "bracket violation: min_c L(c*P) = " << f(lo) << " is not below target "
          << target_value;
      throw std::invalid_argument(msg.str());
    }
  }
  double hi = c_hi;
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double value = f(mid);
    if (std::fabs(value - target_value) <= 1e-12 * std::max(1.0, target_value)) break;
    if (value < target_value)
      lo = mid;
    else
      hi = mid;
  }
  if (std::fabs(f(mid) - target_value) > 1e-10 * std::max(1.0, target_value))
    throw std::runtime_error("rescale root-finding failed to meet tolerance");
  return mid;
}

MonotonePathResult build_monotone_path(const PathSpec& spec, const Dataset& data) {
  data.validate();
  if (spec.grid_n < 1) throw std::invalid_argument("grid resolution must be >= 1");
  if (!(spec.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const Matrix P0 = prediction_matrix(spec.start, data);
  const Matrix P1 = prediction_matrix(spec.end, data);
  const double L0 = objective(data.loss, P0, data.targets);
  const double L1 = objective(data.loss, P1, data.targets);
  const double Lzero = objective(data.loss, Matrix::Zero(P0.rows(), P0.cols()), data.targets);
  if (!(L1 < L0)) {
    std::ostringstream msg;
    msg << "path rejected: end objective " << L1 << " must be strictly below start " << L0;
    throw PathConditionError(msg.str(), 0);
  }
  if (!(L0 > Lzero)) {
    std::ostringstream msg;
    msg << "path condition 2 fails: L(P(W0)) = " << L0
        << " does not exceed L(0) = " << Lzero;
    throw PathConditionError(msg.str(), 2);
  }

  MonotonePathResult result;
  result.samples.reserve(static_cast<size_t>(spec.grid_n) + 1);
  result.schedule.reserve(static_cast<size_t>(spec.grid_n) + 1);
  for (int k = 0; k <= spec.grid_n; ++k) {
    const double lambda = static_cast<double>(k) / static_cast<double>(spec.grid_n);
    const NetParams at = interpolate_params(spec.start, spec.end, lambda);
    const Matrix P = prediction_matrix(at, data);
    const double target = v_schedule(lambda, L0, Lzero, L1);
    result.schedule.push_back(target);
    double c_tilde = 1.0;
    if (k > 0) {
      const auto c_hi = condition1_margin(data.loss, P, data.targets, L0, spec.epsilon,
                                          spec.c_max);
      if (!c_hi) {
        std::ostringstream msg;
        msg << "path condition 1 fails at lambda = " << lambda
            << ": no rescale reaches L(P(W0)) + eps";
        throw PathConditionError(msg.str(), 1, lambda);
      }
      c_tilde = rescale_root_find(data.loss, P, data.targets, target, *c_hi);
    }
    PathSample sample;
    sample.lambda = lambda;
    sample.c = c_tilde;
    sample.objective = k == 0 ? L0 : objective_at_scale(data.loss, P, data.targets, c_tilde);
    sample.params = scale_output_weights(at, c_tilde);
    result.samples.push_back(std::move(sample));
  }

  // closing rescale along the ray of W^(1): stop at the first crossing of the
  // level L1 (the theorem promises an endpoint of equal value, which need not
  // be W^(1) itself when the scalar minimizer sits inside the interval)
  const double c_start = result.samples.back().c;
  auto ray = [&](double c) { return objective_at_scale(data.loss, P1, data.targets, c); };
  double inner = 1.0, outer = c_start;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (inner + outer);
    if (ray(mid) > L1)
      outer = mid;
    else
      inner = mid;
  }
  const double c_end = inner;  // ray(c_end) <= L1, within bisection residual of it
  const int segment_n = std::max(2, spec.grid_n / 10);
  for (int k = 1; k <= segment_n; ++k) {
    const double c = c_start + (c_end - c_start) * static_cast<double>(k) /
                                   static_cast<double>(segment_n);
    PathSample sample;
    sample.lambda = 1.0;
    sample.c = c;
    sample.objective = ray(c);
    sample.params = scale_output_weights(spec.end, c);
    result.final_segment.push_back(std::move(sample));
  }

  result.monotone = true;
  result.max_violation = 0.0;
  double previous = result.samples.front().objective;
  auto feed = [&](const PathSample& sample) {
    const double diff = sample.objective - previous;
    if (!(diff < 0.0)) {
      result.monotone = false;
      result.max_violation = std::max(result.max_violation, diff);
    }
    previous = sample.objective;
  };
  for (size_t i = 1; i < result.samples.size(); ++i) feed(result.samples[i]);
  for (const PathSample& sample : result.final_segment) feed(sample);
  return result;
}

Condition2Report check_condition2_probability(const std::vector<Index>& layer_sizes,
                                              const InitDistribution& dist,
                                              const Dataset& data, long trials,
                                              int workers) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  if (layer_sizes.size() < 2) throw std::invalid_argument("need [input, ..., output] sizes");
  if (layer_sizes.front() != data.d() || layer_sizes.back() != data.k())
    throw std::invalid_argument("layer sizes disagree with dataset dimensions");
  const double Lzero =
      objective(data.loss, Matrix::Zero(data.m(), data.k()), data.targets);
  std::vector<std::uint8_t> event(static_cast<size_t>(trials), 0);
  std::vector<std::uint8_t> nonzero(static_cast<size_t>(trials), 0);
  std::vector<std::uint8_t> errored(static_cast<size_t>(trials), 0);
  parallel_for(trials, workers, [&](long i) {
    try {
      const DeepParams net = sample_deep(dist, layer_sizes, static_cast<std::uint64_t>(i));
      const Matrix P = prediction_matrix(net, data);
      nonzero[static_cast<size_t>(i)] = P.cwiseAbs().maxCoeff() > 0.0 ? 1 : 0;
      event[static_cast<size_t>(i)] =
          objective(data.loss, P, data.targets) > Lzero ? 1 : 0;
    } catch (const std::exception&) {
      errored[static_cast<size_t>(i)] = 1;
    }
  });
  long event_count = 0, nonzero_count = 0, error_count = 0;
  for (long i = 0; i < trials; ++i) {
    event_count += event[static_cast<size_t>(i)];
    nonzero_count += nonzero[static_cast<size_t>(i)];
    error_count += errored[static_cast<size_t>(i)];
  }
  const Index last_hidden = layer_sizes[layer_sizes.size() - 2];
  const double two_pow = std::pow(2.0, -static_cast<double>(last_hidden));
  Condition2Report report;
  report.main = finalize_report("prop1", trials, event_count, error_count,
                                0.5 * (1.0 - two_pow), BoundSide::LowerBound, dist.rng_seed);
  report.nonzero =
      finalize_report("prop2_nonzero_predictions", trials, nonzero_count, error_count,
                      1.0 - two_pow, BoundSide::LowerBound, dist.rng_seed);
  return report;
}

}  // namespace basinlab
