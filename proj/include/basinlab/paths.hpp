#pragma once

#include "basinlab/init.hpp"
#include "basinlab/nets.hpp"
#include "basinlab/stats.hpp"
#include "basinlab/types.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace basinlab {

using NetParams = std::variant<TwoLayerParams, DeepParams>;

Matrix prediction_matrix(const NetParams& params, const Dataset& data);
NetParams interpolate_params(const NetParams& a, const NetParams& b, double lambda);
NetParams scale_output_weights(const NetParams& params, double c);

/// Target-value schedule of the monotone-path construction, restricted to
/// lambda in [0,1]: (1 - lambda/3) * L0 + (lambda/3) * max(Lzero, L1).
/// Strictly decreasing; requires L0 > max(Lzero, L1).
double v_schedule(double lambda, double L0, double Lzero, double L1);

/// Smallest probed c (doubling from 1) with L(c*P) >= L0 + eps, or nullopt
/// if none exists below c_max (e.g. P = 0, where scale has no effect).
std::optional<double> condition1_margin(LossKind loss, const Matrix& P,
                                        const Matrix& targets, double L0,
                                        double eps, double c_max = 1e8);

/// The unique c on the increasing branch of the convex map c -> L(c*P) with
/// L(c*P) = target_value, via bisection; |L(c*P) - v| <= 1e-10 * max(1, v).
double rescale_root_find(LossKind loss, const Matrix& P, const Matrix& targets,
                         double target_value, double c_hi);

struct PathSpec {
  NetParams start;
  NetParams end;
  int grid_n = 1000;
  double epsilon = 1e-3;   // condition-1 margin
  double c_max = 1e8;
};

struct PathSample {
  double lambda = 0.0;
  double c = 1.0;          // applied output-layer rescale factor
  double objective = 0.0;
  NetParams params;        // rescaled parameters at this sample
};

struct MonotonePathResult {
  std::vector<PathSample> samples;        // lambda grid, c = c_tilde(lambda)
  std::vector<double> schedule;           // v^(lambda) targets
  std::vector<PathSample> final_segment;  // closing rescale toward W^(1)
  bool monotone = false;
  double max_violation = 0.0;  // largest non-decrease across consecutive samples
};

struct PathConditionError : std::runtime_error {
  PathConditionError(std::string what, int condition, double lambda = -1.0)
      : std::runtime_error(std::move(what)), condition(condition), lambda(lambda) {}
  int condition;   // which path-construction condition failed (1 or 2)
  double lambda;   // grid point at fault for condition 1, else -1
};

/// Builds the strictly monotone path: per grid lambda rescales the output
/// layer of the straight-line interpolant by the root c_tilde(lambda) matching
/// the schedule, then closes with a rescale of W^(1) down to the level of
/// L(P(W^(1))). Strict decrease across all consecutive samples is asserted
/// into `monotone` / `max_violation`, never silently.
MonotonePathResult build_monotone_path(const PathSpec& spec, const Dataset& data);

/// Monte Carlo for condition 2: P[L(P(W0)) > L(0)] against the
/// (1/2)(1 - 2^-n_{h-1}) bound, plus the P(W0) != 0 frequency whose
/// 1 - 2^-n_{h-1} bound underlies it.
struct Condition2Report {
  MCReport main;          // event L(P(W0)) > L(0)
  MCReport nonzero;       // event P(W0) != 0
};
Condition2Report check_condition2_probability(const std::vector<Index>& layer_sizes,
                                              const InitDistribution& dist,
                                              const Dataset& data, long trials,
                                              int workers = 1);

}  // namespace basinlab
