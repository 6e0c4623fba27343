#pragma once

#include "basinlab/rng.hpp"
#include "basinlab/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace basinlab {

/// d-dimensional extension of the two-point hardness sample: per coordinate j,
/// (x = 0.5*e_j, y = sqrt(2*eps)) and (x = -e_j, y = 1). Each coordinate has
/// an independent good minimum (value eps contribution) and bad minimum (1/2).
struct SingletonHardnessSpec {
  Index d = 1;
  double epsilon = 0.1;          // must be < 1/4
  LossKind loss = LossKind::SquaredLoss;
};

Dataset gen_singleton_hardness(const SingletonHardnessSpec& spec);

/// True iff every instance has exactly one nonzero coordinate.
bool is_singleton_dataset(const Dataset& data);

struct FullRankSpec {
  Index m = 1;
  Index d = 1;
  std::optional<Vector> targets;  // defaults to iid standard normal
};

/// Gaussian rows, re-drawn on the probability-zero rank-deficient event;
/// rank m is verified through the singular values.
Dataset gen_fullrank(const FullRankSpec& spec, RngStream& rng);

struct ClusteredSpec {
  Index d = 2;
  Index k = 1;                       // k <= d
  std::vector<Index> points_per_cluster;
  double radius_fraction = 1.0;      // delta_j as a fraction of the max allowed
  double gamma = 0.0;                // intra-cluster target Lipschitz constant
  double center_norm_min = 1.0;      // c; centers drawn with norms in [c, 2c]
  std::optional<Matrix> centers;     // k x d, generated when absent
  std::optional<Vector> cluster_targets;  // y-hat, defaults to iid normal
};

struct ClusteredInfo {
  Vector radii;       // delta_j
  double delta_max = 0.0;
  double B = 0.0;     // max instance norm
  double c = 0.0;     // min center norm
  double gamma = 0.0;
  double sigma_max = 0.0;  // singular values of C^T
  double sigma_min = 0.0;
  Matrix centers;
  Vector cluster_targets;
};

/// Clustered-data radius bound 2*sin(sqrt(2*pi) / (16 d sqrt(d))).
double clustered_radius_bound(Index d);

Dataset gen_clustered(const ClusteredSpec& spec, RngStream& rng, ClusteredInfo* info);

/// Re-checks every clustered-data condition on an arbitrary dataset with cluster ids.
void validate_clustered(const Dataset& data, const ClusteredInfo& info);

struct LowRankSpec {
  Index d = 2;
  Index m = 2;
  Index rank = 2;            // intrinsic rank r <= min(m, d)
  Index teacher_width = 1;
  double B = 1.0;            // |v*_i| * |w*_i| <= B
};

/// X = G U^T with orthonormal U, rows scaled into the unit ball; targets are
/// the teacher's outputs, so the data is exactly realizable.
std::pair<Dataset, TwoLayerParams> gen_lowrank_realizable(const LowRankSpec& spec,
                                                          RngStream& rng);

/// p_eps of the low-intrinsic-dimension theorem:
/// (1 / (2 pi (rank-1))) * (sqrt(eps)/(nB) * sqrt(1 - eps/(4 n^2 B^2)))^(rank-1).
double p_epsilon(double eps, Index n, double B, Index rank);

}  // namespace basinlab
