#include "basinlab/datasets.hpp"

#include "basinlab/nets.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace basinlab {

Dataset gen_singleton_hardness(const SingletonHardnessSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(spec.epsilon > 0.0 && spec.epsilon < 0.25))
    throw std::invalid_argument("epsilon must lie in (0, 1/4), got " +
                                std::to_string(spec.epsilon));
  if (spec.loss != LossKind::SquaredLoss)
    throw std::invalid_argument("the explicit hardness construction uses the squared loss");
  Dataset data;
  data.X = Matrix::Zero(2 * spec.d, spec.d);
  data.targets.resize(2 * spec.d, 1);
  for (Index j = 0; j < spec.d; ++j) {
    data.X(2 * j, j) = 0.5;
    data.targets(2 * j, 0) = std::sqrt(2.0 * spec.epsilon);
    data.X(2 * j + 1, j) = -1.0;
    data.targets(2 * j + 1, 0) = 1.0;
  }
  data.prediction_dim = 1;
  data.loss = LossKind::SquaredLoss;
  data.provenance = "singleton_hardness";
  data.validate();
  return data;
}

bool is_singleton_dataset(const Dataset& data) {
  for (Index t = 0; t < data.m(); ++t) {
    int nonzero = 0;
    for (Index j = 0; j < data.d(); ++j)
      if (data.X(t, j) != 0.0) ++nonzero;
    if (nonzero != 1) return false;
  }
  return data.m() > 0;
}

Dataset gen_fullrank(const FullRankSpec& spec, RngStream& rng) {
  if (spec.m < 1 || spec.d < 1) throw std::invalid_argument("need m, d >= 1");
  if (spec.m > spec.d)
    throw std::invalid_argument("full-rank data needs m <= d, got m=" +
                                std::to_string(spec.m) + " d=" + std::to_string(spec.d));
  Dataset data;
  data.prediction_dim = 1;
  data.loss = LossKind::SquaredLoss;
  data.provenance = "fullrank";
  for (int attempt = 0; attempt < 100; ++attempt) {
    data.X.resize(spec.m, spec.d);
    for (Index t = 0; t < spec.m; ++t)
      data.X.row(t) = rng.gaussian_vector(spec.d).transpose();
    const Eigen::JacobiSVD<Matrix> svd(data.X);
    const Vector sv = svd.singularValues();
    if (sv(spec.m - 1) > 1e-8 * sv(0)) break;
    if (attempt == 99) throw std::runtime_error("failed to draw a full-rank instance matrix");
  }
  if (spec.targets) {
    if (spec.targets->size() != spec.m)
      throw std::invalid_argument("target vector length must equal m");
    data.targets = spec.targets->eval();
    data.targets.resize(spec.m, 1);
  } else {
    data.targets = rng.gaussian_vector(spec.m);
    data.targets.resize(spec.m, 1);
  }
  data.validate();
  return data;
}

double clustered_radius_bound(Index d) {
  const double arg = std::sqrt(2.0 * std::numbers::pi) /
                     (16.0 * static_cast<double>(d) * std::sqrt(static_cast<double>(d)));
  return 2.0 * std::sin(arg);
}

Dataset gen_clustered(const ClusteredSpec& spec, RngStream& rng, ClusteredInfo* info) {
  if (spec.k < 1 || spec.d < 1) throw std::invalid_argument("need k, d >= 1");
  if (spec.k > spec.d) throw std::invalid_argument("clustered data needs k <= d");
  if (static_cast<Index>(spec.points_per_cluster.size()) != spec.k)
    throw std::invalid_argument("points_per_cluster must have k entries");
  if (!(spec.radius_fraction >= 0.0 && spec.radius_fraction <= 1.0))
    throw std::invalid_argument("radius_fraction must lie in [0, 1]");
  if (spec.gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");

  Matrix centers;
  if (spec.centers) {
    centers = *spec.centers;
    if (centers.rows() != spec.k || centers.cols() != spec.d)
      detail::throw_shape("centers must be k x d", centers.rows(), centers.cols(), spec.k,
                          spec.d);
  } else {
    // near-orthogonal directions keep sigma_min(C^T) well away from zero
    Matrix G(spec.d, spec.k);
    for (Index j = 0; j < spec.k; ++j) G.col(j) = rng.gaussian_vector(spec.d);
    const Eigen::HouseholderQR<Matrix> qr(G);
    const Matrix Q = qr.householderQ() * Matrix::Identity(spec.d, spec.k);
    centers.resize(spec.k, spec.d);
    for (Index j = 0; j < spec.k; ++j)
      centers.row(j) =
          Q.col(j).transpose() * rng.uniform(spec.center_norm_min, 2.0 * spec.center_norm_min);
  }

  const double bound = clustered_radius_bound(spec.d);
  Vector radii(spec.k);
  for (Index j = 0; j < spec.k; ++j)
    radii(j) = spec.radius_fraction * bound * centers.row(j).norm();

  Vector cluster_targets;
  if (spec.cluster_targets) {
    if (spec.cluster_targets->size() != spec.k)
      throw std::invalid_argument("cluster_targets must have k entries");
    cluster_targets = *spec.cluster_targets;
  } else {
    cluster_targets = rng.gaussian_vector(spec.k);
  }

  Index m = 0;
  for (Index count : spec.points_per_cluster) {
    if (count < 1) throw std::invalid_argument("every cluster needs at least one point");
    m += count;
  }

  Dataset data;
  data.X.resize(m, spec.d);
  data.targets.resize(m, 1);
  data.cluster_ids.reserve(static_cast<size_t>(m));
  data.prediction_dim = 1;
  data.loss = LossKind::SquaredLoss;
  data.provenance = "clustered";
  Index row = 0;
  for (Index j = 0; j < spec.k; ++j) {
    const Vector lipschitz_dir = rng.unit_vector(spec.d);
    for (Index p = 0; p < spec.points_per_cluster[static_cast<size_t>(j)]; ++p) {
      Vector offset = Vector::Zero(spec.d);
      if (radii(j) > 0.0) {
        const double r =
            radii(j) * std::pow(rng.uniform01(), 1.0 / static_cast<double>(spec.d));
        offset = r * rng.unit_vector(spec.d);
      }
      data.X.row(row) = centers.row(j) + offset.transpose();
      data.targets(row, 0) = cluster_targets(j) + spec.gamma * lipschitz_dir.dot(offset);
      data.cluster_ids.push_back(static_cast<int>(j) + 1);
      ++row;
    }
  }
  data.validate();

  ClusteredInfo local;
  local.radii = radii;
  local.delta_max = radii.maxCoeff();
  local.B = 0.0;
  for (Index t = 0; t < m; ++t) local.B = std::max(local.B, data.X.row(t).norm());
  local.c = centers.rowwise().norm().minCoeff();
  local.gamma = spec.gamma;
  const Eigen::JacobiSVD<Matrix> svd(centers.transpose());
  local.sigma_max = svd.singularValues()(0);
  local.sigma_min = svd.singularValues()(std::min(spec.k, spec.d) - 1);
  local.centers = centers;
  local.cluster_targets = cluster_targets;
  validate_clustered(data, local);
  if (info) *info = local;
  return data;
}

void validate_clustered(const Dataset& data, const ClusteredInfo& info) {
  data.validate();
  if (data.cluster_ids.empty())
    throw std::invalid_argument("clustered dataset needs cluster assignments");
  const Index k = info.centers.rows();
  const Index d = data.d();
  const double bound = clustered_radius_bound(d);
  for (Index j = 0; j < k; ++j) {
    const double norm = info.centers.row(j).norm();
    const double ratio = norm > 0.0 ? info.radii(j) / norm : std::numeric_limits<double>::infinity();
    if (ratio > bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "cluster " << j + 1 << " radius violates the clustered-radius bound: delta/|c| = "
          << ratio << " > 2*sin(sqrt(2*pi)/(16*d*sqrt(d))) = " << bound;
      throw std::invalid_argument(msg.str());
    }
    if (norm + 1e-12 < info.c)
      throw std::invalid_argument("center norm below the recorded minimum c");
  }
  for (Index t = 0; t < data.m(); ++t) {
    const int assigned = data.cluster_ids[static_cast<size_t>(t)];
    int within = 0;
    for (Index j = 0; j < k; ++j) {
      const double dist = (data.X.row(t) - info.centers.row(j)).norm();
      if (dist <= info.radii(j) + 1e-12) {
        ++within;
        if (j + 1 != assigned)
          throw std::invalid_argument("instance " + std::to_string(t) +
                                      " lies inside a cluster it is not assigned to");
      }
    }
    if (within != 1)
      throw std::invalid_argument("instance " + std::to_string(t) +
                                  " is not within delta of exactly one center");
    if (data.X.row(t).norm() > info.B * (1.0 + 1e-12))
      throw std::invalid_argument("instance norm exceeds the recorded bound B");
  }
  for (Index t = 0; t < data.m(); ++t) {
    for (Index u = t + 1; u < data.m(); ++u) {
      if (data.cluster_ids[static_cast<size_t>(t)] != data.cluster_ids[static_cast<size_t>(u)])
        continue;
      const double lhs = std::fabs(data.targets(t, 0) - data.targets(u, 0));
      const double rhs = info.gamma * (data.X.row(t) - data.X.row(u)).norm();
      if (lhs > rhs + 1e-12)
        throw std::invalid_argument("intra-cluster targets violate the Lipschitz bullet at "
                                    "instances " +
                                    std::to_string(t) + ", " + std::to_string(u));
    }
  }
}

std::pair<Dataset, TwoLayerParams> gen_lowrank_realizable(const LowRankSpec& spec,
                                                          RngStream& rng) {
  if (spec.rank < 1 || spec.rank > std::min(spec.m, spec.d))
    throw std::invalid_argument("need 1 <= rank <= min(m, d)");
  if (spec.teacher_width < 1) throw std::invalid_argument("teacher width must be >= 1");
  if (!(spec.B > 0.0)) throw std::invalid_argument("B must be positive");

  Dataset data;
  data.prediction_dim = 1;
  data.loss = LossKind::SquaredLoss;
  data.provenance = "lowrank_realizable";
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix G(spec.d, spec.rank);
    for (Index j = 0; j < spec.rank; ++j) G.col(j) = rng.gaussian_vector(spec.d);
    const Eigen::HouseholderQR<Matrix> qr(G);
    const Matrix U = qr.householderQ() * Matrix::Identity(spec.d, spec.rank);
    Matrix coeff(spec.m, spec.rank);
    for (Index t = 0; t < spec.m; ++t)
      coeff.row(t) = rng.gaussian_vector(spec.rank).transpose();
    data.X = coeff * U.transpose();
    double max_norm = 0.0;
    for (Index t = 0; t < spec.m; ++t) max_norm = std::max(max_norm, data.X.row(t).norm());
    if (max_norm > 0.0) data.X /= max_norm * (1.0 + 1e-12);
    const Eigen::JacobiSVD<Matrix> svd(data.X);
    const Vector sv = svd.singularValues();
    if (sv(spec.rank - 1) > 1e-8 * sv(0) &&
        (sv.size() <= spec.rank || sv(spec.rank) < 1e-10 * sv(0)))
      break;
    if (attempt == 99) throw std::runtime_error("failed to draw a rank-r instance matrix");
  }

  TwoLayerParams teacher;
  teacher.W.resize(spec.teacher_width, spec.d);
  teacher.v.resize(spec.teacher_width);
  for (Index i = 0; i < spec.teacher_width; ++i) {
    // |v_i| * |w_i| <= B with a balanced split
    const double product = spec.B * std::sqrt(rng.uniform01());
    const double split = std::sqrt(product);
    teacher.W.row(i) = split * rng.unit_vector(spec.d).transpose();
    teacher.v(i) = rng.sign() * split;
  }

  data.targets.resize(spec.m, 1);
  for (Index t = 0; t < spec.m; ++t)
    data.targets(t, 0) = forward_two_layer(teacher, data.X.row(t).transpose());
  data.validate();
  return {data, teacher};
}

double p_epsilon(double eps, Index n, double B, Index rank) {
  if (rank < 2) throw std::invalid_argument("p_epsilon needs rank >= 2");
  if (!(eps > 0.0) || !(B > 0.0) || n < 1)
    throw std::invalid_argument("p_epsilon needs eps, B > 0 and n >= 1");
  const double nb = static_cast<double>(n) * B;
  const double ratio = std::sqrt(eps) / nb;
  if (ratio > 2.0)
    throw std::invalid_argument("p_epsilon domain violation: sqrt(eps)/(nB) must be <= 2");
  const double base = ratio * std::sqrt(1.0 - eps / (4.0 * nb * nb));
  return std::pow(base, static_cast<double>(rank - 1)) /
         (2.0 * std::numbers::pi * static_cast<double>(rank - 1));
}

}  // namespace basinlab
