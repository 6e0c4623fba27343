#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "basinlab/datasets.hpp"
#include "basinlab/nets.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>

using namespace basinlab;

TEST_CASE("singleton hardness: instances and analytic minima") {
  const Dataset data = gen_singleton_hardness({1, 0.1, LossKind::SquaredLoss});
  REQUIRE(data.m() == 2);
  CHECK(data.X(0, 0) == 0.5);
  CHECK(data.targets(0, 0) == doctest::Approx(std::sqrt(0.2)));
  CHECK(data.X(1, 0) == -1.0);
  CHECK(data.targets(1, 0) == 1.0);
  CHECK(is_singleton_dataset(data));
  // the two single-neuron minima of the construction
  TwoLayerParams good, bad;
  good.W.resize(1, 1);
  good.W << -1.0;
  good.v.resize(1);
  good.v << 1.0;
  bad.W.resize(1, 1);
  bad.W << 2.0 * std::sqrt(0.2);
  bad.v = good.v;
  CHECK(objective(data.loss, prediction_matrix(good, data), data.targets) ==
        doctest::Approx(0.1).epsilon(1e-14));
  CHECK(objective(data.loss, prediction_matrix(bad, data), data.targets) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("singleton hardness: d-dimensional extension and validation") {
  const Dataset data = gen_singleton_hardness({4, 0.2, LossKind::SquaredLoss});
  CHECK(data.m() == 8);
  CHECK(is_singleton_dataset(data));
  CHECK(data.provenance == "singleton_hardness");
  CHECK_THROWS(gen_singleton_hardness({2, 0.25, LossKind::SquaredLoss}));
  CHECK_THROWS(gen_singleton_hardness({2, -0.1, LossKind::SquaredLoss}));
}

TEST_CASE("singleton hardness: coordinates are independent (cross-partials vanish)") {
  const Dataset data = gen_singleton_hardness({3, 0.1, LossKind::SquaredLoss});
  TwoLayerParams p;
  p.W.resize(1, 3);
  p.W << 0.7, -0.4, 1.2;
  p.v.resize(1);
  p.v << 1.0;
  auto objective_at = [&](const TwoLayerParams& q) {
    return objective(data.loss, prediction_matrix(q, data), data.targets);
  };
  const double h = 1e-5;
  for (Index a = 0; a < 3; ++a) {
    for (Index b = 0; b < 3; ++b) {
      if (a == b) continue;
      TwoLayerParams q = p;
      auto shift = [&](double da, double db) {
        q = p;
        q.W(0, a) += da;
        q.W(0, b) += db;
        return objective_at(q);
      };
      const double cross =
          (shift(h, h) - shift(h, -h) - shift(-h, h) + shift(-h, -h)) / (4.0 * h * h);
      CHECK(std::fabs(cross) < 1e-6);
    }
  }
}

TEST_CASE("full-rank generator: rank and Gram solvability") {
  RngStream rng(7, "fullrank");
  const Dataset data = gen_fullrank({5, 8, std::nullopt}, rng);
  CHECK(data.m() == 5);
  const Eigen::JacobiSVD<Matrix> svd(data.X);
  CHECK(svd.singularValues()(4) > 1e-8 * svd.singularValues()(0));
  const Matrix gram = data.X * data.X.transpose();
  Vector e1 = Vector::Zero(5);
  e1(0) = 1.0;
  const Vector a = Eigen::LDLT<Matrix>(gram).solve(e1);
  CHECK((gram * a - e1).norm() <= 1e-8);
  CHECK_THROWS(gen_fullrank({6, 5, std::nullopt}, rng));
  // degenerate but valid: one instance in one dimension
  const Dataset tiny = gen_fullrank({1, 1, std::nullopt}, rng);
  CHECK(tiny.X(0, 0) != 0.0);
}

TEST_CASE("clustered radius bound formula") {
  const double bound10 = clustered_radius_bound(10);
  const double arg = std::sqrt(2.0 * std::numbers::pi) / (16.0 * 10.0 * std::sqrt(10.0));
  CHECK(bound10 == doctest::Approx(2.0 * std::sin(arg)).epsilon(1e-15));
  CHECK(bound10 == doctest::Approx(9.9083e-3).epsilon(1e-3));
}

TEST_CASE("clustered generator: degenerate single cluster of copies") {
  RngStream rng(11, "clustered");
  ClusteredSpec spec;
  spec.d = 3;
  spec.k = 1;
  spec.points_per_cluster = {5};
  spec.radius_fraction = 0.0;
  spec.gamma = 0.0;
  ClusteredInfo info;
  const Dataset data = gen_clustered(spec, rng, &info);
  CHECK(data.m() == 5);
  for (Index t = 1; t < 5; ++t) CHECK(data.X.row(t) == data.X.row(0));
  CHECK(info.delta_max == 0.0);
}

TEST_CASE("clustered generator: validator passes and records singular values") {
  RngStream rng(13, "clustered2");
  ClusteredSpec spec;
  spec.d = 10;
  spec.k = 3;
  spec.points_per_cluster = {4, 4, 4};
  spec.radius_fraction = 0.5;
  spec.gamma = 0.5;
  ClusteredInfo info;
  const Dataset data = gen_clustered(spec, rng, &info);
  CHECK(info.sigma_min > 0.0);
  CHECK(info.sigma_max >= info.sigma_min);
  CHECK(info.B >= info.c);
  validate_clustered(data, info);  // no throw
  // pairwise Lipschitz bullet holds with the recorded gamma
  for (Index t = 0; t < data.m(); ++t)
    for (Index u = t + 1; u < data.m(); ++u)
      if (data.cluster_ids[t] == data.cluster_ids[u])
        CHECK(std::fabs(data.targets(t, 0) - data.targets(u, 0)) <=
              info.gamma * (data.X.row(t) - data.X.row(u)).norm() + 1e-12);
}

TEST_CASE("clustered generator: radius violations name the bound") {
  RngStream rng(17, "clustered3");
  ClusteredSpec spec;
  spec.d = 4;
  spec.k = 1;
  spec.points_per_cluster = {2};
  spec.radius_fraction = 0.5;
  ClusteredInfo info;
  const Dataset data = gen_clustered(spec, rng, &info);
  ClusteredInfo forged = info;
  forged.radii(0) = 10.0 * info.centers.row(0).norm();  // way past the bound
  try {
    validate_clustered(data, forged);
    FAIL("expected radius violation");
  } catch (const std::invalid_argument& err) {
    CHECK(std::string(err.what()).find("2*sin(sqrt(2*pi)") != std::string::npos);
  }
}

TEST_CASE("low-rank realizable: teacher fits exactly and rank is as planted") {
  RngStream rng(19, "lowrank");
  LowRankSpec spec;
  spec.d = 6;
  spec.m = 8;
  spec.rank = 2;
  spec.teacher_width = 2;
  spec.B = 1.0;
  const auto [data, teacher] = gen_lowrank_realizable(spec, rng);
  CHECK(objective(data.loss, prediction_matrix(teacher, data), data.targets) <= 1e-12);
  const Eigen::JacobiSVD<Matrix> svd(data.X);
  CHECK(svd.singularValues()(1) > 1e-8 * svd.singularValues()(0));
  CHECK(svd.singularValues()(2) < 1e-10 * svd.singularValues()(0));
  for (Index t = 0; t < data.m(); ++t) CHECK(data.X.row(t).norm() <= 1.0);
  for (Index i = 0; i < teacher.n(); ++i)
    CHECK(std::fabs(teacher.v(i)) * teacher.W.row(i).norm() <= spec.B + 1e-12);
}

TEST_CASE("low-rank realizable: rank 1 means collinear instances") {
  RngStream rng(23, "lowrank1");
  const auto [data, teacher] = gen_lowrank_realizable({4, 5, 1, 1, 1.0}, rng);
  for (Index t = 1; t < data.m(); ++t) {
    const Matrix pair = (Matrix(2, 4) << data.X.row(0), data.X.row(t)).finished();
    const Eigen::JacobiSVD<Matrix> svd(pair);
    CHECK(svd.singularValues()(1) <= 1e-10 * svd.singularValues()(0));
  }
}

TEST_CASE("p_epsilon formula") {
  const double p = p_epsilon(0.25, 1, 1.0, 2);
  const double expected = 0.5 * std::sqrt(1.0 - 0.0625) / (2.0 * std::numbers::pi);
  CHECK(p == doctest::Approx(expected).epsilon(1e-15));
  CHECK(p == doctest::Approx(0.0770506).epsilon(1e-5));
  CHECK(p_epsilon(1e-12, 1, 1.0, 2) < 1e-6);  // vanishes with eps
  // monotone increasing in eps on the domain
  double previous = 0.0;
  for (double eps = 0.05; eps <= 1.0; eps += 0.05) {
    const double value = p_epsilon(eps, 1, 1.0, 3);
    CHECK(value > previous);
    previous = value;
  }
  CHECK_THROWS(p_epsilon(0.25, 1, 1.0, 1));   // rank must be >= 2
  CHECK_THROWS(p_epsilon(9.0, 1, 1.0, 2));    // sqrt(eps)/(nB) > 2
}
