#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "basinlab/basins.hpp"
#include "basinlab/datasets.hpp"
#include "basinlab/init.hpp"
#include "basinlab/nets.hpp"
#include "oracles.hpp"

#include <cmath>
#include <set>

using namespace basinlab;

namespace {

Dataset hardness_1d(double eps = 0.1) {
  return gen_singleton_hardness({1, eps, LossKind::SquaredLoss});
}

TwoLayerParams width1(double w, double v) {
  TwoLayerParams p;
  p.W.resize(1, 1);
  p.W(0, 0) = w;
  p.v.resize(1);
  p.v(0) = v;
  return p;
}

SignPattern make_pattern(std::initializer_list<std::initializer_list<int>> a_rows,
                         std::initializer_list<int> b) {
  SignPattern p;
  p.A.resize(static_cast<Index>(a_rows.size()), static_cast<Index>(a_rows.begin()->size()));
  Index i = 0;
  for (const auto& row : a_rows) {
    Index t = 0;
    for (int x : row) p.A(i, t++) = static_cast<std::int8_t>(x);
    ++i;
  }
  p.b.resize(static_cast<Index>(b.size()));
  Index k = 0;
  for (int x : b) p.b(k++) = static_cast<std::int8_t>(x);
  return p;
}

Dataset random_dense_dataset(RngStream& rng, Index m, Index d) {
  Dataset data;
  data.X.resize(m, d);
  for (Index t = 0; t < m; ++t) data.X.row(t) = rng.unit_vector(d).transpose();
  data.targets.resize(m, 1);
  for (Index t = 0; t < m; ++t) data.targets(t, 0) = rng.uniform(-1.5, 1.5);
  return data;
}

}  // namespace

TEST_CASE("sign pattern of the hardness instances") {
  const Dataset data = hardness_1d();
  const SignPattern p = extract_sign_pattern(width1(-1.0, 1.0), data);
  CHECK(p.A(0, 0) == -1);
  CHECK(p.A(0, 1) == 1);
  CHECK(p.b(0) == 1);
  CHECK_FALSE(p.boundary());
}

TEST_CASE("sign pattern is invariant under positive row scaling") {
  RngStream rng(5, "scale");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 6};
  const Dataset data = random_dense_dataset(rng, 4, 3);
  for (int rep = 0; rep < 10; ++rep) {
    const TwoLayerParams p = sample_two_layer(dist, 3, 3, static_cast<std::uint64_t>(rep));
    TwoLayerParams scaled = p;
    scaled.W *= rng.uniform(0.1, 10.0);
    CHECK(extract_sign_pattern(p, data) == extract_sign_pattern(scaled, data));
  }
}

TEST_CASE("random initializations land in basin interiors") {
  // boundary hits are a probability-zero event under spherical symmetry
  RngStream rng(47, "interior");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 48};
  const Dataset data = random_dense_dataset(rng, 6, 4);
  for (int rep = 0; rep < 500; ++rep) {
    const TwoLayerParams p = sample_two_layer(dist, 3, 4, static_cast<std::uint64_t>(rep));
    CHECK_FALSE(extract_sign_pattern(p, data).boundary());
  }
}

TEST_CASE("pattern hash distinguishes patterns and is stable") {
  const auto p1 = make_pattern({{1, -1}}, {1});
  const auto p2 = make_pattern({{1, 1}}, {1});
  const auto p3 = make_pattern({{1, -1}}, {-1});
  CHECK(pattern_hash(p1) == pattern_hash(p1));
  std::set<std::uint64_t> hashes{pattern_hash(p1), pattern_hash(p2), pattern_hash(p3)};
  CHECK(hashes.size() == 3);
}

TEST_CASE("z objective: zero point and agreement with the network objective") {
  RngStream rng(17, "zobj");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 18};
  const Dataset data = random_dense_dataset(rng, 5, 3);
  const double Lzero =
      objective(LossKind::SquaredLoss, Matrix::Zero(5, 1), data.targets);
  for (int rep = 0; rep < 10; ++rep) {
    const TwoLayerParams p = sample_two_layer(dist, 4, 3, static_cast<std::uint64_t>(rep));
    const SignPattern pattern = extract_sign_pattern(p, data);
    const BasinConstraints constraints = build_constraints(pattern, data);
    CHECK(z_objective(constraints, Matrix::Zero(4, 3), data) ==
          doctest::Approx(Lzero).epsilon(1e-14));
    Matrix Z(4, 3);
    for (Index i = 0; i < 4; ++i) Z.row(i) = p.v(i) * p.W.row(i);
    // the z-image of the generating point is feasible for its own pattern
    CHECK(max_constraint_violation(constraints, Z) == 0.0);
    const double via_z = z_objective(constraints, Z, data);
    const double via_net =
        objective(LossKind::SquaredLoss, prediction_matrix(p, data), data.targets);
    CHECK(via_z == doctest::Approx(via_net).epsilon(1e-12));
  }
}

TEST_CASE("z objective satisfies Jensen's inequality on feasible pairs") {
  RngStream rng(23, "jensen");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 24};
  const Dataset data = random_dense_dataset(rng, 4, 3);
  int tested = 0;
  for (int rep = 0; tested < 50 && rep < 200; ++rep) {
    const TwoLayerParams pa = sample_two_layer(dist, 3, 3, static_cast<std::uint64_t>(2 * rep));
    const SignPattern pattern = extract_sign_pattern(pa, data);
    const BasinConstraints constraints = build_constraints(pattern, data);
    // second feasible point in the same cone: positive row rescaling
    Matrix Z0(3, 3), Z1(3, 3);
    for (Index i = 0; i < 3; ++i) {
      Z0.row(i) = pa.v(i) * pa.W.row(i);
      Z1.row(i) = rng.uniform(0.1, 3.0) * Z0.row(i);
    }
    const double lambda = rng.uniform01();
    const double mix = z_objective(constraints, lambda * Z1 + (1 - lambda) * Z0, data);
    const double bound = lambda * z_objective(constraints, Z1, data) +
                         (1 - lambda) * z_objective(constraints, Z0, data);
    CHECK(mix <= bound + 1e-10);
    ++tested;
  }
  CHECK(tested == 50);
}

TEST_CASE("basin values of the hardness construction") {
  const Dataset data = hardness_1d(0.1);
  SUBCASE("negative-side basin attains epsilon") {
    const auto pattern = make_pattern({{-1, 1}}, {1});
    const BasinSolveResult result = solve_basin_value(pattern, data);
    CHECK(result.converged);
    CHECK(result.value == doctest::Approx(0.1).epsilon(1e-8));
    CHECK(result.feasibility_residual <= 1e-10);
    CHECK(result.lower_bound <= result.value + 1e-12);
  }
  SUBCASE("positive-side basin attains one half") {
    const auto pattern = make_pattern({{1, -1}}, {1});
    const BasinSolveResult result = solve_basin_value(pattern, data);
    CHECK(result.converged);
    CHECK(result.value == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("solver matches the grid oracle on tiny instances") {
  RngStream rng(31, "grid");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 32};
  for (int rep = 0; rep < 8; ++rep) {
    Dataset data = random_dense_dataset(rng, 2, 2);
    while (std::fabs(data.X.row(0).dot(data.X.row(1))) > 0.9)
      data = random_dense_dataset(rng, 2, 2);
    const TwoLayerParams p = sample_two_layer(dist, 2, 2, static_cast<std::uint64_t>(rep));
    const SignPattern pattern = extract_sign_pattern(p, data);
    const BasinSolveResult result = solve_basin_value(pattern, data);
    const double grid = testing::grid_basin_oracle(pattern, data);
    CHECK(std::fabs(result.value - grid) <= 1e-3);
    CHECK(result.value >= -1e-12);  // sanity floor for the squared loss
  }
}

TEST_CASE("solver lower bound never exceeds the brute-force value") {
  RngStream rng(37, "lower");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 38};
  for (int rep = 0; rep < 12; ++rep) {
    const Index d = 1 + static_cast<Index>(rng.uniform_index(2));
    const Index n = 1 + static_cast<Index>(rng.uniform_index(2));
    const Index m = 1 + static_cast<Index>(rng.uniform_index(3));
    Dataset data;
    data.X.resize(m, d);
    for (bool ok = false; !ok;) {
      for (Index t = 0; t < m; ++t) data.X.row(t) = rng.unit_vector(d).transpose();
      ok = true;
      for (Index t = 0; t < m && ok && d >= 2; ++t)
        for (Index u = t + 1; u < m; ++u)
          if (std::fabs(data.X.row(t).dot(data.X.row(u))) > 0.9) ok = false;
    }
    data.targets.resize(m, 1);
    for (Index t = 0; t < m; ++t) data.targets(t, 0) = rng.uniform(-1.5, 1.5);
    const TwoLayerParams p = sample_two_layer(dist, n, d, static_cast<std::uint64_t>(rep));
    const SignPattern pattern = extract_sign_pattern(p, data);
    const BasinSolveResult solved = solve_basin_value(pattern, data);
    const double reference = testing::grid_basin_oracle(pattern, data);
    CHECK(solved.lower_bound <= reference + 1e-6);
    CHECK(solved.lower_bound <= solved.value + 1e-12);
  }
}

TEST_CASE("solver agrees with the exact oracle on random singleton datasets") {
  // moderate sizes the grid oracle cannot reach; the per-coordinate
  // decomposition stays exact for any singleton data
  RngStream rng(41, "randsing");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 42};
  for (int rep = 0; rep < 6; ++rep) {
    const Index d = 3 + static_cast<Index>(rng.uniform_index(2));
    const Index m = 6 + static_cast<Index>(rng.uniform_index(5));
    Dataset data;
    data.X = Matrix::Zero(m, d);
    data.targets.resize(m, 1);
    for (Index t = 0; t < m; ++t) {
      const Index coord = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(d)));
      double value = 0.0;
      while (value == 0.0) value = rng.uniform(-2.0, 2.0);
      data.X(t, coord) = value;
      data.targets(t, 0) = rng.uniform(-1.5, 1.5);
    }
    const TwoLayerParams p = sample_two_layer(dist, 6, d, static_cast<std::uint64_t>(rep));
    const SignPattern pattern = extract_sign_pattern(p, data);
    const double exact = singleton_basin_oracle(pattern, data);
    const BasinSolveResult solved = solve_basin_value(pattern, data);
    CHECK(solved.value == doctest::Approx(exact).epsilon(1e-6));
    CHECK(solved.value >= exact - 1e-9);  // the oracle is the true minimum
  }
}

TEST_CASE("empty basin detected from contradictory signs on x and -x") {
  Dataset data;
  data.X.resize(2, 2);
  data.X << 1.0, 0.0, -1.0, 0.0;
  data.targets.resize(2, 1);
  data.targets << 1.0, 1.0;
  // demanding positive activations on both x and -x has no strictly
  // feasible weight vector
  const auto pattern = make_pattern({{1, 1}}, {1});
  CHECK_THROWS_AS(solve_basin_value(pattern, data), EmptyBasinError);
}

TEST_CASE("boundary patterns pin activations to hyperplanes") {
  const Dataset data = hardness_1d(0.1);
  // a = 0 on both instances forces z = 0, so the basin value is L(0)
  const auto pattern = make_pattern({{0, 0}}, {1});
  const BasinSolveResult result = solve_basin_value(pattern, data);
  const double Lzero = objective(LossKind::SquaredLoss, Matrix::Zero(2, 1), data.targets);
  CHECK(result.value == doctest::Approx(Lzero).epsilon(1e-10));
}

TEST_CASE("singleton oracle: hardness dataset values") {
  const Dataset data = hardness_1d(0.1);
  CHECK(singleton_basin_oracle(make_pattern({{-1, 1}}, {1}), data) ==
        doctest::Approx(0.1).epsilon(1e-14));
  CHECK(singleton_basin_oracle(make_pattern({{1, -1}}, {1}), data) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("singleton oracle: d-dimensional all-good pattern attains epsilon") {
  const double eps = 0.07;
  const Dataset data = gen_singleton_hardness({3, eps, LossKind::SquaredLoss});
  // one neuron per coordinate pair, negative side active, v > 0
  TwoLayerParams p;
  p.W = -Matrix::Identity(3, 3);
  p.v = Vector::Ones(3);
  const SignPattern pattern = extract_sign_pattern(p, data);
  CHECK(singleton_basin_oracle(pattern, data) == doctest::Approx(eps).epsilon(1e-14));
}

TEST_CASE("singleton oracle: both v-signs on one side achieve the free minimum") {
  // two neurons with opposite output signs, both positive on coordinate 0
  Dataset data;
  data.X.resize(1, 1);
  data.X << 2.0;
  data.targets.resize(1, 1);
  data.targets << -3.0;  // needs a negative prediction on the positive side
  const auto pattern = make_pattern({{1}, {1}}, {1, -1});
  CHECK(singleton_basin_oracle(pattern, data) == doctest::Approx(0.0));
}

TEST_CASE("singleton oracle: generic-loss hook agrees with the closed form") {
  const Dataset data = gen_singleton_hardness({2, 0.13, LossKind::SquaredLoss});
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 47};
  const ScalarLoss squared = [](double p, double y) { return (p - y) * (p - y); };
  for (int rep = 0; rep < 10; ++rep) {
    const TwoLayerParams p = sample_two_layer(dist, 3, 2, static_cast<std::uint64_t>(rep));
    const SignPattern pattern = extract_sign_pattern(p, data);
    const double closed = singleton_basin_oracle(pattern, data);
    const double searched = singleton_basin_oracle(pattern, data, squared);
    CHECK(searched == doctest::Approx(closed).epsilon(1e-9));
  }
}

TEST_CASE("singleton oracle: non-singleton data rejected") {
  RngStream rng(3, "dense");
  const Dataset data = random_dense_dataset(rng, 2, 2);
  CHECK_THROWS(singleton_basin_oracle(make_pattern({{1, 1}}, {1}), data));
}

TEST_CASE("singleton oracle and numerical solver agree on random basins") {
  const Dataset data = gen_singleton_hardness({2, 0.1, LossKind::SquaredLoss});
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 53};
  int agree = 0;
  const int total = 40;
  for (int rep = 0; rep < total; ++rep) {
    const TwoLayerParams p = sample_two_layer(dist, 3, 2, static_cast<std::uint64_t>(rep));
    const SignPattern pattern = extract_sign_pattern(p, data);
    const double exact = singleton_basin_oracle(pattern, data);
    const BasinSolveResult solved = solve_basin_value(pattern, data);
    if (std::fabs(exact - solved.value) <= 1e-6) ++agree;
  }
  CHECK(agree >= total * 99 / 100);
}

TEST_CASE("exact width-n minimum of the hardness dataset") {
  const double eps = 0.1;
  const Dataset d1 = hardness_1d(eps);
  CHECK(singleton_width_n_minimum(d1, 1) == doctest::Approx(eps).epsilon(1e-14));
  CHECK(singleton_width_n_minimum(d1, 2) == doctest::Approx(0.0));
  CHECK(singleton_width_n_minimum(d1, 20) == doctest::Approx(0.0));
  const Dataset d4 = gen_singleton_hardness({4, eps, LossKind::SquaredLoss});
  CHECK(singleton_width_n_minimum(d4, 1) == doctest::Approx(eps).epsilon(1e-14));
  CHECK(singleton_width_n_minimum(d4, 2) == doctest::Approx(0.0));
}

TEST_CASE("key lemma: identity subset gives equal values") {
  const Dataset data = gen_singleton_hardness({2, 0.1, LossKind::SquaredLoss});
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 61};
  const TwoLayerParams p = sample_two_layer(dist, 3, 2);
  const auto [full, sub] = key_lemma_check(p, {0, 1, 2}, data);
  CHECK(full.value == doctest::Approx(sub.value).epsilon(1e-12));
}

TEST_CASE("key lemma: monotone on singleton and dense data") {
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 67};
  SUBCASE("singleton, exact oracle") {
    const Dataset data = gen_singleton_hardness({3, 0.1, LossKind::SquaredLoss});
    for (int rep = 0; rep < 10; ++rep) {
      const TwoLayerParams p = sample_two_layer(dist, 4, 3, static_cast<std::uint64_t>(rep));
      const auto [full, sub] = key_lemma_check(p, {0, 2}, data);
      CHECK(full.value <= sub.value + 1e-12);
    }
  }
  SUBCASE("dense, numerical solver") {
    RngStream rng(68, "dense");
    const Dataset data = random_dense_dataset(rng, 4, 3);
    SolveOptions options;
    for (int rep = 0; rep < 6; ++rep) {
      const TwoLayerParams p = sample_two_layer(dist, 3, 3, static_cast<std::uint64_t>(rep));
      const auto [full, sub] = key_lemma_check(p, {0, 1}, data, options);
      CHECK(full.value <= sub.value + 2 * options.tol);
    }
  }
}

TEST_CASE("key lemma rejects bad subsets") {
  const Dataset data = hardness_1d();
  const TwoLayerParams p = width1(-1.0, 1.0);
  CHECK_THROWS(key_lemma_check(p, {}, data));
  CHECK_THROWS(key_lemma_check(p, {0, 0}, data));
  CHECK_THROWS(key_lemma_check(p, {5}, data));
}

TEST_CASE("second-layer rescaling path: sign outputs already normalized") {
  TwoLayerParams p;
  p.W.resize(2, 2);
  p.W << 1, 2, -1, 0.5;
  p.v.resize(2);
  p.v << 1, -1;
  const auto path = second_layer_rescaling_path(p, 10);
  for (const auto& point : path) {
    CHECK(point.W == p.W);
    CHECK(point.v == p.v);
  }
}

TEST_CASE("second-layer rescaling path: homogeneity endpoint") {
  TwoLayerParams p;
  p.W.resize(1, 2);
  p.W << 1, 0;
  p.v.resize(1);
  p.v << 2;
  const auto path = second_layer_rescaling_path(p, 4);
  const TwoLayerParams& end = path.back();
  CHECK(end.v(0) == doctest::Approx(1.0));
  CHECK(end.W(0, 0) == doctest::Approx(2.0));
  CHECK(end.W(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("second-layer rescaling path: outputs and pattern invariant") {
  RngStream rng(71, "path");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 72};
  const Dataset data = random_dense_dataset(rng, 5, 3);
  const TwoLayerParams p = sample_two_layer(dist, 4, 3);
  const Matrix P0 = prediction_matrix(p, data);
  const SignPattern pattern = extract_sign_pattern(p, data);
  const auto path = second_layer_rescaling_path(p, 100);
  double drift = 0.0;
  for (const auto& point : path) {
    const Matrix P = prediction_matrix(point, data);
    drift = std::max(drift, ((P - P0).cwiseAbs().maxCoeff()) /
                                std::max(1.0, P0.cwiseAbs().maxCoeff()));
    CHECK(extract_sign_pattern(point, data) == pattern);
  }
  CHECK(drift <= 1e-10);
  CHECK(path.back().v.cwiseAbs().isOnes(1e-15));
}

TEST_CASE("basin interpolation: product identity and convergence") {
  RngStream rng(81, "interp");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 82};
  const Dataset data = random_dense_dataset(rng, 4, 3);
  for (int rep = 0; rep < 10; ++rep) {
    const TwoLayerParams a = sample_two_layer(dist, 3, 3, static_cast<std::uint64_t>(rep));
    TwoLayerParams b = a;
    for (Index i = 0; i < 3; ++i) {
      b.W.row(i) *= rng.uniform(0.2, 4.0);
      b.v(i) *= rng.uniform(0.2, 4.0);
    }
    REQUIRE(extract_sign_pattern(a, data) == extract_sign_pattern(b, data));
    const double lambda = 0.5;
    const TwoLayerParams mid = basin_interpolation(a, b, lambda, data);
    for (Index i = 0; i < 3; ++i) {
      const Vector expected =
          lambda * b.v(i) * b.W.row(i).transpose() + (1 - lambda) * a.v(i) * a.W.row(i).transpose();
      CHECK((mid.v(i) * mid.W.row(i).transpose() - expected).norm() <= 1e-12);
    }
    CHECK(extract_sign_pattern(mid, data) == extract_sign_pattern(a, data));
    // lambda -> 0 returns to the first endpoint
    const TwoLayerParams near_a = basin_interpolation(a, b, 1e-8, data);
    CHECK((near_a.W - a.W).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((near_a.v - a.v).cwiseAbs().maxCoeff() <= 1e-6);
    // constant when both endpoints coincide
    const TwoLayerParams same = basin_interpolation(a, a, 0.37, data);
    CHECK((same.W - a.W).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("basin interpolation rejects endpoints from different basins") {
  const Dataset data = hardness_1d();
  CHECK_THROWS_AS(basin_interpolation(width1(-1.0, 1.0), width1(1.0, 1.0), 0.5, data),
                  std::invalid_argument);
}

TEST_CASE("recovered parameters reproduce the z-space objective") {
  RngStream rng(91, "recover");
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 92};
  const Dataset data = random_dense_dataset(rng, 4, 2);
  const TwoLayerParams p = sample_two_layer(dist, 2, 2);
  const SignPattern pattern = extract_sign_pattern(p, data);
  const BasinSolveResult result = solve_basin_value(pattern, data);
  const TwoLayerParams recovered = params_from_z(result.z_star, pattern);
  const double via_net =
      objective(LossKind::SquaredLoss, prediction_matrix(recovered, data), data.targets);
  CHECK(via_net == doctest::Approx(result.value).epsilon(1e-9));
  CHECK(extract_sign_pattern(recovered, data).b == pattern.b);
}
