#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "basinlab/montecarlo.hpp"
#include "basinlab/nets.hpp"

#include <cmath>

using namespace basinlab;

TEST_CASE("bound formulas evaluate to the quoted values") {
  ExperimentParams params;
  // thm3 bound at d=5, n=20
  params.d = 5;
  params.n = 20;
  CHECK(make_bound_spec(BoundId::Thm3, params).bound == doctest::Approx(0.9683).epsilon(1e-4));
  // thm5 bound at m=5, n=15
  params.m = 5;
  params.n = 15;
  CHECK(make_bound_spec(BoundId::Thm5, params).bound == doctest::Approx(0.9331).epsilon(1e-4));
  // thm6 bound at d=10, n=40
  params.d = 10;
  params.n = 40;
  CHECK(make_bound_spec(BoundId::Thm6, params).bound == doctest::Approx(0.952).epsilon(1e-3));
  // prop1 bound at n_{h-1} in {1, 6, 3}
  params.widths = {1};
  CHECK(make_bound_spec(BoundId::Prop1, params).bound == doctest::Approx(0.25));
  params.widths = {6};
  CHECK(make_bound_spec(BoundId::Prop1, params).bound == doctest::Approx(0.4922).epsilon(1e-4));
  params.widths = {4, 6, 3};
  CHECK(make_bound_spec(BoundId::Prop1, params).bound == doctest::Approx(0.4375));
  // thm4 bound at c=2, n=1
  params.chernoff_c = 2;
  params.teacher_width = 1;
  CHECK(make_bound_spec(BoundId::Thm4, params).bound == doctest::Approx(0.3935).epsilon(1e-4));
  // thm7 is an upper-bound claim; everything else lower-bounds the probability
  params.d = 16;
  const BoundSpec thm7 = make_bound_spec(BoundId::Thm7, params);
  CHECK(thm7.side == BoundSide::UpperBound);
  CHECK(thm7.bound == doctest::Approx(std::exp(-1.0)));
  // bounds always land in [0, 1], vacuous cases clamp to 0
  params.d = 5;
  params.n = 1;
  CHECK(make_bound_spec(BoundId::Thm3, params).bound == 0.0);
}

TEST_CASE("fullrank construction: one-point linear solve") {
  Dataset data;
  data.X.resize(1, 2);
  data.X << 1.0, 0.0;
  data.targets.resize(1, 1);
  data.targets << 3.0;
  TwoLayerParams net;
  net.W.resize(1, 2);
  net.W << 1.0, 0.0;
  net.v.resize(1);
  net.v << 1.0;
  const auto cert = fullrank_construct(net, data);
  REQUIRE(cert.has_value());
  CHECK(cert->constructed.W(0, 0) == doctest::Approx(3.0));
  CHECK(cert->constructed.W(0, 1) == doctest::Approx(0.0));
  CHECK(forward_two_layer(cert->constructed, data.X.row(0).transpose()) ==
        doctest::Approx(3.0));
  CHECK(cert->objective <= 1e-16);

  net.W << -1.0, 0.0;  // no claimant for the only instance
  CHECK_FALSE(fullrank_construct(net, data).has_value());
}

TEST_CASE("fullrank construction: random instance matches the direct objective") {
  RngStream rng(3, "fr");
  const Dataset data = gen_fullrank({3, 6, std::nullopt}, rng);
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 4};
  int built = 0;
  for (std::uint64_t i = 0; i < 50 && built < 10; ++i) {
    const TwoLayerParams net = sample_two_layer(dist, 8, 6, i);
    const auto cert = fullrank_construct(net, data);
    if (!cert) continue;
    ++built;
    CHECK(cert->objective <= 1e-8);
    CHECK(cert->max_prediction_error <= 1e-8);
    CHECK(cert->max_sign_violation <= 1e-8);
    // the constructed point must lie in the sampled basin (closure)
    const Matrix inner_old = net.W * data.X.transpose();
    const Matrix inner_new = cert->constructed.W * data.X.transpose();
    for (Index r = 0; r < inner_old.rows(); ++r)
      for (Index t = 0; t < inner_old.cols(); ++t)
        CHECK(inner_old(r, t) * inner_new(r, t) >= -1e-10);
  }
  CHECK(built == 10);
}

TEST_CASE("clustered construction: zero-radius clusters reduce to the center solve") {
  RngStream rng(7, "cc");
  ClusteredSpec spec;
  spec.d = 4;
  spec.k = 2;
  spec.points_per_cluster = {3, 3};
  spec.radius_fraction = 0.0;
  spec.gamma = 0.0;
  ClusteredInfo info;
  const Dataset data = gen_clustered(spec, rng, &info);
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, 8};
  int built = 0;
  for (std::uint64_t i = 0; i < 60 && built < 5; ++i) {
    const TwoLayerParams net = sample_two_layer(dist, 10, 4, i);
    const auto cert = clustered_construct(net, data, info);
    if (!cert) continue;
    ++built;
    CHECK(cert->objective <= 1e-10);
    CHECK(cert->bound == 0.0);  // delta = 0 collapses the clustered value bound
  }
  CHECK(built == 5);
}

TEST_CASE("clustered construction: noisy claimants cause failure") {
  // one cluster on e1; the only correctly-signed neuron is inside the noisy
  // band around the cluster, the other points away from the center
  ClusteredInfo info;
  info.centers = Matrix::Zero(1, 4);
  info.centers(0, 0) = 1.0;
  info.radii = Vector::Constant(1, 1e-3);
  info.delta_max = 1e-3;
  info.c = 1.0;
  info.B = 1.0 + 1e-3;
  info.gamma = 0.0;
  info.sigma_max = 1.0;
  info.sigma_min = 1.0;
  info.cluster_targets = Vector::Constant(1, 2.0);
  Dataset data;
  data.X.resize(2, 4);
  data.X << 1.0, 1e-4, 0.0, 0.0, 1.0, -1e-4, 0.0, 0.0;
  data.targets.resize(2, 1);
  data.targets << 2.0, 2.0;
  data.cluster_ids = {1, 1};
  TwoLayerParams net;
  net.W.resize(2, 4);
  // neuron 0: nearly orthogonal to the center (inside the noisy band)
  net.W << 1e-5, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0;
  net.v.resize(2);
  net.v << 1.0, 1.0;
  std::string reason;
  CHECK_FALSE(clustered_construct(net, data, info, &reason).has_value());
  CHECK(reason.find("cluster 1") != std::string::npos);
  CHECK(reason.find("neuron 0") != std::string::npos);
  CHECK(reason.find("noisy") != std::string::npos);
}

TEST_CASE("cap bound: formula, exact d=3 value, and Monte Carlo consistency") {
  CHECK(cap_bound_formula(3, 0.5) == doctest::Approx(0.0373).epsilon(1e-3));
  CHECK(cap_exact_d3(0.5) == doctest::Approx(0.0625));
  CHECK(cap_exact_d3(0.5) >= cap_bound_formula(3, 0.5));
  const MCRun run = cap_bound_check(3, 0.5, 20000, 99, 2);
  CHECK(run.report.verdict == Verdict::Consistent);
  CHECK(run.report.point_estimate == doctest::Approx(0.0625).epsilon(0.1));
  // delta = 2 covers the whole sphere
  long hits = 0;
  RngStream rng(1, "whole");
  for (int i = 0; i < 100; ++i) {
    Vector a = Vector::Zero(4);
    a(0) = 1.0;
    if ((a - rng.unit_vector(4)).norm() <= 2.0) ++hits;
  }
  CHECK(hits == 100);
}

TEST_CASE("noisy region check: frequency against 1 - 1/(4d)") {
  Vector center = Vector::Zero(10);
  center(0) = 1.0;
  const double delta = clustered_radius_bound(10);  // maximal allowed
  const MCRun run = noisy_region_check(10, center, delta, 20000, 5, 2);
  CHECK(run.report.theoretical_bound == doctest::Approx(0.975));
  CHECK(run.report.verdict == Verdict::Consistent);
  // delta = 0: the noisy set degenerates to a great subsphere of measure zero
  const MCRun degenerate = noisy_region_check(10, center, 0.0, 2000, 5, 2);
  CHECK(degenerate.report.point_estimate == doctest::Approx(1.0));
  // the event is symmetric under w -> -w by construction of |<w, c>|
  RngStream rng(2, "sym");
  for (int i = 0; i < 50; ++i) {
    const Vector w = rng.unit_vector(10);
    CHECK((std::fabs(w.dot(center)) > delta) ==
          (std::fabs((-w).dot(center)) > delta));
  }
  CHECK_THROWS(noisy_region_check(10, center, 1.0, 100, 5, 1));  // delta too large
}

TEST_CASE("census: values, exact tail, chernoff bound") {
  SUBCASE("d = 1") {
    const CensusResult census = appc_local_minima_census(1, 0.1, 200, 3, 1);
    CHECK(census.value_by_bad_count[0] == doctest::Approx(0.1));
    CHECK(census.value_by_bad_count[1] == doctest::Approx(0.5));
  }
  SUBCASE("d = 2 matches the four minima of the surface") {
    const CensusResult census = appc_local_minima_census(2, 0.1, 200, 3, 1);
    CHECK(census.value_by_bad_count[0] == doctest::Approx(0.1));
    CHECK(census.value_by_bad_count[1] == doctest::Approx(0.3));
    CHECK(census.value_by_bad_count[2] == doctest::Approx(0.5));
    CHECK(census.minima_count[1] == 2.0);
  }
  SUBCASE("d = 16 exact binomial tail") {
    const CensusResult census = appc_local_minima_census(16, 0.1, 10000, 3, 2);
    CHECK(census.exact_tail == doctest::Approx(17.0 / 65536.0).epsilon(1e-12));
    CHECK(census.chernoff_bound == doctest::Approx(std::exp(-1.0)));
    CHECK(census.exact_tail <= census.chernoff_bound);
    CHECK(census.mc.report.verdict == Verdict::Consistent);
  }
  CHECK_THROWS(appc_local_minima_census(21, 0.1, 100, 1, 1));
}

TEST_CASE("bound experiments are deterministic and scheduling-independent") {
  ExperimentParams params;
  params.d = 3;
  params.n = 8;
  params.epsilon = 0.1;
  const MCRun a = run_bound_experiment(BoundId::Thm3, params, 400, 77, 1);
  const MCRun b = run_bound_experiment(BoundId::Thm3, params, 400, 77, 2);
  CHECK(a.report.successes == b.report.successes);
  CHECK(a.report.verdict == b.report.verdict);
  for (size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].value == b.trials[i].value);
    CHECK(a.trials[i].pattern == b.trials[i].pattern);
  }
}

TEST_CASE("small-scale bound experiments come out consistent") {
  ExperimentParams params;
  SUBCASE("thm3") {
    params.d = 3;
    params.n = 12;
    const MCRun run = run_bound_experiment(BoundId::Thm3, params, 600, 11, 2);
    CHECK(run.report.verdict == Verdict::Consistent);
    CHECK(run.report.errored == 0);
  }
  SUBCASE("thm3 oracle/solver event agreement") {
    params.d = 3;
    params.n = 6;
    params.cross_check_solver = true;
    const MCRun run = run_bound_experiment(BoundId::Thm3, params, 100, 29, 2);
    long disagreements = 0;
    for (const TrialRecord& r : run.trials)
      if (r.note.find("disagreement") != std::string::npos) ++disagreements;
    CHECK(disagreements <= 1);  // identical indicators on >= 99% of trials
  }
  SUBCASE("thm5 with solver cross-check") {
    params.m = 3;
    params.d = 5;
    params.n = 10;
    params.cross_check_solver = true;
    const MCRun run = run_bound_experiment(BoundId::Thm5, params, 150, 13, 2);
    CHECK(run.report.verdict == Verdict::Consistent);
    for (const TrialRecord& r : run.trials) {
      if (r.errored || r.certificate < 0.0) continue;
      CHECK(r.certificate <= 1e-8);
      CHECK(r.value <= r.certificate + 1e-6);  // solver agrees with the certificate
    }
  }
  SUBCASE("prop1 squared and cross-entropy") {
    params.d = 3;
    params.m = 10;
    params.widths = {4, 6, 3};
    params.loss = LossKind::SquaredLoss;
    const MCRun sq = run_bound_experiment(BoundId::Prop1, params, 1500, 17, 2);
    CHECK(sq.report.theoretical_bound == doctest::Approx(0.4375));
    CHECK(sq.report.verdict == Verdict::Consistent);
    params.loss = LossKind::CrossEntropySoftmax;
    params.classes = 3;
    const MCRun ce = run_bound_experiment(BoundId::Prop1, params, 1500, 17, 2);
    CHECK(ce.report.verdict == Verdict::Consistent);
  }
  SUBCASE("thm4 desk scale, few trials") {
    params.d = 5;
    params.m = 8;
    params.rank = 2;
    params.teacher_width = 1;
    params.B = 1.0;
    params.epsilon = 0.25;
    params.chernoff_c = 2;
    const MCRun run = run_bound_experiment(BoundId::Thm4, params, 40, 19, 2);
    CHECK(run.report.verdict == Verdict::Consistent);
    CHECK(run.report.errored == 0);
  }
  SUBCASE("thm6 small, solver cross-check") {
    params.d = 6;
    params.clusters = 2;
    params.n = 16;
    params.points_per_cluster = 3;
    params.radius_fraction = 0.1;
    params.gamma = 0.5;
    params.cross_check_solver = true;
    const MCRun run = run_bound_experiment(BoundId::Thm6, params, 60, 23, 2);
    CHECK(run.report.verdict == Verdict::Consistent);
    CHECK(run.report.errored == 0);
    for (const TrialRecord& r : run.trials) {
      if (r.errored || r.certificate < 0.0) continue;
      // the solver can only do at least as well as the constructed point
      CHECK(r.value <= r.certificate + 1e-6);
    }
  }
}
