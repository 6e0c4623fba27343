#include "basinlab/verify.hpp"

#include "basinlab/basins.hpp"
#include "basinlab/datasets.hpp"
#include "basinlab/init.hpp"
#include "basinlab/montecarlo.hpp"
#include "basinlab/nets.hpp"
#include "basinlab/oracles.hpp"
#include "basinlab/parallel.hpp"
#include "basinlab/paths.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace basinlab {

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& message) {
    if (!condition) {
      ok = false;
      if (!detail.str().empty()) detail << "; ";
      detail << message;
    }
  }
  void note(const std::string& message) {
    if (!detail.str().empty()) detail << "; ";
    detail << message;
  }
};

std::string fmt(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}

SignPattern pattern_1d(int a1, int a2, int b) {
  SignPattern p;
  p.A.resize(1, 2);
  p.A(0, 0) = static_cast<std::int8_t>(a1);
  p.A(0, 1) = static_cast<std::int8_t>(a2);
  p.b.resize(1);
  p.b(0) = static_cast<std::int8_t>(b);
  return p;
}

Check criterion_hardness_values() {
  Check check;
  const Dataset data = gen_singleton_hardness({1, 0.1, LossKind::SquaredLoss});
  const double good = singleton_basin_oracle(pattern_1d(-1, 1, 1), data);
  const double bad = singleton_basin_oracle(pattern_1d(1, -1, 1), data);
  check.require(std::fabs(good - 0.1) <= 1e-12, "good basin " + fmt(good) + " != 0.1");
  check.require(std::fabs(bad - 0.5) <= 1e-12, "bad basin " + fmt(bad) + " != 0.5");
  check.note("good=" + fmt(good) + " bad=" + fmt(bad));
  return check;
}

Check criterion_census(const AcceptanceOptions& options) {
  Check check;
  const long trials = options.quick ? 2000 : 10000;
  const CensusResult census =
      appc_local_minima_census(16, 0.1, trials, options.seed + 2, options.workers);
  double total = 0.0;
  for (Index k = 0; k <= 16; ++k) {
    const double expected = (0.5 * static_cast<double>(k) + 0.1 * static_cast<double>(16 - k)) / 16.0;
    check.require(std::fabs(census.value_by_bad_count[static_cast<size_t>(k)] - expected) <= 1e-15,
                  "census value mismatch at k=" + std::to_string(k));
    total += census.minima_count[static_cast<size_t>(k)];
  }
  check.require(total == 65536.0, "census must enumerate 2^16 minima");
  check.require(std::fabs(census.exact_tail - 17.0 / 65536.0) <= 1e-15,
                "exact tail " + fmt(census.exact_tail) + " != 17/65536");
  check.require(census.exact_tail <= std::exp(-1.0), "exact tail above e^-1");
  check.require(census.mc.report.verdict == Verdict::Consistent,
                "census MC verdict " + verdict_name(census.mc.report.verdict));
  check.note("exact_tail=" + fmt(census.exact_tail) +
             " mc=" + fmt(census.mc.report.point_estimate));
  return check;
}

Check criterion_thm3(const AcceptanceOptions& options) {
  Check check;
  ExperimentParams params;
  params.d = 5;
  params.n = 20;
  params.epsilon = 0.1;
  const long trials = options.quick ? 2000 : 10000;
  const MCRun run = run_bound_experiment(BoundId::Thm3, params, trials, options.seed + 3,
                                         options.workers);
  check.require(run.report.errored == 0, "errored trials present");
  check.require(run.report.verdict == Verdict::Consistent,
                "verdict " + verdict_name(run.report.verdict));
  check.note("frequency=" + fmt(run.report.point_estimate) +
             " bound=" + fmt(run.report.theoretical_bound));
  return check;
}

Check criterion_thm5(const AcceptanceOptions& options) {
  Check check;
  ExperimentParams params;
  params.m = 5;
  params.d = 8;
  params.n = 15;
  params.cross_check_solver = true;
  const long trials = options.quick ? 300 : 2000;
  const MCRun run = run_bound_experiment(BoundId::Thm5, params, trials, options.seed + 5,
                                         options.workers);
  check.require(run.report.errored == 0, "errored trials present");
  long constructed = 0;
  double worst_cert = 0.0, worst_gap = 0.0;
  for (const TrialRecord& record : run.trials) {
    if (record.certificate < 0.0) continue;  // construction failed on this trial
    ++constructed;
    worst_cert = std::max(worst_cert, record.certificate);
    worst_gap = std::max(worst_gap, record.value - record.certificate);
  }
  const MCReport construction = finalize_report(
      "thm5_construction", trials, constructed, run.report.errored,
      run.report.theoretical_bound, BoundSide::LowerBound, options.seed + 5);
  check.require(construction.verdict == Verdict::Consistent,
                "construction frequency verdict " + verdict_name(construction.verdict));
  check.require(worst_cert <= 1e-8,
                "construction objective " + fmt(worst_cert) + " above 1e-8");
  check.require(worst_gap <= 1e-6,
                "solver disagrees with certificate by " + fmt(worst_gap));
  check.note("construction_frequency=" + fmt(construction.point_estimate) +
             " bound=" + fmt(construction.theoretical_bound) +
             " worst_cert=" + fmt(worst_cert));
  return check;
}

Check criterion_thm6(const AcceptanceOptions& options) {
  Check check;
  ExperimentParams params;
  params.d = 10;
  params.clusters = 3;
  params.n = 40;
  params.points_per_cluster = 4;
  params.radius_fraction = 0.1;
  params.gamma = 0.5;
  const long trials = options.quick ? 100 : 500;
  const MCRun run = run_bound_experiment(BoundId::Thm6, params, trials, options.seed + 6,
                                         options.workers);
  check.require(run.report.errored == 0, "errored trials present");
  long constructed = 0;
  for (const TrialRecord& record : run.trials) {
    if (record.certificate < 0.0) continue;
    ++constructed;
    // success on a constructed trial encodes certificate <= the clustered value bound
    check.require(record.success, "certificate above the value bound at trial " +
                                      std::to_string(record.index));
  }
  const MCReport construction = finalize_report(
      "thm6_good_event", trials, constructed, run.report.errored,
      run.report.theoretical_bound, BoundSide::LowerBound, options.seed + 6);
  check.require(construction.verdict == Verdict::Consistent,
                "good-event frequency verdict " + verdict_name(construction.verdict));
  check.note("good_event_frequency=" + fmt(construction.point_estimate) +
             " bound=" + fmt(construction.theoretical_bound));
  return check;
}

Check criterion_thm4(const AcceptanceOptions& options) {
  Check check;
  ExperimentParams params;
  params.d = 5;
  params.m = 8;
  params.rank = 2;
  params.teacher_width = 1;
  params.B = 1.0;
  params.epsilon = 0.25;
  params.chernoff_c = 2;
  const double p_eps = p_epsilon(params.epsilon, params.teacher_width, params.B, params.rank);
  const Index width =
      params.chernoff_c * static_cast<Index>(std::ceil(1.0 / p_eps));
  check.require(width == 26, "desk-scale width must be 26, got " + std::to_string(width));
  const long trials = options.quick ? 50 : 200;
  const MCRun run = run_bound_experiment(BoundId::Thm4, params, trials, options.seed + 4,
                                         options.workers);
  check.require(run.report.errored == 0, "errored trials present");
  check.require(std::fabs(run.report.theoretical_bound - (1.0 - std::exp(-0.5))) <= 1e-12,
                "bound must be 1 - e^-0.5");
  check.require(run.report.verdict == Verdict::Consistent,
                "verdict " + verdict_name(run.report.verdict));
  check.note("frequency=" + fmt(run.report.point_estimate) +
             " bound=" + fmt(run.report.theoretical_bound));
  return check;
}

Check criterion_prop1(const AcceptanceOptions& options) {
  Check check;
  const long trials = options.quick ? 2000 : 10000;
  for (LossKind loss : {LossKind::SquaredLoss, LossKind::CrossEntropySoftmax}) {
    ExperimentParams params;
    params.d = 3;
    params.m = 10;
    params.widths = {4, 6, 3};
    params.loss = loss;
    params.classes = 3;
    const MCRun run = run_bound_experiment(BoundId::Prop1, params, trials,
                                           options.seed + 7, options.workers);
    check.require(std::fabs(run.report.theoretical_bound - 0.4375) <= 1e-15,
                  "bound must be 0.4375");
    check.require(run.report.verdict == Verdict::Consistent,
                  loss_name(loss) + " verdict " + verdict_name(run.report.verdict));
    check.note(loss_name(loss) + "=" + fmt(run.report.point_estimate));
  }
  return check;
}

Check criterion_paths(const AcceptanceOptions& options) {
  Check check;
  const int instances = options.quick ? 6 : 20;
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, options.seed + 8};
  RngStream data_rng(options.seed + 8, "paths/data");
  int built = 0;
  for (int inst = 0; inst < instances; ++inst) {
    const int flavor = inst % 3;  // two-layer squared, deep squared, deep cross-entropy
    Dataset data;
    data.X.resize(6, 3);
    for (Index t = 0; t < 6; ++t) data.X.row(t) = data_rng.gaussian_vector(3).transpose();
    if (flavor == 2) {
      data.loss = LossKind::CrossEntropySoftmax;
      data.prediction_dim = 3;
      data.targets.resize(6, 1);
      for (Index t = 0; t < 6; ++t)
        data.targets(t, 0) = static_cast<double>(data_rng.uniform_index(3));
    } else {
      data.targets.resize(6, 1);
      for (Index t = 0; t < 6; ++t) data.targets(t, 0) = data_rng.gaussian();
    }
    const double Lzero =
        objective(data.loss, Matrix::Zero(data.m(), data.k()), data.targets);
    PathSpec spec;
    spec.grid_n = 1000;
    spec.epsilon = 0.05;
    double L0 = 0.0, L1 = 0.0;
    for (std::uint64_t attempt = 0;; attempt += 2) {
      NetParams start, end;
      if (flavor == 0) {
        start = sample_two_layer(dist, 4, 3, 1000 * inst + attempt);
        end = sample_two_layer(dist, 4, 3, 1000 * inst + attempt + 1);
      } else {
        start = sample_deep(dist, {3, 4, 5, data.k()}, 1000 * inst + attempt);
        end = sample_deep(dist, {3, 4, 5, data.k()}, 1000 * inst + attempt + 1);
      }
      L0 = objective(data.loss, prediction_matrix(start, data), data.targets);
      L1 = objective(data.loss, prediction_matrix(end, data), data.targets);
      if (L1 < L0 && L0 > Lzero + 1e-3) {
        spec.start = std::move(start);
        spec.end = std::move(end);
        break;
      }
    }
    const MonotonePathResult result = build_monotone_path(spec, data);
    ++built;
    check.require(result.monotone && result.max_violation == 0.0,
                  "instance " + std::to_string(inst) + " not strictly monotone");
    check.require(std::fabs(result.samples.front().c - 1.0) <= 1e-10,
                  "instance " + std::to_string(inst) + " c-tilde(0) off 1");
    check.require(std::fabs(result.final_segment.back().objective - L1) <= 1e-8,
                  "instance " + std::to_string(inst) + " endpoint objective off");
  }
  check.note(std::to_string(built) + " paths, N=1000");
  return check;
}

Check criterion_key_lemma(const AcceptanceOptions& options) {
  Check check;
  const int pairs = options.quick ? 30 : 100;
  const int singleton_pairs = pairs * 3 / 5;
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, options.seed + 9};
  RngStream rng(options.seed + 9, "key_lemma");
  SolveOptions solve_options;
  const Dataset singleton = gen_singleton_hardness({3, 0.1, LossKind::SquaredLoss});
  double worst = -1.0;
  for (int pair = 0; pair < pairs; ++pair) {
    const bool use_singleton = pair < singleton_pairs;
    Dataset dense;
    if (!use_singleton) {
      dense.X.resize(4, 3);
      for (Index t = 0; t < 4; ++t) dense.X.row(t) = rng.unit_vector(3).transpose();
      dense.targets.resize(4, 1);
      for (Index t = 0; t < 4; ++t) dense.targets(t, 0) = rng.uniform(-1.5, 1.5);
    }
    const Dataset& data = use_singleton ? singleton : dense;
    const Index n = use_singleton ? 5 : 3;
    const TwoLayerParams params =
        sample_two_layer(dist, n, data.d(), static_cast<std::uint64_t>(pair));
    std::vector<Index> subset;
    for (Index i = 0; i < n; ++i)
      if (rng.uniform01() < 0.6) subset.push_back(i);
    if (subset.empty()) subset.push_back(static_cast<Index>(rng.uniform_index(n)));
    const auto [full, sub] = key_lemma_check(params, subset, data, solve_options);
    worst = std::max(worst, full.value - sub.value);
    check.require(full.value <= sub.value + 2.0 * solve_options.tol,
                  "pair " + std::to_string(pair) + " violates the key lemma by " +
                      fmt(full.value - sub.value));
  }
  check.note(std::to_string(pairs) + " pairs, worst full-minus-subset=" + fmt(worst));
  return check;
}

Check criterion_appendix_a(const AcceptanceOptions& options) {
  Check check;
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, options.seed + 10};
  RngStream rng(options.seed + 10, "appendix_a");
  Dataset data;
  data.X.resize(4, 3);
  for (Index t = 0; t < 4; ++t) data.X.row(t) = rng.unit_vector(3).transpose();
  data.targets.resize(4, 1);
  for (Index t = 0; t < 4; ++t) data.targets(t, 0) = rng.uniform(-1.5, 1.5);

  // convexity in Z: Jensen on feasible pairs
  const int jensen_pairs = options.quick ? 200 : 1000;
  double worst_slack = 0.0;
  for (int pair = 0; pair < jensen_pairs; ++pair) {
    const TwoLayerParams p =
        sample_two_layer(dist, 3, 3, static_cast<std::uint64_t>(pair));
    const SignPattern pattern = extract_sign_pattern(p, data);
    const BasinConstraints constraints = build_constraints(pattern, data);
    Matrix Z0(3, 3), Z1(3, 3);
    for (Index i = 0; i < 3; ++i) {
      Z0.row(i) = p.v(i) * p.W.row(i);
      Z1.row(i) = rng.uniform(0.1, 3.0) * Z0.row(i);
    }
    // try to move the second point off the ray while staying in the cone
    Matrix candidate = Z1;
    for (int attempt = 0; attempt < 5; ++attempt) {
      Matrix jitter = candidate;
      for (Index i = 0; i < 3; ++i)
        jitter.row(i) += 0.05 * rng.gaussian_vector(3).transpose();
      if (max_constraint_violation(constraints, jitter) <= 0.0) candidate = jitter;
    }
    Z1 = candidate;
    const double lambda = rng.uniform01();
    const double mix = z_objective(constraints, lambda * Z1 + (1 - lambda) * Z0, data);
    const double hull = lambda * z_objective(constraints, Z1, data) +
                        (1 - lambda) * z_objective(constraints, Z0, data);
    worst_slack = std::max(worst_slack, mix - hull);
    check.require(mix <= hull + 1e-10,
                  "Jensen violated by " + fmt(mix - hull) + " at pair " + std::to_string(pair));
  }

  // second-layer rescaling leaves outputs and the pattern unchanged
  double worst_drift = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const TwoLayerParams p =
        sample_two_layer(dist, 4, 3, static_cast<std::uint64_t>(10000 + rep));
    const Matrix P0 = prediction_matrix(p, data);
    const SignPattern pattern = extract_sign_pattern(p, data);
    const auto path = second_layer_rescaling_path(p, 100);
    for (const TwoLayerParams& point : path) {
      const Matrix P = prediction_matrix(point, data);
      worst_drift = std::max(worst_drift, (P - P0).cwiseAbs().maxCoeff() /
                                              std::max(1.0, P0.cwiseAbs().maxCoeff()));
      if (!(extract_sign_pattern(point, data) == pattern)) {
        check.require(false, "rescaling path left the basin at rep " + std::to_string(rep));
        break;
      }
    }
  }
  check.require(worst_drift <= 1e-10, "rescaling path output drift " + fmt(worst_drift));

  // within-basin interpolation: product identity and endpoint convergence
  double worst_identity = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const TwoLayerParams a =
        sample_two_layer(dist, 3, 3, static_cast<std::uint64_t>(20000 + rep));
    TwoLayerParams b = a;
    for (Index i = 0; i < 3; ++i) {
      b.W.row(i) *= rng.uniform(0.2, 4.0);
      b.v(i) *= rng.uniform(0.2, 4.0);
    }
    const double lambda = rng.uniform01();
    const TwoLayerParams mid = basin_interpolation(a, b, lambda, data);
    for (Index i = 0; i < 3; ++i) {
      const Vector expected = lambda * b.v(i) * b.W.row(i).transpose() +
                              (1 - lambda) * a.v(i) * a.W.row(i).transpose();
      worst_identity = std::max(
          worst_identity, (mid.v(i) * mid.W.row(i).transpose() - expected).norm());
    }
    const TwoLayerParams near_a = basin_interpolation(a, b, 1e-8, data);
    check.require((near_a.W - a.W).cwiseAbs().maxCoeff() <= 1e-6 &&
                      (near_a.v - a.v).cwiseAbs().maxCoeff() <= 1e-6,
                  "interpolation does not converge to the endpoint at rep " +
                      std::to_string(rep));
  }
  check.require(worst_identity <= 1e-12, "product identity residual " + fmt(worst_identity));
  check.note("jensen_slack=" + fmt(worst_slack) + " drift=" + fmt(worst_drift) +
             " identity=" + fmt(worst_identity));
  return check;
}

Check criterion_cap_bound(const AcceptanceOptions& options) {
  Check check;
  const long trials = options.quick ? 100000 : 1000000;
  for (Index d : {3, 5, 10}) {
    for (double delta : {0.1, 0.5, 1.0}) {
      const MCRun run = cap_bound_check(d, delta, trials,
                                        options.seed + 11 + static_cast<std::uint64_t>(d),
                                        options.workers);
      check.require(run.report.verdict == Verdict::Consistent,
                    "cap d=" + std::to_string(d) + " delta=" + fmt(delta) + " verdict " +
                        verdict_name(run.report.verdict));
      if (d == 3) {
        const double exact = cap_exact_d3(delta);
        check.require(std::fabs(run.report.point_estimate - exact) <= 0.002,
                      "cap d=3 delta=" + fmt(delta) + " empirical " +
                          fmt(run.report.point_estimate) + " vs exact " + fmt(exact));
      }
    }
  }
  check.note("9 (d, delta) pairs, " + std::to_string(trials) + " trials each");
  return check;
}

Check criterion_sandwich(const AcceptanceOptions& options) {
  Check check;
  const int instances = options.quick ? 15 : 50;
  InitDistribution dist{InitDistribution::Kind::GaussianIID, 1.0, options.seed + 12};
  RngStream rng(options.seed + 12, "sandwich");
  // instances are drawn sequentially for determinism, solved in parallel
  struct Instance {
    Dataset data;
    TwoLayerParams params;
  };
  std::vector<Instance> batch(static_cast<size_t>(instances));
  for (int inst = 0; inst < instances; ++inst) {
    const Index d = 1 + static_cast<Index>(rng.uniform_index(2));
    const Index n = 1 + static_cast<Index>(rng.uniform_index(2));
    const Index m = 1 + static_cast<Index>(rng.uniform_index(3));
    Dataset data;
    data.X.resize(m, d);
    // for d >= 2, keep instance pairs away from collinearity so the cone
    // stays wide enough for a grid to resolve and the minimizer stays in
    // range; in one dimension cones are intervals and need no guard
    for (bool conditioned = false; !conditioned;) {
      for (Index t = 0; t < m; ++t) data.X.row(t) = rng.unit_vector(d).transpose();
      conditioned = true;
      for (Index t = 0; t < m && conditioned && d >= 2; ++t)
        for (Index u = t + 1; u < m; ++u)
          if (std::fabs(data.X.row(t).dot(data.X.row(u))) > 0.9) conditioned = false;
    }
    data.targets.resize(m, 1);
    for (Index t = 0; t < m; ++t) data.targets(t, 0) = rng.uniform(-1.5, 1.5);
    batch[static_cast<size_t>(inst)].params =
        sample_two_layer(dist, n, d, static_cast<std::uint64_t>(inst));
    batch[static_cast<size_t>(inst)].data = std::move(data);
  }
  std::vector<double> gaps(static_cast<size_t>(instances), 0.0);
  std::vector<std::string> errors(static_cast<size_t>(instances));
  parallel_for(instances, options.workers, [&](long inst) {
    try {
      const Instance& instance = batch[static_cast<size_t>(inst)];
      const SignPattern pattern = extract_sign_pattern(instance.params, instance.data);
      const BasinSolveResult solved = solve_basin_value(pattern, instance.data);
      const double reference = oracles::grid_basin_oracle(pattern, instance.data);
      gaps[static_cast<size_t>(inst)] = std::fabs(solved.value - reference);
    } catch (const std::exception& err) {
      errors[static_cast<size_t>(inst)] = err.what();
    }
  });
  double worst = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    check.require(errors[static_cast<size_t>(inst)].empty(),
                  "instance " + std::to_string(inst) + ": " + errors[static_cast<size_t>(inst)]);
    worst = std::max(worst, gaps[static_cast<size_t>(inst)]);
    check.require(gaps[static_cast<size_t>(inst)] <= 1e-3,
                  "instance " + std::to_string(inst) + " |solver-grid| = " +
                      fmt(gaps[static_cast<size_t>(inst)]));
  }
  check.note(std::to_string(instances) + " instances, worst |solver-grid|=" + fmt(worst));
  return check;
}

}  // namespace

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const CriterionResult& r : results)
    if (!r.passed) return false;
  return true;
}

std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options,
                                                  std::ostream& log) {
  using Runner = std::function<Check()>;
  const std::vector<std::pair<std::string, Runner>> criteria = {
      {"hardness-dataset exact basin values", [&] { return criterion_hardness_values(); }},
      {"local-minima census at d=16", [&] { return criterion_census(options); }},
      {"singleton-data bound (d=5, n=20)", [&] { return criterion_thm3(options); }},
      {"full-rank construction bound (m=5, n=15)", [&] { return criterion_thm5(options); }},
      {"clustered-data bound (k=3, d=10, n=40)", [&] { return criterion_thm6(options); }},
      {"low-intrinsic-dimension bound (width 26)", [&] { return criterion_thm4(options); }},
      {"initialization-above-zero bound (widths 4,6,3)",
       [&] { return criterion_prop1(options); }},
      {"monotone descent paths (N=1000)", [&] { return criterion_paths(options); }},
      {"key-lemma monotonicity suite", [&] { return criterion_key_lemma(options); }},
      {"in-basin lemma suite (convexity, rescaling, interpolation)",
       [&] { return criterion_appendix_a(options); }},
      {"spherical-cap lower bound", [&] { return criterion_cap_bound(options); }},
      {"solver vs grid-oracle sandwich", [&] { return criterion_sandwich(options); }},
  };

  std::vector<CriterionResult> results;
  results.reserve(criteria.size());
  for (size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criteria[k].second();
    } catch (const std::exception& err) {
      check.ok = false;
      check.note(std::string("exception: ") + err.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CriterionResult result;
    result.id = static_cast<int>(k) + 1;
    result.name = criteria[k].first;
    result.passed = check.ok;
    result.seconds = seconds;
    result.detail = check.detail.str();
    log << (result.passed ? "[PASS]" : "[FAIL]") << " criterion " << result.id << ": "
        << result.name << " (" << fmt(seconds) << "s)";
    if (!result.detail.empty()) log << " -- " << result.detail;
    log << "\n" << std::flush;
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace basinlab
