#include "basinlab/montecarlo.hpp"

#include "basinlab/nets.hpp"
#include "basinlab/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace basinlab {

std::string bound_name(BoundId id) {
  switch (id) {
    case BoundId::Prop1: return "prop1";
    case BoundId::Thm3: return "thm3";
    case BoundId::Thm4: return "thm4";
    case BoundId::Thm5: return "thm5";
    case BoundId::Thm6: return "thm6";
    case BoundId::Thm7: return "thm7";
    case BoundId::CapLemma: return "cap";
    default: return "noisy";
  }
}

BoundId bound_from_name(const std::string& name) {
  if (name == "prop1") return BoundId::Prop1;
  if (name == "thm3") return BoundId::Thm3;
  if (name == "thm4") return BoundId::Thm4;
  if (name == "thm5") return BoundId::Thm5;
  if (name == "thm6") return BoundId::Thm6;
  if (name == "thm7") return BoundId::Thm7;
  if (name == "cap") return BoundId::CapLemma;
  if (name == "noisy") return BoundId::NoisyRegionLemma;
  throw std::invalid_argument("unknown bound id: " + name);
}

BoundSpec make_bound_spec(BoundId id, const ExperimentParams& params) {
  BoundSpec spec;
  spec.id = id;
  spec.side = id == BoundId::Thm7 ? BoundSide::UpperBound : BoundSide::LowerBound;
  const auto dd = [](Index v) { return static_cast<double>(v); };
  switch (id) {
    case BoundId::Prop1: {
      if (params.widths.empty())
        throw std::invalid_argument("prop1 bound needs hidden widths");
      spec.bound = 0.5 * (1.0 - std::pow(2.0, -dd(params.widths.back())));
      break;
    }
    case BoundId::Thm3:
      spec.bound = 1.0 - 2.0 * dd(params.d) * std::pow(0.75, dd(params.n));
      break;
    case BoundId::Thm4:
      spec.bound = 1.0 - std::exp(-0.25 * params.chernoff_c * dd(params.teacher_width));
      break;
    case BoundId::Thm5:
      spec.bound = 1.0 - dd(params.m) * std::pow(0.75, dd(params.n));
      break;
    case BoundId::Thm6:
      spec.bound = 1.0 - dd(params.d) * std::pow(7.0 / 8.0, dd(params.n));
      break;
    case BoundId::Thm7:
      spec.bound = std::exp(-dd(params.d) / 16.0);
      break;
    case BoundId::CapLemma:
      spec.bound = cap_bound_formula(params.d, params.delta);
      break;
    case BoundId::NoisyRegionLemma:
      spec.bound = 1.0 - 1.0 / (4.0 * dd(params.d));
      break;
  }
  spec.bound = std::clamp(spec.bound, 0.0, 1.0);
  return spec;
}

namespace {

using TrialFn = std::function<TrialRecord(long)>;

MCRun run_trials(const std::string& name, long trials, std::uint64_t seed, int workers,
                 BoundSide side, double bound, const TrialFn& fn) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  std::vector<TrialRecord> records(static_cast<size_t>(trials));
  parallel_for(trials, workers, [&](long i) {
    TrialRecord record;
    record.index = i;
    try {
      record = fn(i);
      record.index = i;
    } catch (const std::exception& err) {
      record.errored = true;
      record.note = err.what();
    }
    records[static_cast<size_t>(i)] = std::move(record);
  });
  long successes = 0, errored = 0;
  for (const TrialRecord& r : records) {
    successes += r.success && !r.errored ? 1 : 0;
    errored += r.errored ? 1 : 0;
  }
  MCRun run;
  run.report = finalize_report(name, trials, successes, errored, bound, side, seed);
  for (const TrialRecord& r : records) {
    if (run.report.diagnostics_sample.size() >= 8) break;
    if (!r.note.empty())
      run.report.diagnostics_sample.push_back("trial " + std::to_string(r.index) + ": " +
                                              r.note);
  }
  run.trials = std::move(records);
  return run;
}

double pow_double(double base, Index exponent) {
  return std::pow(base, static_cast<double>(exponent));
}

}  // namespace

// ---------------------------------------------------------------------------
// Proof constructions
// ---------------------------------------------------------------------------

std::optional<FullRankCertificate> fullrank_construct(const TwoLayerParams& params,
                                                      const Dataset& data) {
  data.validate();
  params.validate();
  if (data.loss != LossKind::SquaredLoss || data.k() != 1)
    throw std::invalid_argument("fullrank_construct needs scalar squared loss");
  const Index n = params.n();
  const Index m = data.m();
  const Matrix gram = data.X * data.X.transpose();
  const Eigen::LDLT<Matrix> solver(gram);
  if (solver.info() != Eigen::Success || !solver.isPositive())
    throw std::invalid_argument("Gram matrix is singular: rank(X) = m is required");

  // per-point loss minimizers; for the squared loss the targets themselves
  const Vector ybar = data.targets.col(0);
  const Matrix inner = params.W * data.X.transpose();  // n x m

  // first-claimant rule: neuron i claims t iff <w_i, x_t> > 0, v_i*ybar_t >= 0
  // and no earlier neuron claims t
  std::vector<Index> claimant(static_cast<size_t>(m), -1);
  for (Index t = 0; t < m; ++t) {
    for (Index i = 0; i < n; ++i) {
      const bool sign_ok =
          params.v(i) * ybar(t) > 0.0 || ybar(t) == 0.0;  // v_i = 0 cannot realize ybar != 0
      if (inner(i, t) > 0.0 && sign_ok) {
        claimant[static_cast<size_t>(t)] = i;
        break;
      }
    }
    if (claimant[static_cast<size_t>(t)] < 0) return std::nullopt;
  }

  FullRankCertificate cert;
  cert.constructed.W = Matrix::Zero(n, data.d());
  cert.constructed.v.resize(n);
  for (Index i = 0; i < n; ++i)
    cert.constructed.v(i) = params.v(i) == 0.0 ? 0.0 : (params.v(i) > 0.0 ? 1.0 : -1.0);
  for (Index i = 0; i < n; ++i) {
    Vector y_prime = Vector::Zero(m);
    bool any = false;
    for (Index t = 0; t < m; ++t) {
      if (claimant[static_cast<size_t>(t)] == i) {
        y_prime(t) = std::fabs(ybar(t));
        any = true;
      }
    }
    if (!any) continue;  // w'_i stays 0 and predicts nothing
    const Vector a = solver.solve(y_prime);
    cert.constructed.W.row(i) = (data.X.transpose() * a).transpose();
  }

  // same-basin check (closure semantics: products >= 0) and exact predictions
  const Matrix inner_new = cert.constructed.W * data.X.transpose();
  double sign_violation = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double scale = std::max(1.0, cert.constructed.W.row(i).norm());
    for (Index t = 0; t < m; ++t) {
      const double original = inner(i, t);
      if (original == 0.0) continue;
      const double product = (original > 0.0 ? 1.0 : -1.0) * inner_new(i, t);
      sign_violation = std::max(sign_violation, -product / scale);
    }
  }
  cert.max_sign_violation = sign_violation;
  const Matrix P = prediction_matrix(cert.constructed, data);
  cert.max_prediction_error = (P.col(0) - ybar).cwiseAbs().maxCoeff();
  cert.objective = objective(data.loss, P, data.targets);
  cert.alpha = 0.0;  // squared loss: ybar fits every point exactly
  if (cert.max_sign_violation > 1e-8) return std::nullopt;
  return cert;
}

double clustered_value_bound(const ClusteredInfo& info, Index n) {
  const double delta = info.delta_max;
  const double factor = (1.0 + info.B / info.c) * static_cast<double>(n) * info.sigma_max /
                            (info.sigma_min * info.sigma_min) * info.cluster_targets.norm() +
                        2.0 * info.gamma;
  return delta * delta * factor * factor;
}

namespace {

// Dykstra's alternating projections onto an intersection of homogeneous
// halfspaces {w : <dir_r, w> >= 0}; converges to the exact projection.
Vector project_onto_sign_cone(const Vector& point, const Matrix& dirs, int max_passes = 2000) {
  Vector x = point;
  Matrix corrections = Matrix::Zero(dirs.rows(), dirs.cols());
  for (int pass = 0; pass < max_passes; ++pass) {
    double moved = 0.0;
    for (Index r = 0; r < dirs.rows(); ++r) {
      const Vector y = x + corrections.row(r).transpose();
      const double value = dirs.row(r).dot(y);
      Vector projected = y;
      if (value < 0.0) projected -= value * dirs.row(r).transpose();
      corrections.row(r) = (y - projected).transpose();
      moved = std::max(moved, (x - projected).norm());
      x = projected;
    }
    double violation = 0.0;
    for (Index r = 0; r < dirs.rows(); ++r)
      violation = std::max(violation, -dirs.row(r).dot(x));
    if (violation <= 1e-14 * std::max(1.0, x.norm()) && moved <= 1e-14 * std::max(1.0, x.norm()))
      break;
  }
  return x;
}

}  // namespace

std::optional<ClusteredCertificate> clustered_construct(const TwoLayerParams& params,
                                                        const Dataset& data,
                                                        const ClusteredInfo& info,
                                                        std::string* fail_reason) {
  data.validate();
  params.validate();
  if (data.cluster_ids.empty())
    throw std::invalid_argument("clustered_construct needs cluster assignments");
  const Index n = params.n();
  const Index m = data.m();
  const Index k = info.centers.rows();

  // retain neurons whose hyperplane misses every cluster ball
  std::vector<Index> retained;
  std::vector<bool> noisy_flag(static_cast<size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    const double w_norm = params.W.row(i).norm();
    if (w_norm == 0.0 || params.v(i) == 0.0) continue;
    for (Index j = 0; j < k; ++j) {
      if (std::fabs(params.W.row(i).dot(info.centers.row(j))) / w_norm <= info.radii(j)) {
        noisy_flag[static_cast<size_t>(i)] = true;
        break;
      }
    }
    if (!noisy_flag[static_cast<size_t>(i)]) retained.push_back(i);
  }

  // every cluster must be claimed by some retained neuron
  auto claims = [&](Index i, Index j) {
    const bool sign_ok =
        params.v(i) * info.cluster_targets(j) > 0.0 || info.cluster_targets(j) == 0.0;
    return params.W.row(i).dot(info.centers.row(j)) > 0.0 && sign_ok;
  };
  std::vector<Index> claimant(static_cast<size_t>(k), -1);
  for (Index j = 0; j < k; ++j) {
    for (Index i : retained) {
      if (claims(i, j)) {
        claimant[static_cast<size_t>(j)] = i;
        break;
      }
    }
    if (claimant[static_cast<size_t>(j)] < 0) {
      if (fail_reason) {
        std::ostringstream msg;
        msg << "cluster " << j + 1 << " unclaimed";
        for (Index i = 0; i < n; ++i) {
          if (noisy_flag[static_cast<size_t>(i)] && claims(i, j)) {
            msg << " (neuron " << i << " would claim it but sits in a noisy region)";
            break;
          }
        }
        *fail_reason = msg.str();
      }
      return std::nullopt;
    }
  }

  const Matrix gram = info.centers * info.centers.transpose();
  const Eigen::LDLT<Matrix> solver(gram);
  if (solver.info() != Eigen::Success)
    throw std::invalid_argument("cluster centers are not in general position");

  ClusteredCertificate cert;
  cert.retained = retained;
  cert.bound = clustered_value_bound(info, n);

  const Matrix inner = params.W * data.X.transpose();  // signs of the initialization
  Vector predictions = Vector::Zero(m);
  double sign_violation = 0.0;
  double max_radial = 0.0;
  for (Index i : retained) {
    Vector y_prime = Vector::Zero(k);
    bool any = false;
    for (Index j = 0; j < k; ++j) {
      if (claimant[static_cast<size_t>(j)] == i) {
        y_prime(j) = std::fabs(info.cluster_targets(j));
        any = true;
      }
    }
    Vector w_tilde = Vector::Zero(data.d());
    if (any) w_tilde = info.centers.transpose() * solver.solve(y_prime);

    // the surrogate: closest point of the initialized sign region
    Matrix dirs(m, data.d());
    for (Index t = 0; t < m; ++t) {
      const double x_norm = data.X.row(t).norm();
      const double sign = inner(i, t) >= 0.0 ? 1.0 : -1.0;
      dirs.row(t) = x_norm > 0.0 ? (sign / x_norm) * data.X.row(t) : 0.0 * data.X.row(t);
    }
    const Vector w_prime = any ? project_onto_sign_cone(w_tilde, dirs) : w_tilde;
    if (any && w_tilde.norm() > 0.0)
      max_radial = std::max(max_radial, (w_prime - w_tilde).norm() / w_tilde.norm());

    const double v_sign = params.v(i) > 0.0 ? 1.0 : -1.0;
    for (Index t = 0; t < m; ++t) {
      const double value = data.X.row(t).dot(w_prime);
      const double sign = inner(i, t) >= 0.0 ? 1.0 : -1.0;
      sign_violation = std::max(sign_violation,
                                -sign * value / std::max(1.0, w_prime.norm()));
      predictions(t) += v_sign * relu(value);
    }
  }
  cert.max_sign_violation = sign_violation;
  if (sign_violation > 1e-9) {
    if (fail_reason)
      *fail_reason = "surrogate left the initialized sign region (violation " +
                     std::to_string(sign_violation) + ")";
    return std::nullopt;
  }
  cert.max_radial_step = max_radial;
  cert.objective = (predictions - data.targets.col(0)).squaredNorm() / static_cast<double>(m);
  return cert;
}

// ---------------------------------------------------------------------------
// Direct geometric experiments
// ---------------------------------------------------------------------------

double cap_bound_formula(Index d, double delta) {
  if (d < 2 || !(delta > 0.0 && delta < 2.0))
    throw std::invalid_argument("cap bound needs d >= 2 and delta in (0, 2)");
  const double base = delta * std::sqrt(1.0 - delta * delta / 4.0);
  return pow_double(base, d - 1) / (std::numbers::pi * static_cast<double>(d - 1));
}

double cap_exact_d3(double delta) {
  // (1 - cos(2 asin(delta/2))) / 2 collapses to delta^2 / 4
  return delta * delta / 4.0;
}

MCRun cap_bound_check(Index d, double delta, long trials, std::uint64_t seed, int workers) {
  const double bound = cap_bound_formula(d, delta);
  return run_trials("cap", trials, seed, workers, BoundSide::LowerBound, bound, [=](long i) {
    RngStream stream(seed, "cap/trial", static_cast<std::uint64_t>(i));
    Vector a = Vector::Zero(d);
    a(0) = 1.0;
    const Vector b = stream.unit_vector(d);
    TrialRecord record;
    record.value = (a - b).norm();
    record.success = record.value <= delta;
    return record;
  });
}

MCRun noisy_region_check(Index d, const Vector& center, double delta, long trials,
                         std::uint64_t seed, int workers) {
  if (center.size() != d) throw std::invalid_argument("center dimension mismatch");
  const double norm = center.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("center must be nonzero");
  if (delta / norm > clustered_radius_bound(d) * (1.0 + 1e-12))
    throw std::invalid_argument("delta exceeds the clustered-radius bound");
  const double bound = 1.0 - 1.0 / (4.0 * static_cast<double>(d));
  Vector c = center;
  return run_trials("noisy", trials, seed, workers, BoundSide::LowerBound, bound,
                    [=](long i) {
                      RngStream stream(seed, "noisy/trial", static_cast<std::uint64_t>(i));
                      const Vector w = stream.unit_vector(d);
                      TrialRecord record;
                      record.value = std::fabs(w.dot(c));
                      record.success = record.value > delta;
                      return record;
                    });
}

CensusResult appc_local_minima_census(Index d, double eps, long mc_trials,
                                      std::uint64_t seed, int workers) {
  if (d < 1 || d > 20)
    throw std::invalid_argument("census enumeration supports 1 <= d <= 20");
  if (!(eps > 0.0 && eps < 0.25)) throw std::invalid_argument("eps must lie in (0, 1/4)");
  CensusResult census;
  census.d = d;
  census.epsilon = eps;
  census.threshold = 0.125;  // c_l / 4 with c_l = L0 / 2 = 1/2 for the squared loss
  census.value_by_bad_count.resize(static_cast<size_t>(d) + 1);
  census.minima_count.resize(static_cast<size_t>(d) + 1);
  double binom = 1.0;
  long threshold_k = -1;
  for (Index bad = 0; bad <= d; ++bad) {
    const double value =
        (static_cast<double>(bad) * 0.5 + static_cast<double>(d - bad) * eps) /
        static_cast<double>(d);
    census.value_by_bad_count[static_cast<size_t>(bad)] = value;
    census.minima_count[static_cast<size_t>(bad)] = binom;
    binom = binom * static_cast<double>(d - bad) / static_cast<double>(bad + 1);
    if (value <= census.threshold) threshold_k = bad;
  }
  census.exact_tail = binomial_cdf(threshold_k, d, 0.5);
  census.chernoff_bound = std::exp(-static_cast<double>(d) / 16.0);
  const double threshold = census.threshold;
  census.mc = run_trials(
      "thm7", mc_trials, seed, workers, BoundSide::UpperBound, census.chernoff_bound,
      [=](long i) {
        RngStream stream(seed, "thm7/trial", static_cast<std::uint64_t>(i));
        const Vector w = stream.gaussian_vector(d);
        Index bad = 0;
        for (Index j = 0; j < d; ++j)
          if (w(j) > 0.0) ++bad;
        TrialRecord record;
        record.value = (static_cast<double>(bad) * 0.5 +
                        static_cast<double>(d - bad) * eps) /
                       static_cast<double>(d);
        record.success = record.value <= threshold;
        return record;
      });
  return census;
}

// ---------------------------------------------------------------------------
// Bound experiment dispatcher
// ---------------------------------------------------------------------------

namespace {

MCRun run_prop1(const ExperimentParams& params, long trials, std::uint64_t seed,
                int workers) {
  RngStream data_stream(seed, "dataset");
  Dataset data;
  data.X.resize(params.m, params.d);
  for (Index t = 0; t < params.m; ++t)
    data.X.row(t) = data_stream.gaussian_vector(params.d).transpose();
  data.loss = params.loss;
  if (params.loss == LossKind::SquaredLoss) {
    data.prediction_dim = 1;
    data.targets = data_stream.gaussian_vector(params.m);
  } else {
    data.prediction_dim = params.classes;
    data.targets.resize(params.m, 1);
    for (Index t = 0; t < params.m; ++t)
      data.targets(t, 0) = static_cast<double>(
          data_stream.uniform_index(static_cast<std::uint64_t>(params.classes)));
  }
  data.validate();
  std::vector<Index> sizes;
  sizes.push_back(params.d);
  for (Index w : params.widths) sizes.push_back(w);
  sizes.push_back(data.k());
  if (params.widths.empty()) throw std::invalid_argument("prop1 needs hidden widths");
  const double bound = make_bound_spec(BoundId::Prop1, params).bound;
  const double Lzero =
      objective(data.loss, Matrix::Zero(data.m(), data.k()), data.targets);
  InitDistribution dist{params.init_kind, params.init_scale, seed};
  return run_trials("prop1", trials, seed, workers, BoundSide::LowerBound, bound,
                    [=](long i) {
                      const DeepParams net =
                          sample_deep(dist, sizes, static_cast<std::uint64_t>(i));
                      const Matrix P = prediction_matrix(net, data);
                      TrialRecord record;
                      record.value = objective(data.loss, P, data.targets);
                      record.success = record.value > Lzero;
                      return record;
                    });
}

MCRun run_thm3(const ExperimentParams& params, long trials, std::uint64_t seed,
               int workers) {
  const Dataset data = gen_singleton_hardness({params.d, params.epsilon, LossKind::SquaredLoss});
  const double alpha = singleton_width_n_minimum(data, params.n);
  const double bound = make_bound_spec(BoundId::Thm3, params).bound;
  InitDistribution dist{params.init_kind, params.init_scale, seed};
  const bool cross_check = params.cross_check_solver;
  const double solver_tol = params.solver_tol;
  return run_trials("thm3", trials, seed, workers, BoundSide::LowerBound, bound, [=](long i) {
    const TwoLayerParams net =
        sample_two_layer(dist, params.n, params.d, static_cast<std::uint64_t>(i));
    const SignPattern pattern = extract_sign_pattern(net, data);
    TrialRecord record;
    record.pattern = pattern_hash(pattern);
    record.value = singleton_basin_oracle(pattern, data);
    record.success = record.value <= alpha + 1e-12;
    if (cross_check) {
      SolveOptions options;
      options.tol = solver_tol;
      options.check_empty = false;
      const BasinSolveResult solved = solve_basin_value(pattern, data, options);
      record.certificate = solved.value;
      const bool solver_event = solved.value <= alpha + 1e-6;
      if (solver_event != record.success)
        record.note = "oracle/solver event disagreement: oracle=" +
                      std::to_string(record.value) +
                      " solver=" + std::to_string(solved.value);
    }
    return record;
  });
}

MCRun run_thm4(const ExperimentParams& params, long trials, std::uint64_t seed,
               int workers) {
  RngStream data_stream(seed, "dataset");
  LowRankSpec spec;
  spec.d = params.d;
  spec.m = params.m;
  spec.rank = params.rank;
  spec.teacher_width = params.teacher_width;
  spec.B = params.B;
  const auto [data, teacher] = gen_lowrank_realizable(spec, data_stream);
  const double p_eps = p_epsilon(params.epsilon, params.teacher_width, params.B, params.rank);
  const Index width = static_cast<Index>(params.chernoff_c) *
                      static_cast<Index>(std::ceil(static_cast<double>(params.teacher_width) / p_eps));
  const double bound = make_bound_spec(BoundId::Thm4, params).bound;
  InitDistribution dist{params.init_kind, params.init_scale, seed};
  const double eps = params.epsilon;
  const double solver_tol = params.solver_tol;
  return run_trials("thm4", trials, seed, workers, BoundSide::LowerBound, bound, [=](long i) {
    const TwoLayerParams net =
        sample_two_layer(dist, width, params.d, static_cast<std::uint64_t>(i));
    const SignPattern pattern = extract_sign_pattern(net, data);
    SolveOptions options;
    options.tol = solver_tol;
    options.check_empty = false;
    const BasinSolveResult solved = solve_basin_value(pattern, data, options);
    TrialRecord record;
    record.pattern = pattern_hash(pattern);
    record.value = solved.value;
    record.success = solved.value <= eps;
    return record;
  });
}

MCRun run_thm5(const ExperimentParams& params, long trials, std::uint64_t seed,
               int workers) {
  RngStream data_stream(seed, "dataset");
  const Dataset data = gen_fullrank({params.m, params.d, std::nullopt}, data_stream);
  const double alpha = 0.0;
  const double bound = make_bound_spec(BoundId::Thm5, params).bound;
  InitDistribution dist{params.init_kind, params.init_scale, seed};
  const bool cross_check = params.cross_check_solver;
  const double solver_tol = params.solver_tol;
  return run_trials("thm5", trials, seed, workers, BoundSide::LowerBound, bound, [=](long i) {
    const TwoLayerParams net =
        sample_two_layer(dist, params.n, params.d, static_cast<std::uint64_t>(i));
    TrialRecord record;
    const auto cert = fullrank_construct(net, data);
    if (cert) {
      record.success = true;
      record.certificate = cert->objective;
      record.note = "constructed";
      if (cross_check) {
        const SignPattern pattern = extract_sign_pattern(net, data);
        record.pattern = pattern_hash(pattern);
        SolveOptions options;
        options.tol = solver_tol;
        options.check_empty = false;
        const BasinSolveResult solved = solve_basin_value(pattern, data, options);
        record.value = solved.value;
      } else {
        record.value = cert->objective;
      }
    } else {
      // the event is a disjunction: the solver may still certify the basin
      const SignPattern pattern = extract_sign_pattern(net, data);
      record.pattern = pattern_hash(pattern);
      SolveOptions options;
      options.tol = solver_tol;
      options.check_empty = false;
      const BasinSolveResult solved = solve_basin_value(pattern, data, options);
      record.value = solved.value;
      record.certificate = -1.0;  // construction failed
      record.success = solved.value <= alpha + 1e-6;
      record.note = record.success ? "solver-certified" : "unclaimed instance";
    }
    return record;
  });
}

MCRun run_thm6(const ExperimentParams& params, long trials, std::uint64_t seed,
               int workers) {
  RngStream data_stream(seed, "dataset");
  ClusteredSpec spec;
  spec.d = params.d;
  spec.k = params.clusters;
  spec.points_per_cluster.assign(static_cast<size_t>(params.clusters),
                                 params.points_per_cluster);
  spec.radius_fraction = params.radius_fraction;
  spec.gamma = params.gamma;
  ClusteredInfo info;
  const Dataset data = gen_clustered(spec, data_stream, &info);
  const double bound_prob = make_bound_spec(BoundId::Thm6, params).bound;
  InitDistribution dist{params.init_kind, params.init_scale, seed};
  const double value_bound = clustered_value_bound(info, params.n);
  const bool cross_check = params.cross_check_solver;
  const double solver_tol = params.solver_tol;
  return run_trials(
      "thm6", trials, seed, workers, BoundSide::LowerBound, bound_prob, [=](long i) {
        const TwoLayerParams net =
            sample_two_layer(dist, params.n, params.d, static_cast<std::uint64_t>(i));
        TrialRecord record;
        std::string fail_reason;
        const auto cert = clustered_construct(net, data, info, &fail_reason);
        if (cert) {
          record.certificate = cert->objective;
          record.success = cert->objective <= cert->bound + 1e-12;
          record.note = "constructed";
          record.value = cert->objective;
          if (cross_check) {
            const SignPattern pattern = extract_sign_pattern(net, data);
            record.pattern = pattern_hash(pattern);
            SolveOptions options;
            options.tol = solver_tol;
            options.check_empty = false;
            const BasinSolveResult solved = solve_basin_value(pattern, data, options);
            record.value = solved.value;
          }
        } else {
          const SignPattern pattern = extract_sign_pattern(net, data);
          record.pattern = pattern_hash(pattern);
          SolveOptions options;
          options.tol = solver_tol;
          options.check_empty = false;
          const BasinSolveResult solved = solve_basin_value(pattern, data, options);
          record.value = solved.value;
          record.certificate = -1.0;
          record.success = solved.value <= value_bound + 1e-6;
          record.note = (record.success ? "solver-certified; " : "") + fail_reason;
        }
        return record;
      });
}

MCRun run_thm7(const ExperimentParams& params, long trials, std::uint64_t seed,
               int workers) {
  return appc_local_minima_census(params.d, params.epsilon, trials, seed, workers).mc;
}

}  // namespace

MCRun run_bound_experiment(BoundId id, const ExperimentParams& params, long trials,
                           std::uint64_t seed, int workers) {
  switch (id) {
    case BoundId::Prop1: return run_prop1(params, trials, seed, workers);
    case BoundId::Thm3: return run_thm3(params, trials, seed, workers);
    case BoundId::Thm4: return run_thm4(params, trials, seed, workers);
    case BoundId::Thm5: return run_thm5(params, trials, seed, workers);
    case BoundId::Thm6: return run_thm6(params, trials, seed, workers);
    case BoundId::Thm7: return run_thm7(params, trials, seed, workers);
    case BoundId::CapLemma:
      return cap_bound_check(params.d, params.delta, trials, seed, workers);
    case BoundId::NoisyRegionLemma: {
      Vector center = Vector::Zero(params.d);
      center(0) = params.center_norm;
      return noisy_region_check(params.d, center, params.delta, trials, seed, workers);
    }
  }
  throw std::logic_error("unreachable bound id");
}

}  // namespace basinlab
