#pragma once

#include "basinlab/basins.hpp"
#include "basinlab/datasets.hpp"
#include "basinlab/init.hpp"
#include "basinlab/stats.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace basinlab {

enum class BoundId { Prop1, Thm3, Thm4, Thm5, Thm6, Thm7, CapLemma, NoisyRegionLemma };

std::string bound_name(BoundId id);
BoundId bound_from_name(const std::string& name);

struct ExperimentParams;

/// A closed-form probability bound evaluated at concrete experiment
/// parameters, with the direction of the claim. Values are clamped into
/// [0, 1]; a lower bound clamped up to 0 is vacuous but still valid.
struct BoundSpec {
  BoundId id;
  double bound = 0.0;
  BoundSide side = BoundSide::LowerBound;
};

BoundSpec make_bound_spec(BoundId id, const ExperimentParams& params);

/// One row of the per-trial diagnostics table.
struct TrialRecord {
  long index = 0;
  bool success = false;
  bool errored = false;
  double value = 0.0;        // event-defining quantity (basin value, distance, ...)
  double certificate = 0.0;  // proof-certificate value where applicable
  std::uint64_t pattern = 0; // pattern hash where applicable
  std::string note;
};

struct MCRun {
  MCReport report;
  std::vector<TrialRecord> trials;
};

/// Experiment knobs; unused fields are ignored by bounds that do not need
/// them. All randomness flows from `seed` through named per-trial substreams.
struct ExperimentParams {
  // network / data sizes
  Index d = 5;
  Index m = 5;
  Index n = 20;
  std::vector<Index> widths;  // deep-net hidden sizes (prop1)
  Index classes = 3;
  LossKind loss = LossKind::SquaredLoss;
  double epsilon = 0.1;       // hardness eps (thm3/thm7), target value (thm4)
  // thm4
  Index rank = 2;
  Index teacher_width = 1;
  double B = 1.0;
  int chernoff_c = 2;         // width multiplier c >= 2
  // thm6
  Index clusters = 3;
  Index points_per_cluster = 4;
  double radius_fraction = 0.1;
  double gamma = 0.5;
  // cap / noisy
  double delta = 0.5;
  double center_norm = 1.0;
  // engine
  InitDistribution::Kind init_kind = InitDistribution::Kind::GaussianIID;
  double init_scale = 1.0;  // immaterial for basin identity, kept configurable
  double solver_tol = 1e-6;
  bool cross_check_solver = false;  // run the numerical solver alongside certificates
};

MCRun run_bound_experiment(BoundId id, const ExperimentParams& params, long trials,
                           std::uint64_t seed, int workers = 1);

/// The rank-m construction: per-point loss minimizers y-bar, greedy
/// first-claimant targets y'_i, Gram solves X X^T a_i = y'_i, w'_i = X^T a_i,
/// v' = sign(v). Returns the constructed point iff every instance is claimed
/// (the event whose probability the theorem lower-bounds) and the point
/// passes the same-basin and exact-prediction checks.
struct FullRankCertificate {
  TwoLayerParams constructed;
  double objective = 0.0;
  double alpha = 0.0;            // minimal achievable objective
  double max_sign_violation = 0.0;
  double max_prediction_error = 0.0;
};
std::optional<FullRankCertificate> fullrank_construct(const TwoLayerParams& params,
                                                      const Dataset& data);

/// The clustered surrogate: checks the good event (no neuron of the retained
/// subset in a noisy region, every cluster claimed), builds W-tilde on the
/// centers through the Gram solve, projects each row onto the initialized
/// sign cone (Dykstra), and evaluates the surrogate objective against the
/// delta^2 ((1 + B/c) n sigma_max / sigma_min^2 |y-hat| + 2 gamma)^2 bound.
struct ClusteredCertificate {
  double objective = 0.0;
  double bound = 0.0;
  std::vector<Index> retained;   // non-noisy neurons used by the construction
  double max_sign_violation = 0.0;
  double max_radial_step = 0.0;  // largest |w' - w~| / |w~|
};
std::optional<ClusteredCertificate> clustered_construct(const TwoLayerParams& params,
                                                        const Dataset& data,
                                                        const ClusteredInfo& info,
                                                        std::string* fail_reason = nullptr);

double clustered_value_bound(const ClusteredInfo& info, Index n);

/// Claim-1 spherical cap experiment: Pr[|a - b| <= delta] for b uniform on
/// S^{d-1} against (1/(pi(d-1))) (delta sqrt(1 - delta^2/4))^{d-1}; for d = 3
/// the exact cap fraction is delta^2 / 4.
MCRun cap_bound_check(Index d, double delta, long trials, std::uint64_t seed,
                      int workers = 1);
double cap_bound_formula(Index d, double delta);
double cap_exact_d3(double delta);

/// Noisy-region experiment: w uniform on S^{d-1} is outside the
/// region of hyperplanes cutting the (center, delta) ball iff
/// |<w, center>| > delta; frequency against 1 - 1/(4d).
MCRun noisy_region_check(Index d, const Vector& center, double delta, long trials,
                         std::uint64_t seed, int workers = 1);

/// Exact census of the 2^d per-coordinate good/bad minima of the hardness
/// dataset: value (k*(1/2) + (d-k)*eps)/d for k bad coordinates, C(d, k)
/// minima each; the basin-value distribution under spherically symmetric
/// initialization is Binomial(d, 1/2) over k.
struct CensusResult {
  Index d = 0;
  double epsilon = 0.0;
  std::vector<double> value_by_bad_count;   // d+1 entries
  std::vector<double> minima_count;         // C(d, k)
  double threshold = 0.125;                 // c_l / 4 = L0 / 8
  double exact_tail = 0.0;                  // Pr[Bas <= threshold], exact binomial
  double chernoff_bound = 0.0;              // e^{-d/16}
  MCRun mc;                                 // empirical tail vs the bound
};
CensusResult appc_local_minima_census(Index d, double eps, long mc_trials,
                                      std::uint64_t seed, int workers = 1);

}  // namespace basinlab
