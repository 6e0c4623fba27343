#pragma once

#include "basinlab/nets.hpp"
#include "basinlab/types.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace basinlab {

/// The (A, b) pair identifying one cell of the basin partition:
/// A(i, t) = sign<w_i, x_t>, b(i) = sign v_i. Zero entries mark boundary
/// hits (a probability-zero event under spherically symmetric init).
struct SignPattern {
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> A;  // n x m
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, 1> b;               // n

  Index n() const { return A.rows(); }
  Index m() const { return A.cols(); }
  bool boundary() const;
  bool operator==(const SignPattern& other) const;

  SignPattern subset(const std::vector<Index>& neurons) const;
};

/// Entrywise signs with relative threshold 1e-12 * |w||x| for the zero band.
SignPattern extract_sign_pattern(const TwoLayerParams& params, const Dataset& data);

/// Canonical 64-bit hash of (A, b) for deduplicating basins across trials.
std::uint64_t pattern_hash(const SignPattern& pattern);

/// In-basin change of variables z_i = v_i * w_i. The objective becomes
/// (1/m) sum_t l(sum_i sigma_{i,t} <z_i, x_t>, y_t), which is convex in Z,
/// subject to the per-neuron cone b_i * a_{i,t} * <z_i, x_t> >= 0
/// (equality where a_{i,t} = 0, closure semantics).
struct BasinConstraints {
  struct HalfspaceSet {
    Matrix dirs;                   // one unit row per constraint on z_i
    std::vector<bool> equality;    // pins <z_i, x_t> = 0 where a_{i,t} = 0
    std::vector<Index> instance;   // originating t, for diagnostics
  };
  std::vector<HalfspaceSet> neuron;                       // n entries
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic> sigma;  // n x m in {0,1}
  std::vector<bool> clamped;  // b_i == 0: neuron pinned to z_i = 0

  Index n() const { return sigma.rows(); }
};

BasinConstraints build_constraints(const SignPattern& pattern, const Dataset& data);

/// Scalar convex loss hook; (value, derivative) as a function of the
/// prediction. Defaults to the squared loss against the dataset target.
using ScalarLoss = std::function<double(double prediction, double target)>;

double z_objective(const BasinConstraints& constraints, const Matrix& Z,
                   const Dataset& data);

Matrix z_objective_gradient(const BasinConstraints& constraints, const Matrix& Z,
                            const Dataset& data);

double max_constraint_violation(const BasinConstraints& constraints, const Matrix& Z);

/// Thrown when a pattern's strict sign system is infeasible for some neuron,
/// i.e. the basin of Definition-2 closure semantics is the empty set. Carries
/// a Gordan-style certificate: convex weights over the constraint directions
/// whose combination is (numerically) zero.
struct EmptyBasinError : std::runtime_error {
  EmptyBasinError(Index neuron_index, double certificate_norm, std::string what)
      : std::runtime_error(std::move(what)),
        neuron(neuron_index),
        certificate_norm(certificate_norm) {}
  Index neuron;
  double certificate_norm;
};

struct SolveOptions {
  double tol = 1e-8;             // duality-style gap target
  double feasibility_tol = 1e-10;
  long max_iterations = 100000;  // total inner iterations across penalty stages
  double penalty_initial = 1.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e12;
  bool check_empty = true;
};

struct BasinSolveResult {
  double value = 0.0;               // objective at the returned feasible point
  double lower_bound = 0.0;         // penalty dual lower bound
  Matrix z_star;                    // n x d
  double feasibility_residual = 0.0;
  double grad_residual = 0.0;       // KKT stationarity residual at z_star
  long iterations = 0;
  bool converged = false;
};

/// Minimizes the convex z-space objective over the pattern's cone:
/// quadratic-penalty homotopy with geometric growth, accelerated gradient
/// inner solves, feasibility polishing, and a feasible-point upper value
/// bracketed against the penalty lower bound. converged iff the gap is
/// within tol and the feasibility residual within 1e-10.
BasinSolveResult solve_basin_value(const SignPattern& pattern, const Dataset& data,
                                   const SolveOptions& options = {});

/// Recovers a parameter point in the basin closure from a z-space point
/// (any positive first/second layer split realizes the same network).
TwoLayerParams params_from_z(const Matrix& Z, const SignPattern& pattern);

/// Exact basin value for datasets of singleton instances (exactly one
/// nonzero coordinate each), by per-(coordinate, side) decomposition.
/// Squared loss is minimized in closed form; any other scalar convex loss
/// through the hook is minimized by ternary search to 1e-12.
double singleton_basin_oracle(const SignPattern& pattern, const Dataset& data);
double singleton_basin_oracle(const SignPattern& pattern, const Dataset& data,
                              const ScalarLoss& loss);

/// Minimal objective value achievable by ANY width-n two-layer net on a
/// singleton dataset, computed exactly from the per-(coordinate, side)
/// partial minima and the neuron sign budget.
double singleton_width_n_minimum(const Dataset& data, Index n);

/// Both sides of the key lemma: the basin value of the full net and of the
/// sub-network on the given neuron subset. Uses the exact oracle on
/// singleton data and the numerical solver otherwise.
std::pair<BasinSolveResult, BasinSolveResult> key_lemma_check(
    const TwoLayerParams& params, const std::vector<Index>& subset,
    const Dataset& data, const SolveOptions& options = {});

/// Discretized second-layer rescaling path alpha^(lambda) = 1-lambda+lambda|v_i|
/// sending v to sign(v); the network function and the sign pattern are
/// invariant along it. Neurons with v_i = 0 have w_i clamped linearly to 0.
std::vector<TwoLayerParams> second_layer_rescaling_path(const TwoLayerParams& params,
                                                        int steps);

/// Within-basin interpolation: v^(l) = l*vB + (1-l)*vA and
/// w^(l) chosen so that v^(l) w^(l) = l*vB*wB + (1-l)*vA*wA exactly.
/// Throws if the two points do not share a sign pattern on `data`.
TwoLayerParams basin_interpolation(const TwoLayerParams& a, const TwoLayerParams& b,
                                   double lambda, const Dataset& data);

}  // namespace basinlab
