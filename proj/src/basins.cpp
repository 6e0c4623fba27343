#include "basinlab/basins.hpp"

#include "basinlab/datasets.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace basinlab {

bool SignPattern::boundary() const {
  for (Index i = 0; i < A.rows(); ++i) {
    if (b(i) == 0) return true;
    for (Index t = 0; t < A.cols(); ++t)
      if (A(i, t) == 0) return true;
  }
  return false;
}

bool SignPattern::operator==(const SignPattern& other) const {
  return A.rows() == other.A.rows() && A.cols() == other.A.cols() && A == other.A &&
         b == other.b;
}

SignPattern SignPattern::subset(const std::vector<Index>& neurons) const {
  SignPattern out;
  out.A.resize(static_cast<Index>(neurons.size()), A.cols());
  out.b.resize(static_cast<Index>(neurons.size()));
  for (size_t r = 0; r < neurons.size(); ++r) {
    const Index i = neurons[r];
    if (i < 0 || i >= A.rows())
      throw std::invalid_argument("subset neuron index out of range: " + std::to_string(i));
    out.A.row(static_cast<Index>(r)) = A.row(i);
    out.b(static_cast<Index>(r)) = b(i);
  }
  return out;
}

SignPattern extract_sign_pattern(const TwoLayerParams& params, const Dataset& data) {
  params.validate();
  data.validate();
  if (params.d() != data.d())
    detail::throw_shape("params and dataset dimensions disagree", params.W.rows(),
                        params.W.cols(), data.X.rows(), data.X.cols());
  const Index n = params.n();
  const Index m = data.m();
  SignPattern pattern;
  pattern.A.resize(n, m);
  pattern.b.resize(n);
  const Matrix inner = params.W * data.X.transpose();  // n x m
  Vector w_norms(n), x_norms(m);
  for (Index i = 0; i < n; ++i) w_norms(i) = params.W.row(i).norm();
  for (Index t = 0; t < m; ++t) x_norms(t) = data.X.row(t).norm();
  for (Index i = 0; i < n; ++i) {
    for (Index t = 0; t < m; ++t) {
      const double value = inner(i, t);
      const double band = 1e-12 * w_norms(i) * x_norms(t);
      pattern.A(i, t) = std::fabs(value) <= band ? 0 : (value > 0.0 ? 1 : -1);
    }
    pattern.b(i) = params.v(i) == 0.0 ? 0 : (params.v(i) > 0.0 ? 1 : -1);
  }
  return pattern;
}

std::uint64_t pattern_hash(const SignPattern& pattern) {
  // FNV-1a over (n, m, A row-major, b); stable across platforms
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto absorb = [&h](std::uint64_t word) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (word >> (8 * byte)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  absorb(static_cast<std::uint64_t>(pattern.n()));
  absorb(static_cast<std::uint64_t>(pattern.m()));
  for (Index i = 0; i < pattern.n(); ++i)
    for (Index t = 0; t < pattern.m(); ++t)
      absorb(static_cast<std::uint64_t>(static_cast<std::int64_t>(pattern.A(i, t)) + 2));
  for (Index i = 0; i < pattern.n(); ++i)
    absorb(static_cast<std::uint64_t>(static_cast<std::int64_t>(pattern.b(i)) + 2));
  return h;
}

BasinConstraints build_constraints(const SignPattern& pattern, const Dataset& data) {
  data.validate();
  if (pattern.m() != data.m())
    detail::throw_shape("pattern width must equal instance count", pattern.A.rows(),
                        pattern.A.cols(), data.X.rows(), data.X.cols());
  const Index n = pattern.n();
  const Index m = data.m();
  BasinConstraints constraints;
  constraints.sigma = Matrix::Zero(n, m);
  constraints.clamped.assign(static_cast<size_t>(n), false);
  constraints.neuron.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (pattern.b(i) == 0) {
      constraints.clamped[static_cast<size_t>(i)] = true;
      continue;
    }
    std::vector<Vector> dirs;
    std::vector<bool> equality;
    std::vector<Index> instance;
    for (Index t = 0; t < m; ++t) {
      const double x_norm = data.X.row(t).norm();
      if (x_norm == 0.0) continue;  // no information, constraint is vacuous
      const Vector unit = data.X.row(t).transpose() / x_norm;
      if (pattern.A(i, t) == 0) {
        dirs.push_back(unit);
        equality.push_back(true);
        instance.push_back(t);
      } else {
        dirs.push_back(static_cast<double>(pattern.b(i) * pattern.A(i, t)) * unit);
        equality.push_back(false);
        instance.push_back(t);
        if (pattern.A(i, t) == 1) constraints.sigma(i, t) = 1.0;
      }
    }
    BasinConstraints::HalfspaceSet set;
    set.dirs.resize(static_cast<Index>(dirs.size()), data.d());
    for (size_t r = 0; r < dirs.size(); ++r)
      set.dirs.row(static_cast<Index>(r)) = dirs[r].transpose();
    set.equality = std::move(equality);
    set.instance = std::move(instance);
    constraints.neuron[static_cast<size_t>(i)] = std::move(set);
  }
  return constraints;
}

namespace {

void require_scalar_squared(const Dataset& data) {
  if (data.loss != LossKind::SquaredLoss || data.k() != 1)
    throw std::invalid_argument(
        "basin machinery operates on scalar squared-loss datasets (two-layer nets "
        "have scalar output)");
}

Vector z_predictions(const BasinConstraints& constraints, const Matrix& Z,
                     const Dataset& data) {
  // p_t = sum_i sigma_{i,t} <z_i, x_t>
  const Matrix pre = data.X * Z.transpose();  // m x n
  return pre.cwiseProduct(constraints.sigma.transpose()).rowwise().sum();
}

}  // namespace

double z_objective(const BasinConstraints& constraints, const Matrix& Z,
                   const Dataset& data) {
  require_scalar_squared(data);
  if (!Z.allFinite()) throw std::invalid_argument("Z has non-finite entries");
  const Vector p = z_predictions(constraints, Z, data);
  return (p - data.targets.col(0)).squaredNorm() / static_cast<double>(data.m());
}

Matrix z_objective_gradient(const BasinConstraints& constraints, const Matrix& Z,
                            const Dataset& data) {
  require_scalar_squared(data);
  const Vector p = z_predictions(constraints, Z, data);
  const Vector resid = 2.0 / static_cast<double>(data.m()) * (p - data.targets.col(0));
  return (constraints.sigma * resid.asDiagonal()) * data.X;
}

double max_constraint_violation(const BasinConstraints& constraints, const Matrix& Z) {
  double worst = 0.0;
  for (Index i = 0; i < constraints.n(); ++i) {
    if (constraints.clamped[static_cast<size_t>(i)]) {
      worst = std::max(worst, Z.row(i).cwiseAbs().maxCoeff());
      continue;
    }
    const auto& set = constraints.neuron[static_cast<size_t>(i)];
    if (set.dirs.rows() == 0) continue;
    const Vector values = set.dirs * Z.row(i).transpose();
    for (Index r = 0; r < values.size(); ++r) {
      const double v = values(r);
      worst = std::max(worst, set.equality[static_cast<size_t>(r)] ? std::fabs(v)
                                                                   : std::max(0.0, -v));
    }
  }
  return worst;
}

namespace {

// Orthonormal basis of the span of the given unit rows (tolerant Gram-Schmidt).
Matrix orthonormal_basis(const std::vector<Vector>& rows, Index d) {
  Matrix basis(0, d);
  for (const Vector& row : rows) {
    Vector r = row;
    for (Index k = 0; k < basis.rows(); ++k) r -= basis.row(k).dot(r) * basis.row(k).transpose();
    const double norm = r.norm();
    if (norm > 1e-10) {
      basis.conservativeResize(basis.rows() + 1, d);
      basis.row(basis.rows() - 1) = r.transpose() / norm;
    }
  }
  return basis;
}

// Strict-feasibility check for one neuron's sign system via the perceptron,
// with a Gordan-style emptiness certificate when it stalls: the averaged
// update combination of the constraint directions collapsing to ~0 witnesses
// 0 in their convex hull, i.e. no strictly feasible point exists.
void check_neuron_feasible(Index neuron_index, const BasinConstraints::HalfspaceSet& set,
                           Index d) {
  std::vector<Vector> eq_dirs;
  std::vector<Vector> strict;
  for (Index r = 0; r < set.dirs.rows(); ++r) {
    if (set.equality[static_cast<size_t>(r)])
      eq_dirs.push_back(set.dirs.row(r).transpose());
    else
      strict.push_back(set.dirs.row(r).transpose());
  }
  if (strict.empty()) return;
  const Matrix eq_basis = orthonormal_basis(eq_dirs, d);
  std::vector<Vector> h;
  h.reserve(strict.size());
  for (Vector dir : strict) {
    for (Index k = 0; k < eq_basis.rows(); ++k)
      dir -= eq_basis.row(k).dot(dir) * eq_basis.row(k).transpose();
    const double norm = dir.norm();
    if (norm <= 1e-12) {
      std::ostringstream msg;
      msg << "empty basin: neuron " << neuron_index
          << " demands a strict sign on a direction pinned to zero by boundary "
             "constraints";
      throw EmptyBasinError(neuron_index, 0.0, msg.str());
    }
    h.push_back(dir / norm);
  }
  // mean direction is usually already strictly feasible
  Vector w = Vector::Zero(d);
  for (const Vector& dir : h) w += dir;
  double updates = static_cast<double>(h.size());
  const long cap = 20000 + 100 * static_cast<long>(h.size());
  for (long iter = 0; iter < cap; ++iter) {
    bool violated = false;
    for (const Vector& dir : h) {
      if (w.dot(dir) <= 1e-12 * std::max(1.0, w.norm())) {
        w += dir;
        updates += 1.0;
        violated = true;
      }
    }
    if (!violated) return;  // strictly feasible point found
  }
  const double certificate = w.norm() / updates;
  if (certificate <= 1e-8) {
    std::ostringstream msg;
    msg << "empty basin: neuron " << neuron_index
        << " has an infeasible strict sign system (Gordan certificate norm "
        << certificate << ")";
    throw EmptyBasinError(neuron_index, certificate, msg.str());
  }
  // thin but apparently feasible margin: proceed with the closure solve
}

// Cyclic projection onto the halfspace/hyperplane intersection. Violations
// arriving here are tiny (post-penalty), so a handful of passes suffices.
double pocs_polish(const BasinConstraints& constraints, Matrix& Z, int max_passes = 500) {
  double worst = max_constraint_violation(constraints, Z);
  for (int pass = 0; pass < max_passes && worst > 1e-13; ++pass) {
    for (Index i = 0; i < constraints.n(); ++i) {
      if (constraints.clamped[static_cast<size_t>(i)]) {
        Z.row(i).setZero();
        continue;
      }
      const auto& set = constraints.neuron[static_cast<size_t>(i)];
      for (Index r = 0; r < set.dirs.rows(); ++r) {
        const double value = set.dirs.row(r).dot(Z.row(i));
        if (set.equality[static_cast<size_t>(r)]) {
          Z.row(i) -= value * set.dirs.row(r);
        } else if (value < 0.0) {
          Z.row(i) -= value * set.dirs.row(r);
        }
      }
    }
    worst = max_constraint_violation(constraints, Z);
  }
  return worst;
}

double penalty_value(const BasinConstraints& constraints, const Matrix& Z, double rho,
                     const Dataset& data) {
  double quad = 0.0;
  for (Index i = 0; i < constraints.n(); ++i) {
    if (constraints.clamped[static_cast<size_t>(i)]) continue;
    const auto& set = constraints.neuron[static_cast<size_t>(i)];
    if (set.dirs.rows() == 0) continue;
    const Vector values = set.dirs * Z.row(i).transpose();
    for (Index r = 0; r < values.size(); ++r) {
      const double v = set.equality[static_cast<size_t>(r)] ? values(r)
                                                            : std::min(0.0, values(r));
      quad += v * v;
    }
  }
  return z_objective(constraints, Z, data) + 0.5 * rho * quad;
}

Matrix penalty_gradient(const BasinConstraints& constraints, const Matrix& Z, double rho,
                        const Dataset& data) {
  Matrix grad = z_objective_gradient(constraints, Z, data);
  for (Index i = 0; i < constraints.n(); ++i) {
    if (constraints.clamped[static_cast<size_t>(i)]) {
      grad.row(i).setZero();
      continue;
    }
    const auto& set = constraints.neuron[static_cast<size_t>(i)];
    if (set.dirs.rows() == 0) continue;
    const Vector values = set.dirs * Z.row(i).transpose();
    for (Index r = 0; r < values.size(); ++r) {
      const double v = set.equality[static_cast<size_t>(r)] ? values(r)
                                                            : std::min(0.0, values(r));
      if (v != 0.0) grad.row(i) += rho * v * set.dirs.row(r);
    }
  }
  return grad;
}

// Largest eigenvalue of sum_r d_r d_r^T by power iteration (d x d, d small).
double constraint_gram_eigmax(const BasinConstraints::HalfspaceSet& set, Index d) {
  if (set.dirs.rows() == 0) return 0.0;
  const Matrix gram = set.dirs.transpose() * set.dirs;  // d x d
  Vector u = Vector::Ones(d).normalized();
  double eig = 0.0;
  for (int iter = 0; iter < 60; ++iter) {
    Vector next = gram * u;
    eig = next.norm();
    if (eig == 0.0) return 0.0;
    u = next / eig;
  }
  return eig;
}

// Largest eigenvalue of the loss Hessian (2/m) sum_t s_t s_t^T, matrix-free.
double loss_hessian_eigmax(const BasinConstraints& constraints, const Dataset& data) {
  const Index n = constraints.n();
  const Index d = data.d();
  Matrix U = Matrix::Ones(n, d);
  U /= U.norm();
  double eig = 0.0;
  for (int iter = 0; iter < 60; ++iter) {
    const Vector p = z_predictions(constraints, U, data);
    const Matrix next =
        2.0 / static_cast<double>(data.m()) * (constraints.sigma * p.asDiagonal()) * data.X;
    eig = next.norm();
    if (eig == 0.0) return 0.0;
    U = next / eig;
  }
  return eig;
}

// KKT decomposition at a feasible point: per neuron, the nearest point
// D^T mu (mu >= 0 on active inequalities, free on equalities) to the
// objective gradient. `combination` collects D^T mu rows; the returned
// residual is the largest per-neuron distance (0 at an exact optimum).
struct KKTFit {
  Matrix combination;   // n x d
  double residual = 0.0;
};

KKTFit kkt_fit(const BasinConstraints& constraints, const Matrix& Z, const Dataset& data) {
  const Matrix grad = z_objective_gradient(constraints, Z, data);
  KKTFit fit;
  fit.combination = Matrix::Zero(Z.rows(), Z.cols());
  for (Index i = 0; i < constraints.n(); ++i) {
    if (constraints.clamped[static_cast<size_t>(i)]) continue;
    const auto& set = constraints.neuron[static_cast<size_t>(i)];
    const double z_scale = std::max(1.0, Z.row(i).norm());
    std::vector<Index> active;
    std::vector<bool> is_eq;
    for (Index r = 0; r < set.dirs.rows(); ++r) {
      const double value = set.dirs.row(r).dot(Z.row(i));
      if (set.equality[static_cast<size_t>(r)] || std::fabs(value) <= 1e-8 * z_scale) {
        active.push_back(r);
        is_eq.push_back(set.equality[static_cast<size_t>(r)]);
      }
    }
    Vector target = grad.row(i).transpose();
    if (active.empty()) {
      fit.residual = std::max(fit.residual, target.norm());
      continue;
    }
    Vector mu = Vector::Zero(static_cast<Index>(active.size()));
    Vector res = target;
    for (int sweep = 0; sweep < 400; ++sweep) {
      double changed = 0.0;
      for (size_t j = 0; j < active.size(); ++j) {
        const auto dir = set.dirs.row(active[j]);
        double step = dir.dot(res);
        double next = mu(static_cast<Index>(j)) + step;
        if (!is_eq[j]) next = std::max(0.0, next);
        step = next - mu(static_cast<Index>(j));
        if (step != 0.0) {
          mu(static_cast<Index>(j)) = next;
          res -= step * dir.transpose();
          changed = std::max(changed, std::fabs(step));
        }
      }
      if (changed < 1e-15) break;
    }
    fit.combination.row(i) = (target - res).transpose();
    fit.residual = std::max(fit.residual, res.norm());
  }
  return fit;
}

// Exact Lagrangian dual value for the quadratic loss at multiplier estimates
// mu: with the combination M = G^T mu expressed as S^T w (least squares in
// the m-dimensional instance space), the dual evaluates in closed form to
// -(m/4) |w|^2 - w^T y. Valid lower bound up to the representation residual,
// which is discounted against the iterate radius.
double quadratic_dual_bound(const BasinConstraints& constraints, const Matrix& Z,
                            const Dataset& data, const KKTFit& fit) {
  const Index m = data.m();
  const double md = static_cast<double>(m);
  // Gram of the stacked sigma-weighted instances s_t
  const Matrix K = (constraints.sigma.transpose() * constraints.sigma)
                       .cwiseProduct(data.X * data.X.transpose());
  Vector rhs(m);
  for (Index t = 0; t < m; ++t)
    rhs(t) = constraints.sigma.col(t).dot(fit.combination * data.X.row(t).transpose());
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
  const Vector w = cod.solve(rhs);
  const Matrix represented = (constraints.sigma * w.asDiagonal()) * data.X;
  const double representation_residual = (represented - fit.combination).norm();
  // exact unconstrained minimum of the Lagrangian: predictions land on the
  // projection of y + (m/2) w onto the achievable prediction subspace
  const Vector target = data.targets.col(0) + 0.5 * md * w;
  const Vector projected = K * cod.solve(target);
  const double dual =
      (projected - data.targets.col(0)).squaredNorm() / md - w.dot(projected);
  const double radius = 1.0 + 2.0 * Z.norm();
  return dual - (representation_residual + fit.residual) * radius;
}

}  // namespace

BasinSolveResult solve_basin_value(const SignPattern& pattern, const Dataset& data,
                                   const SolveOptions& options) {
  require_scalar_squared(data);
  const BasinConstraints constraints = build_constraints(pattern, data);
  const Index n = pattern.n();
  const Index d = data.d();
  if (options.check_empty) {
    for (Index i = 0; i < n; ++i) {
      if (constraints.clamped[static_cast<size_t>(i)]) continue;
      check_neuron_feasible(i, constraints.neuron[static_cast<size_t>(i)], d);
    }
  }

  const double floor = objective_floor(data.loss);
  const double loss_eigmax = std::max(loss_hessian_eigmax(constraints, data), 1e-12);
  double penalty_eigmax = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (constraints.clamped[static_cast<size_t>(i)]) continue;
    penalty_eigmax = std::max(
        penalty_eigmax, constraint_gram_eigmax(constraints.neuron[static_cast<size_t>(i)], d));
  }
  const double grad_scale =
      std::max(1.0, z_objective_gradient(constraints, Matrix::Zero(n, d), data).norm());
  const double gtol = std::max(1e-13, 1e-3 * options.tol) * grad_scale;

  BasinSolveResult result;
  Matrix Z = Matrix::Zero(n, d);
  double rho = options.penalty_initial;
  double lower = floor;
  long total_iters = 0;
  double upper = std::numeric_limits<double>::infinity();
  Matrix Z_feasible = Z;

  while (true) {
    double lipschitz = 1.05 * (loss_eigmax + rho * penalty_eigmax) + 1e-12;
    double step = 1.0 / lipschitz;
    // FISTA with gradient restart
    Matrix x = Z;
    Matrix y = Z;
    double t_k = 1.0;
    double reference_value = penalty_value(constraints, Z, rho, data);
    const long stage_cap =
        std::min<long>(40000, std::max<long>(500, options.max_iterations - total_iters));
    long inner = 0;
    for (; inner < stage_cap; ++inner) {
      const Matrix grad = penalty_gradient(constraints, y, rho, data);
      const Matrix x_new = y - step * grad;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
      const Matrix diff = x_new - x;
      if ((diff.array() * grad.array()).sum() > 0.0) {
        // momentum points uphill: restart
        t_k = 1.0;
        y = x_new;
      } else {
        y = x_new + ((t_k - 1.0) / t_next) * diff;
        t_k = t_next;
      }
      x = x_new;
      if ((inner & 15) == 15) {
        if (penalty_gradient(constraints, x, rho, data).norm() <= gtol) break;
        const double current = penalty_value(constraints, x, rho, data);
        if (current > reference_value * (1.0 + 1e-9) + 1e-12) {
          // the power-iterated Lipschitz bound was too optimistic
          lipschitz *= 2.0;
          step = 1.0 / lipschitz;
          x = Z;
          y = Z;
          t_k = 1.0;
        } else {
          reference_value = std::min(reference_value, current);
        }
      }
    }
    Z = x;
    total_iters += inner + 1;

    // penalty minimum lower-bounds the basin value; discount the inner
    // inexactness through the final gradient norm
    const double stage_grad = penalty_gradient(constraints, Z, rho, data).norm();
    const double radius = 1.0 + 2.0 * Z.norm();
    lower = std::max(lower,
                     penalty_value(constraints, Z, rho, data) - stage_grad * radius);
    Matrix Zp = Z;
    const double feas = pocs_polish(constraints, Zp);
    const double candidate = z_objective(constraints, Zp, data);
    if (candidate < upper) {
      upper = candidate;
      Z_feasible = Zp;
      result.feasibility_residual = feas;
    }
    // Lagrangian dual value at the polished point's multiplier estimates:
    // a much tighter certificate than the raw penalty value once active
    const KKTFit fit = kkt_fit(constraints, Z_feasible, data);
    result.grad_residual = fit.residual;
    lower = std::max(lower, quadratic_dual_bound(constraints, Z_feasible, data, fit));
    const double gap = std::max(0.0, upper - std::min(lower, upper));
    if (gap <= options.tol && result.feasibility_residual <= options.feasibility_tol) {
      result.converged = true;
      break;
    }
    if (total_iters >= options.max_iterations || rho >= options.penalty_max) break;
    rho *= options.penalty_growth;
  }

  result.value = upper;
  result.lower_bound = std::min(lower, upper);
  result.z_star = Z_feasible;
  result.iterations = total_iters;
  return result;
}

TwoLayerParams params_from_z(const Matrix& Z, const SignPattern& pattern) {
  if (Z.rows() != pattern.n())
    detail::throw_shape("Z rows must match pattern neurons", Z.rows(), Z.cols(),
                        pattern.n(), pattern.m());
  TwoLayerParams params;
  params.W = Matrix::Zero(Z.rows(), Z.cols());
  params.v = Vector::Zero(Z.rows());
  for (Index i = 0; i < Z.rows(); ++i) {
    const double b = static_cast<double>(pattern.b(i));
    const double norm = Z.row(i).norm();
    if (b == 0.0 || norm == 0.0) {
      params.v(i) = b;
      continue;  // w_i stays 0; dead neuron
    }
    const double split = std::sqrt(norm);
    params.v(i) = b * split;
    params.W.row(i) = b / split * Z.row(i);
  }
  return params;
}

// ---------------------------------------------------------------------------
// Singleton datasets: exact machinery
// ---------------------------------------------------------------------------

namespace {

struct SingletonLayout {
  // per instance: its unique nonzero coordinate and value
  std::vector<Index> coord;
  std::vector<double> value;
  // instances grouped by (coordinate, side); side 0 = positive, 1 = negative
  std::map<std::pair<Index, int>, std::vector<Index>> groups;
};

SingletonLayout singleton_layout(const Dataset& data) {
  SingletonLayout layout;
  layout.coord.resize(static_cast<size_t>(data.m()));
  layout.value.resize(static_cast<size_t>(data.m()));
  for (Index t = 0; t < data.m(); ++t) {
    Index nonzero = -1;
    for (Index j = 0; j < data.d(); ++j) {
      if (data.X(t, j) != 0.0) {
        if (nonzero >= 0)
          throw std::invalid_argument("instance " + std::to_string(t) +
                                      " is not a singleton (multiple nonzero coordinates)");
        nonzero = j;
      }
    }
    if (nonzero < 0)
      throw std::invalid_argument("instance " + std::to_string(t) +
                                  " is not a singleton (all-zero row)");
    layout.coord[static_cast<size_t>(t)] = nonzero;
    layout.value[static_cast<size_t>(t)] = data.X(t, nonzero);
    const int side = data.X(t, nonzero) > 0.0 ? 0 : 1;
    layout.groups[{nonzero, side}].push_back(t);
  }
  return layout;
}

enum class Achievable { Zero, NonNeg, NonPos, Free };

// Minimum of sum_t (val_t * q - y_t)^2 over q in the achievable set.
double singleton_entry(const Dataset& data, Index t) {
  for (Index j = 0; j < data.d(); ++j)
    if (data.X(t, j) != 0.0) return data.X(t, j);
  return 0.0;
}

double partial_min_squared(const Dataset& data, const std::vector<Index>& instances,
                           Achievable set) {
  double num = 0.0, den = 0.0;
  for (Index t : instances) {
    const double x = singleton_entry(data, t);
    num += x * data.targets(t, 0);
    den += x * x;
  }
  double q = den > 0.0 ? num / den : 0.0;
  switch (set) {
    case Achievable::Zero: q = 0.0; break;
    case Achievable::NonNeg: q = std::max(0.0, q); break;
    case Achievable::NonPos: q = std::min(0.0, q); break;
    case Achievable::Free: break;
  }
  double total = 0.0;
  for (Index t : instances) {
    const double diff = singleton_entry(data, t) * q - data.targets(t, 0);
    total += diff * diff;
  }
  return total;
}

double partial_min_generic(const Dataset& data, const std::vector<Index>& instances,
                           Achievable set, const ScalarLoss& loss) {
  auto eval = [&](double q) {
    double total = 0.0;
    for (Index t : instances) total += loss(singleton_entry(data, t) * q, data.targets(t, 0));
    return total;
  };
  if (set == Achievable::Zero) return eval(0.0);
  // bracket the minimizer by doubling, then ternary search to 1e-12
  double lo = 0.0, hi = 0.0;
  if (set == Achievable::NonNeg || set == Achievable::Free) {
    hi = 1.0;
    while (eval(hi) <= eval(hi * 0.5) && hi < 1e30) hi *= 2.0;
  }
  if (set == Achievable::NonPos || set == Achievable::Free) {
    lo = -1.0;
    while (eval(lo) <= eval(lo * 0.5) && lo > -1e30) lo *= 2.0;
  }
  while (hi - lo > 1e-12 * std::max(1.0, std::fabs(hi) + std::fabs(lo))) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (eval(m1) <= eval(m2))
      hi = m2;
    else
      lo = m1;
  }
  return eval(0.5 * (lo + hi));
}

// Side signs s_{i,j} = sign(w_{i,j}) implied by the pattern; throws when the
// pattern is inconsistent with the singleton structure.
Matrix side_signs(const SignPattern& pattern, const Dataset& data,
                  const SingletonLayout& layout) {
  constexpr double kUnset = 2.0;
  Matrix s = Matrix::Constant(pattern.n(), data.d(), kUnset);
  for (Index i = 0; i < pattern.n(); ++i) {
    for (Index t = 0; t < data.m(); ++t) {
      const Index j = layout.coord[static_cast<size_t>(t)];
      const double implied = static_cast<double>(pattern.A(i, t)) *
                             (layout.value[static_cast<size_t>(t)] > 0.0 ? 1.0 : -1.0);
      if (s(i, j) == kUnset) {
        s(i, j) = implied;
      } else if (s(i, j) != implied) {
        std::ostringstream msg;
        msg << "pattern inconsistent with singleton structure at neuron " << i
            << ", coordinate " << j;
        throw std::invalid_argument(msg.str());
      }
    }
  }
  return s;
}

Achievable achievable_set(bool has_positive, bool has_negative) {
  if (has_positive && has_negative) return Achievable::Free;
  if (has_positive) return Achievable::NonNeg;
  if (has_negative) return Achievable::NonPos;
  return Achievable::Zero;
}

double singleton_oracle_impl(const SignPattern& pattern, const Dataset& data,
                             const ScalarLoss* loss) {
  data.validate();
  if (pattern.m() != data.m())
    detail::throw_shape("pattern width must equal instance count", pattern.A.rows(),
                        pattern.A.cols(), data.X.rows(), data.X.cols());
  if (loss == nullptr) require_scalar_squared(data);
  const SingletonLayout layout = singleton_layout(data);
  const Matrix s = side_signs(pattern, data, layout);
  double total = 0.0;
  for (const auto& [key, instances] : layout.groups) {
    const auto [j, side] = key;
    const double side_sign = side == 0 ? 1.0 : -1.0;
    bool has_positive = false, has_negative = false;
    for (Index i = 0; i < pattern.n(); ++i) {
      if (pattern.b(i) == 0) continue;  // clamped neuron contributes nothing
      if (s(i, j) == side_sign) {
        // each active term v_i * w_{i,j} carries sign b_i * sign(w_{i,j})
        const double term = static_cast<double>(pattern.b(i)) * side_sign;
        (term > 0.0 ? has_positive : has_negative) = true;
      }
    }
    const Achievable set = achievable_set(has_positive, has_negative);
    total += loss ? partial_min_generic(data, instances, set, *loss)
                  : partial_min_squared(data, instances, set);
  }
  return total / static_cast<double>(data.m());
}

}  // namespace

double singleton_basin_oracle(const SignPattern& pattern, const Dataset& data) {
  return singleton_oracle_impl(pattern, data, nullptr);
}

double singleton_basin_oracle(const SignPattern& pattern, const Dataset& data,
                              const ScalarLoss& loss) {
  return singleton_oracle_impl(pattern, data, &loss);
}

double singleton_width_n_minimum(const Dataset& data, Index n) {
  data.validate();
  require_scalar_squared(data);
  if (n < 1) throw std::invalid_argument("width must be >= 1");
  const SingletonLayout layout = singleton_layout(data);
  // per (coordinate, side): minima under each achievable set
  struct SideCosts {
    double zero = 0.0, nonneg = 0.0, nonpos = 0.0, free = 0.0;
    bool present = false;
  };
  std::map<Index, std::array<SideCosts, 2>> coords;
  for (const auto& [key, instances] : layout.groups) {
    const auto [j, side] = key;
    SideCosts costs;
    costs.zero = partial_min_squared(data, instances, Achievable::Zero);
    costs.nonneg = partial_min_squared(data, instances, Achievable::NonNeg);
    costs.nonpos = partial_min_squared(data, instances, Achievable::NonPos);
    costs.free = partial_min_squared(data, instances, Achievable::Free);
    costs.present = true;
    coords[j][static_cast<size_t>(side)] = costs;
  }
  // each side is served by nothing, a v-positive neuron, a v-negative one,
  // or one of each; a v-positive neuron active on side s contributes a term
  // of sign s, so the reachable set flips with the side. Every neuron has a
  // fresh weight entry per coordinate, so the budget is the global
  // (n_plus, n_minus) split capped at 2 per side.
  struct Option {
    int use_plus, use_minus;
    double cost;
  };
  auto side_options = [](const SideCosts& costs, int side) {
    std::vector<Option> options;
    if (!costs.present) {
      options.push_back({0, 0, 0.0});
      return options;
    }
    const double plus_cost = side == 0 ? costs.nonneg : costs.nonpos;
    const double minus_cost = side == 0 ? costs.nonpos : costs.nonneg;
    options.push_back({0, 0, costs.zero});
    options.push_back({1, 0, plus_cost});
    options.push_back({0, 1, minus_cost});
    options.push_back({1, 1, costs.free});
    return options;
  };
  double best = std::numeric_limits<double>::infinity();
  for (Index n_plus = 0; n_plus <= n; ++n_plus) {
    const int cap_plus = static_cast<int>(std::min<Index>(n_plus, 2));
    const int cap_minus = static_cast<int>(std::min<Index>(n - n_plus, 2));
    double total = 0.0;
    for (const auto& [j, sides] : coords) {
      double coord_best = std::numeric_limits<double>::infinity();
      for (const auto& pos : side_options(sides[0], 0)) {
        for (const auto& neg : side_options(sides[1], 1)) {
          if (pos.use_plus + neg.use_plus > cap_plus) continue;
          if (pos.use_minus + neg.use_minus > cap_minus) continue;
          coord_best = std::min(coord_best, pos.cost + neg.cost);
        }
      }
      total += coord_best;
    }
    best = std::min(best, total);
  }
  return best / static_cast<double>(data.m());
}

std::pair<BasinSolveResult, BasinSolveResult> key_lemma_check(
    const TwoLayerParams& params, const std::vector<Index>& subset, const Dataset& data,
    const SolveOptions& options) {
  if (subset.empty()) throw std::invalid_argument("subset must be nonempty");
  std::vector<Index> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("subset has repeated neuron indices");
  const SignPattern full = extract_sign_pattern(params, data);
  const SignPattern sub = full.subset(subset);
  if (is_singleton_dataset(data)) {
    BasinSolveResult a, b;
    a.value = singleton_basin_oracle(full, data);
    a.converged = true;
    b.value = singleton_basin_oracle(sub, data);
    b.converged = true;
    return {a, b};
  }
  return {solve_basin_value(full, data, options), solve_basin_value(sub, data, options)};
}

std::vector<TwoLayerParams> second_layer_rescaling_path(const TwoLayerParams& params,
                                                        int steps) {
  params.validate();
  if (steps < 1) throw std::invalid_argument("need at least one step");
  std::vector<TwoLayerParams> path;
  path.reserve(static_cast<size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    const double lambda = static_cast<double>(k) / static_cast<double>(steps);
    TwoLayerParams point = params;
    for (Index i = 0; i < params.n(); ++i) {
      if (params.v(i) != 0.0) {
        const double alpha = 1.0 - lambda + lambda * std::fabs(params.v(i));
        point.W.row(i) = alpha * params.W.row(i);
        point.v(i) = params.v(i) / alpha;
      } else {
        // dead neuron: clamp its weights to zero along the path
        point.W.row(i) = (1.0 - lambda) * params.W.row(i);
      }
    }
    path.push_back(std::move(point));
  }
  return path;
}

TwoLayerParams basin_interpolation(const TwoLayerParams& a, const TwoLayerParams& b,
                                   double lambda, const Dataset& data) {
  a.validate();
  b.validate();
  if (a.n() != b.n() || a.d() != b.d())
    detail::throw_shape("interpolation endpoints must share shape", a.W.rows(), a.W.cols(),
                        b.W.rows(), b.W.cols());
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must lie in [0, 1]");
  const SignPattern pa = extract_sign_pattern(a, data);
  const SignPattern pb = extract_sign_pattern(b, data);
  if (!(pa == pb))
    throw std::invalid_argument("interpolation endpoints lie in different basins");
  TwoLayerParams out;
  out.W.resize(a.n(), a.d());
  out.v.resize(a.n());
  for (Index i = 0; i < a.n(); ++i) {
    const double v_l = lambda * b.v(i) + (1.0 - lambda) * a.v(i);
    out.v(i) = v_l;
    if (a.v(i) == 0.0 && b.v(i) == 0.0) {
      out.W.row(i) = lambda * b.W.row(i) + (1.0 - lambda) * a.W.row(i);
    } else {
      out.W.row(i) =
          (lambda * b.v(i) * b.W.row(i) + (1.0 - lambda) * a.v(i) * a.W.row(i)) / v_l;
    }
  }
  return out;
}

}  // namespace basinlab
