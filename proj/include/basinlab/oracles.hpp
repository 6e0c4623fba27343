// Test-only reference implementations: brute-force oracles kept independent
// of the production solver paths. Linked into the verification suite and the
// unit tests; not part of the library API proper.
#pragma once

#include "basinlab/basins.hpp"
#include "basinlab/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace basinlab::oracles {

/// Brute-force basin value for tiny instances (n*d <= 4) by dense Cartesian
/// grid search with recentred local refinement and an adaptive range. The
/// in-basin objective is convex in z and the cone is convex, so a box scan
/// that recentres on every improvement cannot be trapped away from the
/// minimum once the grid resolves the cone width.
inline double grid_basin_oracle_ranged(const SignPattern& pattern, const Dataset& data,
                                       double range, double* best_inf_norm = nullptr) {
  const Index n = pattern.n();
  const Index d = data.d();
  const Index m = data.m();
  const Index vars = n * d;
  if (vars > 4) throw std::invalid_argument("grid oracle supports n*d <= 4");

  auto feasible = [&](const std::vector<double>& z) {
    for (Index i = 0; i < n; ++i) {
      double norm_sq = 0.0;
      for (Index j = 0; j < d; ++j) {
        const double zj = z[static_cast<size_t>(i * d + j)];
        norm_sq += zj * zj;
      }
      const double slack = 1e-12 * std::max(1.0, std::sqrt(norm_sq));
      for (Index t = 0; t < m; ++t) {
        double inner = 0.0;
        for (Index j = 0; j < d; ++j)
          inner += z[static_cast<size_t>(i * d + j)] * data.X(t, j);
        if (pattern.A(i, t) == 0) {
          if (std::fabs(inner) > 1e-9) return false;
        } else if (static_cast<double>(pattern.b(i)) * static_cast<double>(pattern.A(i, t)) *
                       inner <
                   -slack) {
          return false;
        }
      }
    }
    return true;
  };
  auto value = [&](const std::vector<double>& z) {
    double total = 0.0;
    for (Index t = 0; t < m; ++t) {
      double prediction = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (pattern.A(i, t) != 1 || pattern.b(i) == 0) continue;
        for (Index j = 0; j < d; ++j)
          prediction += z[static_cast<size_t>(i * d + j)] * data.X(t, j);
      }
      const double diff = prediction - data.targets(t, 0);
      total += diff * diff;
    }
    return total / static_cast<double>(m);
  };

  std::vector<double> best(static_cast<size_t>(vars), 0.0);
  double best_value = value(best);  // the origin is always feasible

  // scans the box center +- half at the given step; returns true on improvement
  // (center is a snapshot: `best` moves as improvements land)
  auto scan = [&](std::vector<double> center, double half, double step) {
    const Index count = static_cast<Index>(std::floor(2.0 * half / step)) + 1;
    std::vector<Index> idx(static_cast<size_t>(vars), 0);
    std::vector<double> z(static_cast<size_t>(vars));
    bool improved = false;
    while (true) {
      for (Index v = 0; v < vars; ++v)
        z[static_cast<size_t>(v)] = std::clamp(
            center[static_cast<size_t>(v)] - half + static_cast<double>(idx[static_cast<size_t>(v)]) * step,
            -range, range);
      if (feasible(z)) {
        const double candidate = value(z);
        if (candidate < best_value - 1e-16) {
          best_value = candidate;
          best = z;
          improved = true;
        }
      }
      Index v = 0;
      for (; v < vars; ++v) {
        if (++idx[static_cast<size_t>(v)] < count) break;
        idx[static_cast<size_t>(v)] = 0;
      }
      if (v == vars) break;
    }
    return improved;
  };

  double step = range / 16.0;
  scan(best, range, step);  // exhaustive coarse pass
  for (int level = 0; level < 12; ++level) {
    const double half = 2.0 * step;
    step /= 2.0;
    for (int recenter = 0; recenter < 60; ++recenter) {
      const double before = best_value;
      if (!scan(best, half, step)) break;
      // creep while it pays; sub-tolerance gains do not
      if (before - best_value < 1e-10) break;
    }
  }
  if (best_inf_norm) {
    double inf_norm = 0.0;
    for (double coordinate : best) inf_norm = std::max(inf_norm, std::fabs(coordinate));
    *best_inf_norm = inf_norm;
  }
  return best_value;
}

/// Doubles the search radius until the minimizer sits strictly inside it.
inline double grid_basin_oracle(const SignPattern& pattern, const Dataset& data) {
  double best = std::numeric_limits<double>::infinity();
  for (double range = 3.0; range <= 100.0; range *= 2.0) {
    double inf_norm = 0.0;
    best = std::min(best, grid_basin_oracle_ranged(pattern, data, range, &inf_norm));
    if (inf_norm <= 0.6 * range) break;
  }
  return best;
}

}  // namespace basinlab::oracles
