#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace basinlab {

struct AcceptanceOptions {
  bool quick = false;       // reduced trial counts for smoke runs
  std::uint64_t seed = 20160405;
  int workers = 2;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  std::string detail;
};

/// Runs the full verification suite: exact hardness values, the local-minima
/// census, every probability bound at desk scale, the monotone-path batch,
/// the key-lemma and in-basin lemma suites, the spherical-cap experiment and
/// the solver/grid-oracle sandwich. One pass/fail line per criterion.
std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options,
                                                  std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace basinlab
