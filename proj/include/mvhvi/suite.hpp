#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mvhvi/types.hpp"

// The property battery gating a release: formulation equivalence, oracle
// agreement, first-component uniqueness, Hoelder stability, solution-set
// convexity, a-priori bounds, Clarke calculus, the inf-sup estimator, and
// the special-case crosschecks.  Every tolerance is pinned here.

namespace mvhvi {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> run_acceptance_suite(std::uint64_t seed,
                                                  std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

} // namespace mvhvi
