/**
 * @file verify.hpp
 * @brief The acceptance checks as a library: each criterion returns its
 * worst measured deviation, the tolerance it was held to and its runtime.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skein/ribbon.hpp"

namespace skein {

struct VerifyConfig {
  int N = 5;                    // order for the criteria that are not pinned to N = 5, 7
  double tolerance_scale = 1.0; // multiplies every tolerance
  int jobs = 1;                 // evaluator threads
  std::uint64_t seed = 0xC9A1;  // decomposition seed
  Fault fault = Fault::None;    // injected into every Ribbon, for mutation tests
  std::vector<int> criteria;    // ids to run, empty for 1..11
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  double measured = 0.0;   // worst deviation, or 0/1 for structural checks
  double tolerance = 0.0;
  double seconds = 0.0;
  double time_limit = 0.0; // 0 when no runtime bound applies
  std::string detail;
};

/// Id 0 is a Yang-Baxter and braiding-inverse check on typical, simple and
/// projective modules; ids 1..11 are the acceptance criteria.
CriterionResult run_criterion(int id, const VerifyConfig& cfg);

/// Runs cfg.criteria (1..11 when empty) in order.
std::vector<CriterionResult> run_acceptance(const VerifyConfig& cfg);

/// max over the checked triples of the Yang-Baxter defect of rb's braiding.
double yang_baxter_residual(const Ribbon& rb);

}  // namespace skein
