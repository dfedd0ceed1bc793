#pragma once

#include "atmsim/config.hpp"

namespace atmsim::tools {

/// Built-in oracle suite: detection-inequality enumeration, policy-table
/// totality, t-test known values, determinism double-run. Prints one
/// pass/fail line per check; returns the number of failures.
int run_verify(const ScenarioConfig& config);

}  // namespace atmsim::tools
