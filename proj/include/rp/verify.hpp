#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace rp {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0;  // the quantity the check thresholds, or a constant it reports
  std::string note;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass = false;
  nlohmann::json to_json() const;
};

/// Runs every module's invariant checks at fixed seeds and desk-scale grids.
/// Deterministic: two runs produce identical reports.
VerifyReport verify_suite(unsigned long long seed = 7);

}  // namespace rp
