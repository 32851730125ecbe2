#pragma once

#include <string>
#include <vector>

#include "mcx/numkit.hpp"

namespace mcx {

// One verified property: the measured value at `location` against a
// threshold. Aggregated checks report their worst sample.
struct CheckRecord {
  std::string name;
  Vec location;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline bool all_pass(const std::vector<CheckRecord>& checks) {
  for (const CheckRecord& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace mcx
