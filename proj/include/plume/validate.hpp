#pragma once

// Fast invariant suite behind `plume validate`.

#include <cstdint>
#include <string>
#include <vector>

#include "plume/sensing.hpp"

namespace plume {

struct ValidationOptions {
  // Use the sign-flipped inverse (-c/l0 in the lower right) instead of the
  // true inverse; the transform identity must then fail.
  bool printed_inverse = false;
  SensorRig rig = SensorRig::cross(0.75);
  std::uint64_t seed = 20150801;
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<PropertyResult> run_validation(const ValidationOptions& options = {});

}  // namespace plume
