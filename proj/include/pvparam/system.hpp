#pragma once

#include <map>
#include <string>

#include "pvparam/geometry.hpp"
#include "pvparam/layout.hpp"
#include "pvparam/orientation.hpp"

namespace pvparam {

/// One PV array with everything inferred about it.
struct PVSystemRecord {
  std::string id;
  ArrayPolygon footprint;
  OrientationEstimate orientation;
  ModuleLayout layout;
  double capacity_w = 0.0;
  /// Source file names and effective parameters, key -> value.
  std::map<std::string, std::string> provenance;
};

}  // namespace pvparam
