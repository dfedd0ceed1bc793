#pragma once

#include <array>
#include <vector>

#include "atmsim/units.hpp"

namespace atmsim {

/// Single-direction freeway segment with overhead gantries and one detector
/// station per lane just upstream of each gantry.
struct RoadGeometry {
  double length_mi = 1.5;
  int lane_count = 3;
  std::vector<double> gantry_positions_mi = {0.5, 1.0};
  double detector_setback_m = 15.0;
  std::array<double, 2> incident_zone_mi = {1.0, 1.5};

  double length_m() const { return miles_to_m(length_mi); }
  int gantry_count() const { return static_cast<int>(gantry_positions_mi.size()); }
  double gantry_position_m(int g) const { return miles_to_m(gantry_positions_mi.at(g)); }
  double detector_position_m(int station) const {
    return gantry_position_m(station) - detector_setback_m;
  }

  /// Midpoint of the section downstream of station g (up to the next gantry
  /// or the segment end).
  double section_midpoint_mi(int g) const;

  /// Throws std::invalid_argument on a malformed geometry.
  void validate() const;
};

}  // namespace atmsim
