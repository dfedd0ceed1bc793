#include "atmsim/geometry.hpp"

#include <stdexcept>
#include <string>

namespace atmsim {

double RoadGeometry::section_midpoint_mi(int g) const {
  const double start = gantry_positions_mi.at(g);
  const double end = (g + 1 < gantry_count()) ? gantry_positions_mi[g + 1] : length_mi;
  return 0.5 * (start + end);
}

void RoadGeometry::validate() const {
  if (length_mi <= 0.0) throw std::invalid_argument("geometry: length must be positive");
  if (lane_count < 2) throw std::invalid_argument("geometry: lane_count must be >= 2");
  if (gantry_positions_mi.empty())
    throw std::invalid_argument("geometry: at least one gantry required");
  double prev = 0.0;
  for (double g : gantry_positions_mi) {
    if (g <= 0.0 || g >= length_mi)
      throw std::invalid_argument("geometry: gantry position " + std::to_string(g) +
                                  " not strictly inside segment");
    if (g <= prev && prev != 0.0)
      throw std::invalid_argument("geometry: gantry positions must be increasing");
    prev = g;
  }
  for (int s = 0; s < gantry_count(); ++s) {
    const double d = detector_position_m(s);
    if (d <= 0.0 || d >= length_m())
      throw std::invalid_argument("geometry: detector position not strictly inside segment");
  }
  if (incident_zone_mi[0] < 0.0 || incident_zone_mi[1] > length_mi ||
      incident_zone_mi[0] >= incident_zone_mi[1])
    throw std::invalid_argument("geometry: incident zone must be a valid interval within the segment");
}

}  // namespace atmsim
