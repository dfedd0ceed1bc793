#pragma once

#include <span>
#include <vector>

#include "atmsim/geometry.hpp"
#include "atmsim/policy.hpp"
#include "atmsim/types.hpp"

namespace atmsim {

struct IncidentDetectorParams {
  double c1 = 0.6;
  double c2 = 0.1;
  int debounce = 2;
};

/// Raw trigger evaluation for one station, all lanes of one interval.
/// A lane trips when its speed drops to zero with a vehicle stopped on the
/// detector, its count drops to zero after a nonzero interval, or its speed
/// falls below c1 of the previous interval while every other lane holds
/// above (1-c2) of its previous speed. `previous` may be empty on the first
/// interval.
std::vector<bool> evaluate_triggers(std::span<const DetectorSample> current,
                                    std::span<const DetectorSample> previous,
                                    const IncidentDetectorParams& params);

/// Debounced detection for one station. `counters` is caller-owned state,
/// one entry per lane (zero-initialized before the first call). A lane is
/// confirmed after `params.debounce` consecutive flagged intervals.
std::vector<bool> detect_incident(std::span<const DetectorSample> current,
                                  std::span<const DetectorSample> previous,
                                  const IncidentDetectorParams& params,
                                  std::vector<int>& counters);

/// Maps confirmed per-station flags to a located event: the downstream-most
/// flagged station wins and the event is placed at the midpoint of the
/// section downstream of it. Scheduled paving events pass through when
/// nothing is detected.
EventDescriptor locate_event(const std::vector<std::vector<bool>>& confirmed_per_station,
                             const RoadGeometry& geometry,
                             std::span<const EventDescriptor> scheduled, double now_s);

/// Pure decision-tree lookup for one gantry.
GantryDecision decide_lane_states(const DecisionInput& input, const PolicyTable& table,
                                  int gantry, int lane_count, double timestamp_s,
                                  DecisionSource source);

struct ChannelParams {
  IncidentDetectorParams detector;
  PolicyTable table = PolicyTable::default_table();
  double free_flow_speed_mph = 70.0;
  int hold_intervals = 6;  // confirmed event persists this many quiet intervals
};

/// One control channel: detection, location, and state selection composed
/// once per control interval, carrying debounce and hold state between
/// calls. The ATM channel and the monitoring channel are two instances of
/// this class fed from different sources.
class ControlChannel {
 public:
  ControlChannel(RoadGeometry geometry, ChannelParams params, DecisionSource source);

  /// `samples` holds one sample per (station, lane), station-major.
  std::vector<GantryDecision> update(const std::vector<DetectorSample>& samples, double now_s,
                                     std::span<const EventDescriptor> scheduled = {});

  const EventDescriptor& current_event() const { return current_event_; }

 private:
  RoadGeometry geometry_;
  ChannelParams params_;
  DecisionSource source_;
  std::vector<std::vector<int>> counters_;          // per station, per lane
  std::vector<std::vector<DetectorSample>> prev_;   // per station
  EventDescriptor current_event_;
  int hold_remaining_ = 0;
};

}  // namespace atmsim
