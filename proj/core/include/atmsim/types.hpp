#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace atmsim {

enum class LaneState : int { Open = 0, Merge = 1, Closed = 2 };

inline const char* to_string(LaneState s) {
  switch (s) {
    case LaneState::Open: return "open";
    case LaneState::Merge: return "merge";
    case LaneState::Closed: return "closed";
  }
  return "?";
}

enum class DecisionSource { ATMChannel, MonitoringChannel };

inline const char* to_string(DecisionSource s) {
  return s == DecisionSource::ATMChannel ? "atm" : "monitoring";
}

/// Per-lane instruction set displayed on one gantry.
struct GantryDecision {
  int gantry = 0;
  std::vector<LaneState> states;
  double timestamp_s = 0.0;
  DecisionSource source = DecisionSource::ATMChannel;

  friend bool operator==(const GantryDecision&, const GantryDecision&) = default;
};

struct Vehicle {
  std::int64_t id = 0;
  int lane = 0;
  double position_m = 0.0;   // from segment start
  double speed_mps = 0.0;
  double accel_mps2 = 0.0;
  double length_m = 4.5;
  double desired_speed_mps = 0.0;
  bool is_cv = true;
  bool compliant = true;
  std::optional<int> pending_merge;  // target lane of a mandatory change
  double last_lane_change_s = -1e9;
};

/// One aggregated (station, lane, interval) measurement. `u_mph` is empty
/// when no vehicle crossed and none sat stopped on the detector; the
/// stopped-vehicle case yields u=0, q=0.
struct DetectorSample {
  int station = 0;
  int lane = 0;
  int interval = 0;
  std::optional<double> u_mph;
  int q = 0;

  bool empty() const { return !u_mph.has_value(); }
  friend bool operator==(const DetectorSample&, const DetectorSample&) = default;
};

struct CVReport {
  std::int64_t vehicle_id = 0;
  int lane = 0;
  double position_m = 0.0;
  double speed_mps = 0.0;
  double timestamp_s = 0.0;
};

enum class EventKind { None, Paving, Incident };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::None: return "none";
    case EventKind::Paving: return "paving";
    case EventKind::Incident: return "incident";
  }
  return "?";
}

struct EventDescriptor {
  EventKind kind = EventKind::None;
  int lane = -1;
  double position_mi = 0.0;
  double window_start_s = 0.0;
  double window_end_s = 0.0;

  bool active_at(double t) const {
    return kind != EventKind::None && t >= window_start_s && t < window_end_s;
  }
  friend bool operator==(const EventDescriptor&, const EventDescriptor&) = default;
};

}  // namespace atmsim
