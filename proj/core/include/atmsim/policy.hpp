#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atmsim/types.hpp"

namespace atmsim {

enum class GantryRole { Nearest, Upstream };

inline const char* to_string(GantryRole r) {
  return r == GantryRole::Nearest ? "nearest" : "upstream";
}

/// Decision-tree input: prevailing speed at the gantry, the event, its
/// distance downstream of the gantry and the lane it occupies.
struct DecisionInput {
  double prevailing_speed_mph = 70.0;
  EventKind event = EventKind::None;
  double distance_to_event_mi = 0.0;
  int event_lane = -1;
  GantryRole role = GantryRole::Nearest;
};

/// Ordered first-match-wins rule list mapping (speed bin, event kind,
/// distance bin, gantry role) to a lane-state tuple placed relative to the
/// event lane. A trailing catch-all keeps the table total.
class PolicyTable {
 public:
  struct Action {
    LaneState event_lane = LaneState::Open;
    std::optional<LaneState> adjacent;  // lane next to the event lane
    LaneState others = LaneState::Open;
  };
  struct Rule {
    std::optional<bool> speed_below;          // matches speed < / >= threshold
    std::optional<EventKind> event;           // exact kind
    bool any_event = false;                   // matches Paving or Incident
    std::optional<bool> distance_below;       // matches distance < / >= threshold
    std::optional<GantryRole> role;
    Action action;
  };

  static PolicyTable default_table();
  static PolicyTable from_json(const nlohmann::json& j);
  static PolicyTable load(const std::string& path);
  nlohmann::ordered_json to_json() const;

  /// Total lookup; throws std::logic_error only if the rule list violates
  /// the totality invariant (no rule matched).
  std::vector<LaneState> lookup(const DecisionInput& input, int lane_count) const;

  /// Exhaustive enumeration of the finite input space; throws on any gap.
  void verify_total(int lane_count) const;

  double speed_threshold_mph() const { return speed_threshold_mph_; }
  double distance_threshold_mi() const { return distance_threshold_mi_; }
  const std::vector<Rule>& rules() const { return rules_; }

 private:
  double speed_threshold_mph_ = 20.0;
  double distance_threshold_mi_ = 0.2;
  std::vector<Rule> rules_;
};

}  // namespace atmsim
