#include "atmsim/policy.hpp"

#include <fstream>
#include <stdexcept>

namespace atmsim {

namespace {

LaneState lane_state_from_string(const std::string& s) {
  if (s == "open") return LaneState::Open;
  if (s == "merge") return LaneState::Merge;
  if (s == "closed") return LaneState::Closed;
  throw std::invalid_argument("policy: unknown lane state '" + s + "'");
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "none") return EventKind::None;
  if (s == "paving") return EventKind::Paving;
  if (s == "incident") return EventKind::Incident;
  throw std::invalid_argument("policy: unknown event kind '" + s + "'");
}

}  // namespace

PolicyTable PolicyTable::default_table() {
  // Close the event lane at the nearest gantry, merge it out at upstream
  // gantries; under 20 mph the closure starts one gantry earlier and the
  // adjacent lane merges next to the event.
  PolicyTable t;
  auto rule = [](std::optional<bool> speed_below, std::optional<EventKind> event, bool any_event,
                 std::optional<bool> dist_below, std::optional<GantryRole> role,
                 Action a) {
    Rule r;
    r.speed_below = speed_below;
    r.event = event;
    r.any_event = any_event;
    r.distance_below = dist_below;
    r.role = role;
    r.action = a;
    return r;
  };
  const Action all_open{};
  t.rules_.push_back(rule({}, EventKind::None, false, {}, {}, all_open));
  t.rules_.push_back(rule(true, {}, true, true, {},
                          Action{LaneState::Closed, LaneState::Merge, LaneState::Open}));
  t.rules_.push_back(rule(true, {}, true, false, GantryRole::Nearest,
                          Action{LaneState::Closed, {}, LaneState::Open}));
  t.rules_.push_back(rule(true, {}, true, false, GantryRole::Upstream,
                          Action{LaneState::Merge, {}, LaneState::Open}));
  t.rules_.push_back(rule(false, {}, true, true, {},
                          Action{LaneState::Closed, {}, LaneState::Open}));
  t.rules_.push_back(rule(false, {}, true, false, {},
                          Action{LaneState::Merge, {}, LaneState::Open}));
  t.rules_.push_back(rule({}, {}, false, {}, {}, all_open));  // catch-all
  return t;
}

PolicyTable PolicyTable::from_json(const nlohmann::json& j) {
  PolicyTable t;
  t.rules_.clear();
  if (j.contains("speed_threshold_mph")) t.speed_threshold_mph_ = j.at("speed_threshold_mph");
  if (j.contains("distance_threshold_mi")) t.distance_threshold_mi_ = j.at("distance_threshold_mi");
  for (const auto& rj : j.at("rules")) {
    Rule r;
    if (rj.contains("speed")) {
      const std::string s = rj.at("speed");
      if (s == "lt") r.speed_below = true;
      else if (s == "ge") r.speed_below = false;
      else throw std::invalid_argument("policy: speed matcher must be 'lt' or 'ge'");
    }
    if (rj.contains("event")) {
      const std::string e = rj.at("event");
      if (e == "any_event") r.any_event = true;
      else r.event = event_kind_from_string(e);
    }
    if (rj.contains("distance")) {
      const std::string d = rj.at("distance");
      if (d == "lt") r.distance_below = true;
      else if (d == "ge") r.distance_below = false;
      else throw std::invalid_argument("policy: distance matcher must be 'lt' or 'ge'");
    }
    if (rj.contains("role")) {
      const std::string ro = rj.at("role");
      if (ro == "nearest") r.role = GantryRole::Nearest;
      else if (ro == "upstream") r.role = GantryRole::Upstream;
      else throw std::invalid_argument("policy: role matcher must be 'nearest' or 'upstream'");
    }
    const auto& st = rj.at("states");
    if (st.contains("all")) {
      const LaneState all = lane_state_from_string(st.at("all"));
      r.action = Action{all, all, all};
    } else {
      r.action.event_lane = lane_state_from_string(st.at("event_lane"));
      if (st.contains("adjacent"))
        r.action.adjacent = lane_state_from_string(st.at("adjacent"));
      r.action.others =
          st.contains("others") ? lane_state_from_string(st.at("others")) : LaneState::Open;
    }
    t.rules_.push_back(r);
  }
  return t;
}

PolicyTable PolicyTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error("cannot open policy table: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return from_json(j);
}

nlohmann::ordered_json PolicyTable::to_json() const {
  nlohmann::ordered_json j;
  j["speed_threshold_mph"] = speed_threshold_mph_;
  j["distance_threshold_mi"] = distance_threshold_mi_;
  j["rules"] = nlohmann::ordered_json::array();
  for (const Rule& r : rules_) {
    nlohmann::ordered_json rj;
    if (r.speed_below) rj["speed"] = *r.speed_below ? "lt" : "ge";
    if (r.any_event) rj["event"] = "any_event";
    else if (r.event) rj["event"] = to_string(*r.event);
    if (r.distance_below) rj["distance"] = *r.distance_below ? "lt" : "ge";
    if (r.role) rj["role"] = to_string(*r.role);
    nlohmann::ordered_json st;
    st["event_lane"] = to_string(r.action.event_lane);
    if (r.action.adjacent) st["adjacent"] = to_string(*r.action.adjacent);
    st["others"] = to_string(r.action.others);
    rj["states"] = st;
    j["rules"].push_back(rj);
  }
  return j;
}

std::vector<LaneState> PolicyTable::lookup(const DecisionInput& input, int lane_count) const {
  const bool speed_below = input.prevailing_speed_mph < speed_threshold_mph_;
  const bool dist_below = input.distance_to_event_mi < distance_threshold_mi_;
  for (const Rule& r : rules_) {
    if (r.speed_below && *r.speed_below != speed_below) continue;
    if (r.any_event) {
      if (input.event == EventKind::None) continue;
    } else if (r.event && *r.event != input.event) {
      continue;
    }
    if (r.distance_below && *r.distance_below != dist_below) continue;
    if (r.role && *r.role != input.role) continue;

    std::vector<LaneState> states(lane_count, r.action.others);
    if (input.event != EventKind::None && input.event_lane >= 0 && input.event_lane < lane_count) {
      states[input.event_lane] = r.action.event_lane;
      if (r.action.adjacent) {
        const int adj = input.event_lane + 1 < lane_count ? input.event_lane + 1
                                                          : input.event_lane - 1;
        if (adj >= 0) states[adj] = *r.action.adjacent;
      }
    }
    return states;
  }
  throw std::logic_error("policy table is not total: no rule matched");
}

void PolicyTable::verify_total(int lane_count) const {
  const double speeds[] = {speed_threshold_mph_ - 5.0, speed_threshold_mph_ + 5.0};
  const double dists[] = {distance_threshold_mi_ * 0.5, distance_threshold_mi_ * 2.0};
  for (double speed : speeds) {
    for (EventKind kind : {EventKind::None, EventKind::Paving, EventKind::Incident}) {
      for (double dist : dists) {
        for (int lane = 0; lane < lane_count; ++lane) {
          for (GantryRole role : {GantryRole::Nearest, GantryRole::Upstream}) {
            DecisionInput in;
            in.prevailing_speed_mph = speed;
            in.event = kind;
            in.distance_to_event_mi = dist;
            in.event_lane = kind == EventKind::None ? -1 : lane;
            in.role = role;
            (void)lookup(in, lane_count);  // throws on a gap
          }
        }
      }
    }
  }
}

}  // namespace atmsim
