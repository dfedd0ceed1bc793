#include <doctest.h>

#include <optional>
#include <vector>

#include "atmsim/controller.hpp"

using namespace atmsim;

namespace {

DetectorSample sample(int lane, std::optional<double> u, int q, int station = 0,
                      int interval = 1) {
  DetectorSample s;
  s.station = station;
  s.lane = lane;
  s.interval = interval;
  s.u_mph = u;
  s.q = q;
  return s;
}

std::vector<DetectorSample> three_lanes(std::optional<double> u0, int q0,
                                        std::optional<double> u1, int q1,
                                        std::optional<double> u2, int q2) {
  return {sample(0, u0, q0), sample(1, u1, q1), sample(2, u2, q2)};
}

const IncidentDetectorParams kParams{0.6, 0.1, 2};

}  // namespace

TEST_CASE("steady traffic raises no trigger") {
  const auto prev = three_lanes(65.0, 10, 64.0, 9, 66.0, 11);
  const auto cur = three_lanes(65.0, 10, 65.0, 10, 65.0, 10);
  const auto flags = evaluate_triggers(cur, prev, kParams);
  CHECK(flags == std::vector<bool>{false, false, false});
}

TEST_CASE("zero speed with a stopped vehicle trips immediately, even without history") {
  const auto cur = three_lanes(0.0, 0, 65.0, 10, 65.0, 10);
  const auto flags = evaluate_triggers(cur, {}, kParams);
  CHECK(flags[0]);
  CHECK_FALSE(flags[1]);
  CHECK_FALSE(flags[2]);
}

TEST_CASE("volume dropping to zero after a nonzero interval trips") {
  const auto prev = three_lanes(60.0, 8, 60.0, 8, 60.0, 8);
  auto cur = three_lanes(std::nullopt, 0, 60.0, 8, 60.0, 8);
  const auto flags = evaluate_triggers(cur, prev, kParams);
  CHECK(flags[0]);
  CHECK_FALSE(flags[1]);
}

TEST_CASE("comparative speed drop requires the other lanes to hold up") {
  const auto prev = three_lanes(60.0, 8, 60.0, 8, 60.0, 8);
  // lane 0 collapses to 20 < 0.6*60 while the others stay near 60
  auto cur = three_lanes(20.0, 6, 59.0, 8, 58.0, 8);
  CHECK(evaluate_triggers(cur, prev, kParams) == std::vector<bool>{true, false, false});

  // every lane drops together: congestion, not an incident
  cur = three_lanes(20.0, 6, 30.0, 7, 28.0, 7);
  CHECK(evaluate_triggers(cur, prev, kParams) == std::vector<bool>{false, false, false});

  // the guard needs usable data in the other lanes
  cur = three_lanes(20.0, 6, std::nullopt, 0, 59.0, 8);
  CHECK(evaluate_triggers(cur, prev, kParams)[0] == false);
}

TEST_CASE("the comparative threshold is strict") {
  const auto prev = three_lanes(60.0, 8, 60.0, 8, 60.0, 8);
  // exactly c1 * previous does not trip (condition is <, not <=)
  const auto cur = three_lanes(36.0, 7, 60.0, 8, 60.0, 8);
  CHECK_FALSE(evaluate_triggers(cur, prev, kParams)[0]);
}

TEST_CASE("mismatched lane sets are rejected") {
  const auto prev = three_lanes(60.0, 8, 60.0, 8, 60.0, 8);
  std::vector<DetectorSample> cur = {sample(0, 60.0, 8), sample(1, 60.0, 8)};
  CHECK_THROWS_AS(evaluate_triggers(cur, prev, kParams), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_triggers({}, {}, kParams), std::invalid_argument);
}

TEST_CASE("debounce confirms only after consecutive flagged intervals") {
  std::vector<int> counters(3, 0);
  const auto quiet = three_lanes(60.0, 8, 60.0, 8, 60.0, 8);
  const auto tripped = three_lanes(0.0, 0, 60.0, 8, 60.0, 8);

  auto confirmed = detect_incident(tripped, quiet, kParams, counters);
  CHECK_FALSE(confirmed[0]);  // first hit, below debounce=2
  confirmed = detect_incident(tripped, tripped, kParams, counters);
  CHECK(confirmed[0]);  // second consecutive hit confirms

  // a quiet interval resets the count
  confirmed = detect_incident(quiet, tripped, kParams, counters);
  CHECK_FALSE(confirmed[0]);
  confirmed = detect_incident(tripped, quiet, kParams, counters);
  CHECK_FALSE(confirmed[0]);
}

TEST_CASE("locate_event places the incident in the section downstream of the station") {
  RoadGeometry geo;

  // detection at the downstream station, lane 2: midpoint of (1.0, 1.5)
  auto e = locate_event({{false, false, false}, {false, false, true}}, geo, {}, 100.0);
  CHECK(e.kind == EventKind::Incident);
  CHECK(e.lane == 2);
  CHECK(e.position_mi == doctest::Approx(1.25));

  // upstream station only: midpoint of (0.5, 1.0)
  e = locate_event({{true, false, false}, {false, false, false}}, geo, {}, 100.0);
  CHECK(e.position_mi == doctest::Approx(0.75));

  // both stations flagged: the downstream-most one wins
  e = locate_event({{true, false, false}, {false, true, false}}, geo, {}, 100.0);
  CHECK(e.position_mi == doctest::Approx(1.25));
  CHECK(e.lane == 1);

  // nothing detected, nothing scheduled
  e = locate_event({{false, false, false}, {false, false, false}}, geo, {}, 100.0);
  CHECK(e.kind == EventKind::None);
}

TEST_CASE("scheduled paving passes through when nothing is detected") {
  RoadGeometry geo;
  EventDescriptor paving;
  paving.kind = EventKind::Paving;
  paving.lane = 1;
  paving.position_mi = 1.1;
  paving.window_start_s = 0.0;
  paving.window_end_s = 600.0;

  const std::vector<EventDescriptor> scheduled = {paving};
  auto e = locate_event({{false, false, false}, {false, false, false}}, geo, scheduled, 100.0);
  CHECK(e == paving);
  // outside its window the paving event disappears
  e = locate_event({{false, false, false}, {false, false, false}}, geo, scheduled, 700.0);
  CHECK(e.kind == EventKind::None);
}

TEST_CASE("decision tree: default table lookups") {
  const PolicyTable table = PolicyTable::default_table();

  DecisionInput in;
  in.prevailing_speed_mph = 25.0;
  in.event = EventKind::Incident;
  in.distance_to_event_mi = 0.15;
  in.event_lane = 2;
  auto d = decide_lane_states(in, table, 1, 3, 100.0, DecisionSource::ATMChannel);
  CHECK(d.states == std::vector<LaneState>{LaneState::Open, LaneState::Open, LaneState::Closed});
  CHECK(d.gantry == 1);
  CHECK(d.source == DecisionSource::ATMChannel);

  // same event seen from farther upstream: merge instead of close
  in.distance_to_event_mi = 0.65;
  d = decide_lane_states(in, table, 0, 3, 100.0, DecisionSource::ATMChannel);
  CHECK(d.states == std::vector<LaneState>{LaneState::Open, LaneState::Open, LaneState::Merge});

  // slow traffic close to an event on lane 0: close it and merge the neighbor
  in.prevailing_speed_mph = 15.0;
  in.distance_to_event_mi = 0.15;
  in.event_lane = 0;
  d = decide_lane_states(in, table, 1, 3, 100.0, DecisionSource::ATMChannel);
  CHECK(d.states == std::vector<LaneState>{LaneState::Closed, LaneState::Merge, LaneState::Open});

  // slow and far: the nearest gantry closes, upstream gantries merge
  in.distance_to_event_mi = 0.4;
  in.role = GantryRole::Nearest;
  d = decide_lane_states(in, table, 1, 3, 100.0, DecisionSource::ATMChannel);
  CHECK(d.states[0] == LaneState::Closed);
  in.role = GantryRole::Upstream;
  d = decide_lane_states(in, table, 0, 3, 100.0, DecisionSource::ATMChannel);
  CHECK(d.states[0] == LaneState::Merge);

  // no event: everything open
  d = decide_lane_states(DecisionInput{}, table, 0, 3, 100.0, DecisionSource::ATMChannel);
  CHECK(d.states == std::vector<LaneState>(3, LaneState::Open));
}

TEST_CASE("control channel confirms a collapse within debounce+1 intervals") {
  RoadGeometry geo;
  ChannelParams params;
  params.hold_intervals = 2;
  ControlChannel channel(geo, params, DecisionSource::ATMChannel);

  auto steady = [](int interval) {
    std::vector<DetectorSample> out;
    for (int st = 0; st < 2; ++st)
      for (int l = 0; l < 3; ++l) out.push_back(sample(l, 62.0, 9, st, interval));
    return out;
  };
  auto collapsed = [&](int interval) {
    auto out = steady(interval);
    out[1 * 3 + 2].u_mph = 0.0;  // station 1, lane 2 stopped
    out[1 * 3 + 2].q = 0;
    return out;
  };

  std::vector<GantryDecision> dec;
  int interval = 0;
  for (; interval < 3; ++interval) {
    dec = channel.update(steady(interval), interval * 10.0);
    for (const auto& d : dec) CHECK(d.states == std::vector<LaneState>(3, LaneState::Open));
  }

  const int collapse_start = interval;
  int reacted_at = -1;
  for (; interval < collapse_start + 4; ++interval) {
    dec = channel.update(collapsed(interval), interval * 10.0);
    if (dec[1].states != std::vector<LaneState>(3, LaneState::Open)) {
      reacted_at = interval;
      break;
    }
  }
  REQUIRE(reacted_at >= 0);
  CHECK(reacted_at - collapse_start + 1 <= kParams.debounce + 1);
  CHECK(channel.current_event().kind == EventKind::Incident);
  CHECK(channel.current_event().lane == 2);
  CHECK(dec[1].states[2] != LaneState::Open);

  // the hold latch keeps the event alive through quiet intervals, then clears
  ++interval;
  dec = channel.update(steady(interval), interval * 10.0);
  CHECK(channel.current_event().kind == EventKind::Incident);
  ++interval;
  dec = channel.update(steady(interval), interval * 10.0);
  ++interval;
  dec = channel.update(steady(interval), interval * 10.0);
  CHECK(channel.current_event().kind == EventKind::None);
  for (const auto& d : dec) CHECK(d.states == std::vector<LaneState>(3, LaneState::Open));
}

TEST_CASE("control channel rejects a wrong sample count") {
  RoadGeometry geo;
  ControlChannel channel(geo, ChannelParams{}, DecisionSource::ATMChannel);
  std::vector<DetectorSample> too_few = {sample(0, 60.0, 5)};
  CHECK_THROWS_AS(channel.update(too_few, 10.0), std::invalid_argument);
}
