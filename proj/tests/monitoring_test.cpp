#include <doctest.h>

#include <vector>

#include "atmsim/monitoring.hpp"
#include "atmsim/world.hpp"

using namespace atmsim;

namespace {

GantryDecision decision(std::vector<LaneState> states, int gantry = 0, double t = 100.0,
                        DecisionSource src = DecisionSource::ATMChannel) {
  return {gantry, std::move(states), t, src};
}

}  // namespace

TEST_CASE("matching decisions produce a Match with no differing lanes") {
  const auto atm = decision({LaneState::Open, LaneState::Closed, LaneState::Open});
  const auto mon = decision({LaneState::Open, LaneState::Closed, LaneState::Open}, 0, 100.0,
                            DecisionSource::MonitoringChannel);
  const MatchOutcome out = match_states(atm, mon);
  CHECK(out.verdict == MatchVerdict::Match);
  CHECK(out.differing_lanes.empty());
}

TEST_CASE("a single-lane deviation is a Mismatch naming the lane") {
  const auto atm = decision({LaneState::Open, LaneState::Closed, LaneState::Open});
  const auto mon = decision({LaneState::Open, LaneState::Open, LaneState::Open}, 0, 100.0,
                            DecisionSource::MonitoringChannel);
  const MatchOutcome out = match_states(atm, mon);
  CHECK(out.verdict == MatchVerdict::Mismatch);
  CHECK(out.differing_lanes == std::vector<int>{1});
}

TEST_CASE("all lanes can differ at once") {
  const auto atm = decision({LaneState::Open, LaneState::Open, LaneState::Open});
  const auto mon = decision({LaneState::Closed, LaneState::Merge, LaneState::Closed}, 0, 100.0,
                            DecisionSource::MonitoringChannel);
  CHECK(match_states(atm, mon).differing_lanes.size() == 3);
}

TEST_CASE("matching different gantries or timestamps is a caller bug") {
  const auto atm = decision({LaneState::Open}, 0, 100.0);
  CHECK_THROWS_AS(match_states(atm, decision({LaneState::Open}, 1, 100.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(match_states(atm, decision({LaneState::Open}, 0, 110.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(match_states(atm, decision({LaneState::Open, LaneState::Open}, 0, 100.0)),
                  std::invalid_argument);
}

TEST_CASE("resolve keeps the ATM decision on a match") {
  const auto atm = decision({LaneState::Open, LaneState::Merge, LaneState::Open});
  const auto mon = decision({LaneState::Open, LaneState::Merge, LaneState::Open}, 0, 100.0,
                            DecisionSource::MonitoringChannel);
  const ResolveResult r = resolve(match_states(atm, mon), atm, mon);
  CHECK(r.final_decision == atm);
  CHECK_FALSE(r.alert.has_value());
}

TEST_CASE("resolve overrides with the monitoring decision and alerts on a mismatch") {
  const auto atm = decision({LaneState::Closed, LaneState::Closed, LaneState::Closed});
  const auto mon = decision({LaneState::Open, LaneState::Open, LaneState::Open}, 0, 100.0,
                            DecisionSource::MonitoringChannel);
  const ResolveResult r = resolve(match_states(atm, mon), atm, mon);
  // the override may relax as well as restrict
  CHECK(r.final_decision.states == mon.states);
  CHECK(r.final_decision.source == DecisionSource::MonitoringChannel);
  REQUIRE(r.alert.has_value());
  CHECK(r.alert->gantry == 0);
  CHECK(r.alert->timestamp_s == 100.0);
  CHECK(r.alert->outcome.verdict == MatchVerdict::Mismatch);
}

TEST_CASE("cv aggregation reproduces the detector samples under full penetration") {
  WorldConfig cfg;
  World world(cfg, Rng::substream(31, 0, 1), Rng::substream(31, 0, 2));
  EventDescriptor incident;
  incident.kind = EventKind::Incident;
  incident.lane = 2;
  incident.position_mi = 1.25;
  incident.window_start_s = 60.0;
  incident.window_end_s = 1e18;
  world.apply_incident(incident);

  CvAggregator agg(cfg.geometry);
  for (int interval = 1; interval <= 24; ++interval) {
    for (int s = 0; s < 20; ++s) {  // 10 s of 0.5 s steps
      world.step();
      const auto reports = world.collect_cv_reports();
      agg.observe(reports);
    }
    const auto detector = world.take_interval_samples(interval);
    const auto cv = agg.take_interval(interval);
    REQUIRE(cv.size() == detector.size());
    for (std::size_t i = 0; i < cv.size(); ++i) {
      CAPTURE(interval);
      CAPTURE(i);
      CHECK(cv[i] == detector[i]);
    }
  }
}

TEST_CASE("a stopped connected vehicle on the station reports u=0, q=0") {
  RoadGeometry geo;
  const double dp = geo.detector_position_m(0);
  std::vector<std::vector<CVReport>> steps;
  // approach, then sit on the detector for the rest of the interval
  steps.push_back({{1, 0, dp - 30.0, 10.0, 0.5}});
  for (int k = 0; k < 5; ++k) steps.push_back({{1, 0, dp - 1.0, 0.0, 1.0 + k * 0.5}});

  const auto samples = cv_aggregate(steps, geo, 1);
  REQUIRE(samples.size() == static_cast<std::size_t>(geo.gantry_count() * geo.lane_count));
  const DetectorSample& s = samples[0];  // station 0, lane 0
  REQUIRE(s.u_mph.has_value());
  CHECK(*s.u_mph == 0.0);
  CHECK(s.q == 0);
}

TEST_CASE("no reports in the zone yields an empty sample") {
  RoadGeometry geo;
  const auto samples = cv_aggregate({}, geo, 1);
  for (const DetectorSample& s : samples) CHECK(s.empty());
}

TEST_CASE("both channels converge after an incident when fed equivalent data") {
  WorldConfig cfg;
  World world(cfg, Rng::substream(77, 0, 1), Rng::substream(77, 0, 2));
  EventDescriptor incident;
  incident.kind = EventKind::Incident;
  incident.lane = 2;
  incident.position_mi = 1.25;
  incident.window_start_s = 30.0;
  incident.window_end_s = 1e18;
  world.apply_incident(incident);

  ChannelParams params;
  ControlChannel atm(cfg.geometry, params, DecisionSource::ATMChannel);
  MonitorChannel monitor(cfg.geometry, params);

  for (int interval = 1; interval <= 36; ++interval) {
    for (int s = 0; s < 20; ++s) {
      world.step();
      monitor.observe(world.collect_cv_reports());
    }
    const double t = world.clock_s();
    const auto atm_dec = atm.update(world.take_interval_samples(interval), t);
    const auto mon_dec = monitor.update(monitor.take_interval(interval), t);
    REQUIRE(atm_dec.size() == mon_dec.size());
    for (std::size_t g = 0; g < atm_dec.size(); ++g) {
      const MatchOutcome out = match_states(atm_dec[g], mon_dec[g]);
      CHECK(out.verdict == MatchVerdict::Match);
      CHECK(mon_dec[g].source == DecisionSource::MonitoringChannel);
    }
    world.apply_lane_states(atm_dec);
  }
}
