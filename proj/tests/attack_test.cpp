#include <doctest.h>

#include <array>
#include <map>
#include <vector>

#include "atmsim/attack.hpp"

using namespace atmsim;

namespace {

GantryDecision open_decision() {
  return {0, {LaneState::Open, LaneState::Open, LaneState::Open}, 100.0,
          DecisionSource::ATMChannel};
}

}  // namespace

TEST_CASE("zero rate schedules nothing") {
  AttackConfig cfg;
  cfg.rate_per_run = 0.0;
  Rng rng(1);
  CHECK(schedule_attacks(cfg, 120.0, 720.0, rng).empty());

  cfg.rate_per_run = 3.0;
  cfg.points.clear();
  CHECK(schedule_attacks(cfg, 120.0, 720.0, rng).empty());
}

TEST_CASE("degenerate duration range yields exactly that duration") {
  AttackConfig cfg;
  cfg.duration_min_s = 30.0;
  cfg.duration_max_s = 30.0;
  cfg.rate_per_run = 8.0;
  Rng rng(2);
  const auto specs = schedule_attacks(cfg, 0.0, 100000.0, rng);
  REQUIRE_FALSE(specs.empty());
  for (const AttackSpec& s : specs) CHECK(s.duration_s == doctest::Approx(30.0));
}

TEST_CASE("windows stay inside the run and never overlap within a point") {
  AttackConfig cfg;
  cfg.rate_per_run = 40.0;  // dense, to exercise the merge path
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto specs = schedule_attacks(cfg, 120.0, 720.0, rng);
    std::map<AttackPoint, double> last_end;
    for (const AttackSpec& s : specs) {
      CHECK(s.start_s >= 120.0);
      CHECK(s.end_s() <= 720.0 + 1e-9);
      CHECK(s.duration_s > 0.0);
      auto it = last_end.find(s.point);
      if (it != last_end.end()) CHECK(s.start_s > it->second);
      last_end[s.point] = s.end_s();
    }
  }
}

TEST_CASE("attack count follows the configured rate") {
  AttackConfig cfg;
  cfg.rate_per_run = 3.0;
  // long window and short durations keep overlap merging out of the count
  cfg.duration_min_s = 30.0;
  cfg.duration_max_s = 40.0;
  double total = 0.0;
  const int kSeeds = 200;
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(9000 + seed);
    total += static_cast<double>(schedule_attacks(cfg, 0.0, 360000.0, rng).size());
  }
  const double mean = total / kSeeds;
  CHECK(mean > 2.5);
  CHECK(mean < 3.5);
}

TEST_CASE("point A scrambles states from the injected draw") {
  const auto decision = open_decision();
  std::array<int, 3> script = {2, 0, 1};
  std::size_t i = 0;
  const auto scrambled = apply_point_a(decision, [&] { return script[i++]; });
  CHECK(scrambled.states ==
        std::vector<LaneState>{LaneState::Closed, LaneState::Open, LaneState::Merge});
  // everything but the states is carried through
  CHECK(scrambled.gantry == decision.gantry);
  CHECK(scrambled.timestamp_s == decision.timestamp_s);
  CHECK(scrambled.source == decision.source);
}

TEST_CASE("point C scrambles the displayed states the same way") {
  const auto decision = open_decision();
  const auto scrambled = apply_point_c(decision, [] { return 1; });
  CHECK(scrambled.states == std::vector<LaneState>(3, LaneState::Merge));
}

TEST_CASE("state scrambling covers all three states") {
  Rng rng(5);
  std::array<int, 3> seen = {0, 0, 0};
  for (int k = 0; k < 300; ++k) {
    const auto d = apply_point_a(open_decision(), rng);
    for (LaneState s : d.states) seen[static_cast<int>(s)] += 1;
  }
  for (int count : seen) CHECK(count > 200);  // each near 900/3
}

TEST_CASE("point B randomizes measurements but not their identity fields") {
  std::vector<DetectorSample> samples;
  for (int st = 0; st < 2; ++st) {
    for (int l = 0; l < 3; ++l) {
      DetectorSample s;
      s.station = st;
      s.lane = l;
      s.interval = 7;
      s.u_mph = 61.0;
      s.q = 9;
      samples.push_back(s);
    }
  }
  Rng rng(6);
  const int q_max = 7;
  const auto corrupted = apply_point_b(samples, rng, q_max);
  REQUIRE(corrupted.size() == samples.size());
  for (std::size_t i = 0; i < corrupted.size(); ++i) {
    CHECK(corrupted[i].station == samples[i].station);
    CHECK(corrupted[i].lane == samples[i].lane);
    CHECK(corrupted[i].interval == samples[i].interval);
    REQUIRE(corrupted[i].u_mph.has_value());
    CHECK(*corrupted[i].u_mph >= 0.0);
    CHECK(*corrupted[i].u_mph <= 70.0);
    CHECK(corrupted[i].q >= 0);
    CHECK(corrupted[i].q <= q_max);
  }
}

TEST_CASE("point B q ceiling is one saturated interval per lane") {
  AttackConfig cfg;  // 2200 vphpl default
  CHECK(point_b_q_max(cfg, 10.0) == 7);
  CHECK(point_b_q_max(cfg, 30.0) == 19);
}

TEST_CASE("attack engine answers activity queries by point and time") {
  AttackEngine engine({{AttackPoint::A, 200.0, 50.0}, {AttackPoint::B, 400.0, 30.0}});
  CHECK_FALSE(engine.active(AttackPoint::A, 199.9));
  CHECK(engine.active(AttackPoint::A, 200.0));
  CHECK(engine.active(AttackPoint::A, 249.9));
  CHECK_FALSE(engine.active(AttackPoint::A, 250.0));  // half-open window
  CHECK_FALSE(engine.active(AttackPoint::B, 220.0));
  CHECK(engine.active(AttackPoint::B, 410.0));
  CHECK_FALSE(engine.active(AttackPoint::C, 410.0));
}
