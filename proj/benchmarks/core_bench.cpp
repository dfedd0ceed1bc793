#include <benchmark/benchmark.h>

#include <limits>
#include <vector>

#include "atmsim/controller.hpp"
#include "atmsim/replication.hpp"
#include "atmsim/stats.hpp"
#include "atmsim/world.hpp"

using namespace atmsim;

namespace {

World congested_world() {
  WorldConfig cfg;
  World w(cfg, Rng::substream(1, 0, 1), Rng::substream(1, 0, 2));
  EventDescriptor incident;
  incident.kind = EventKind::Incident;
  incident.lane = 2;
  incident.position_mi = 1.25;
  incident.window_start_s = 0.0;
  incident.window_end_s = std::numeric_limits<double>::infinity();
  w.apply_incident(incident);
  for (int i = 0; i < 600; ++i) w.step();  // fill the segment first
  return w;
}

void BM_WorldStep(benchmark::State& state) {
  World w = congested_world();
  for (auto _ : state) {
    w.step();
  }
  state.counters["vehicles"] = static_cast<double>(w.vehicles_present());
}
BENCHMARK(BM_WorldStep);

void BM_ChannelUpdate(benchmark::State& state) {
  RoadGeometry geo;
  ControlChannel channel(geo, ChannelParams{}, DecisionSource::ATMChannel);
  std::vector<DetectorSample> samples;
  for (int st = 0; st < geo.gantry_count(); ++st) {
    for (int l = 0; l < geo.lane_count; ++l) {
      DetectorSample s;
      s.station = st;
      s.lane = l;
      s.u_mph = 62.0;
      s.q = 9;
      samples.push_back(s);
    }
  }
  double t = 0.0;
  for (auto _ : state) {
    for (auto& s : samples) s.interval += 1;
    benchmark::DoNotOptimize(channel.update(samples, t += 10.0));
  }
}
BENCHMARK(BM_ChannelUpdate);

void BM_PolicyLookup(benchmark::State& state) {
  const PolicyTable table = PolicyTable::default_table();
  DecisionInput in;
  in.prevailing_speed_mph = 15.0;
  in.event = EventKind::Incident;
  in.distance_to_event_mi = 0.15;
  in.event_lane = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.lookup(in, 3));
  }
}
BENCHMARK(BM_PolicyLookup);

void BM_PairedTTest(benchmark::State& state) {
  std::vector<double> a(55), b(55);
  Rng rng(3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 50.0 + rng.uniform(-5.0, 5.0);
    b[i] = 48.0 + rng.uniform(-5.0, 5.0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(paired_t_test(a, b));
  }
}
BENCHMARK(BM_PairedTTest);

void BM_Replication(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.run_s = 200.0;
  int rep = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_replication(cfg, CaseId::Case2, rep++ % 8));
  }
}
BENCHMARK(BM_Replication)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
