#include "verify.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "atmsim/controller.hpp"
#include "atmsim/replication.hpp"
#include "atmsim/stats.hpp"

namespace atmsim::tools {

namespace {

bool check_detection_enumeration(const ScenarioConfig& cfg) {
  const IncidentDetectorParams params{cfg.detector.c1, cfg.detector.c2, 1};
  const std::vector<std::optional<double>> u_values = {std::nullopt, 0.0, 30.0, 60.0};
  const std::vector<int> q_values = {0, 3};

  struct LaneTrace {
    std::optional<double> u_prev, u_cur;
    int q_prev, q_cur;
  };
  std::vector<LaneTrace> lane_traces;
  for (const auto& up : u_values)
    for (const auto& uc : u_values)
      for (int qp : q_values)
        for (int qc : q_values) {
          if (up && *up > 0.0 && qp == 0) continue;  // speed implies crossings
          if (uc && *uc > 0.0 && qc == 0) continue;
          if (up && *up == 0.0 && qp != 0) continue;  // stopped-vehicle case has q = 0
          if (uc && *uc == 0.0 && qc != 0) continue;
          lane_traces.push_back({up, uc, qp, qc});
        }

  auto make_sample = [](int lane, int interval, std::optional<double> u, int q) {
    DetectorSample s;
    s.station = 0;
    s.lane = lane;
    s.interval = interval;
    s.u_mph = u;
    s.q = q;
    return s;
  };

  // brute-force re-statement of the trigger conditions
  auto oracle = [&](const std::vector<LaneTrace>& tr, int i) {
    if (tr[i].u_cur && *tr[i].u_cur == 0.0) return true;
    if (tr[i].q_cur == 0 && tr[i].q_prev > 0) return true;
    if (!tr[i].u_cur || !tr[i].u_prev) return false;
    if (!(*tr[i].u_cur < params.c1 * *tr[i].u_prev)) return false;
    for (std::size_t j = 0; j < tr.size(); ++j) {
      if (static_cast<int>(j) == i) continue;
      if (!tr[j].u_cur || !tr[j].u_prev) return false;
      if (!(*tr[j].u_cur > (1.0 - params.c2) * *tr[j].u_prev)) return false;
    }
    return true;
  };

  long disagreements = 0;
  const std::size_t n = lane_traces.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        const std::vector<LaneTrace> tr = {lane_traces[a], lane_traces[b], lane_traces[c]};
        std::vector<DetectorSample> prev, cur;
        for (int l = 0; l < 3; ++l) {
          prev.push_back(make_sample(l, 1, tr[l].u_prev, tr[l].q_prev));
          cur.push_back(make_sample(l, 2, tr[l].u_cur, tr[l].q_cur));
        }
        std::vector<int> counters(3, 0);
        const auto flags = detect_incident(cur, prev, params, counters);
        for (int l = 0; l < 3; ++l) {
          if (flags[l] != oracle(tr, l)) ++disagreements;
        }
      }
    }
  }
  if (disagreements > 0) {
    std::printf("  %ld disagreements over %zu traces\n", disagreements, n * n * n);
    return false;
  }
  return true;
}

bool check_policy_totality(const ScenarioConfig& cfg) {
  PolicyTable table;
  try {
    table = cfg.policy_table_path.empty() ? PolicyTable::default_table()
                                          : PolicyTable::load(cfg.policy_table_path);
    table.verify_total(cfg.geometry.lane_count);
  } catch (const std::exception& e) {
    std::printf("  %s\n", e.what());
    return false;
  }
  DecisionInput in;
  in.prevailing_speed_mph = 25.0;
  in.event = EventKind::Incident;
  in.distance_to_event_mi = 0.15;
  in.event_lane = 1;
  const auto first = table.lookup(in, cfg.geometry.lane_count);
  for (int k = 0; k < 10; ++k) {
    if (table.lookup(in, cfg.geometry.lane_count) != first) return false;
  }
  return true;
}

bool check_ttest() {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> zero(5, 0.0);
  const TTestResult r = paired_t_test(a, zero);
  if (std::abs(r.t - 4.242640687119285) > 1e-3) return false;
  if (std::abs(r.p - 0.0132356) > 5e-4) return false;
  const TTestResult same = paired_t_test(a, a);
  return same.t == 0.0 && same.p == 1.0;
}

bool check_determinism(const ScenarioConfig& cfg) {
  ScenarioConfig quick = cfg;
  quick.run_s = 200.0;
  const auto tmp = std::filesystem::temp_directory_path() / "atmsim_verify";
  std::filesystem::create_directories(tmp);
  auto run_once = [&](const std::string& tag) {
    RunOptions opt;
    opt.log_path = (tmp / ("determinism_" + tag + ".jsonl")).string();
    return run_replication(quick, CaseId::Case2, 0, opt);
  };
  const ReplicationResult r1 = run_once("a");
  const ReplicationResult r2 = run_once("b");
  if (r1.mean_speed_mph != r2.mean_speed_mph || r1.alerts != r2.alerts ||
      r1.attacks != r2.attacks)
    return false;
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return slurp(r1.log_path) == slurp(r2.log_path);
}

}  // namespace

int run_verify(const ScenarioConfig& config) {
  struct Check {
    const char* name;
    bool (*fn)(const ScenarioConfig&);
  };
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::printf("%-32s %s\n", name, ok ? "PASS" : "FAIL");
    if (!ok) ++failures;
  };
  report("detection-inequality-oracle", check_detection_enumeration(config));
  report("policy-table-totality", check_policy_totality(config));
  report("paired-t-test-known-values", check_ttest());
  report("determinism-double-run", check_determinism(config));
  return failures;
}

}  // namespace atmsim::tools
