#include "atmsim/replication.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "atmsim/world.hpp"

namespace atmsim {

namespace {

constexpr std::uint64_t kDemandStream = 1;
constexpr std::uint64_t kDriverStream = 2;
constexpr std::uint64_t kAttackStream = 3;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t derive_seed(std::uint64_t master, int rep) {
  return mix64(mix64(master + 1) ^ mix64(static_cast<std::uint64_t>(rep) + 1));
}

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

OrderedJson states_json(const std::vector<LaneState>& states) {
  OrderedJson a = OrderedJson::array();
  for (LaneState s : states) a.push_back(to_string(s));
  return a;
}

WorldConfig make_world_config(const ScenarioConfig& c) {
  WorldConfig wc;
  wc.geometry = c.geometry;
  wc.idm.desired_speed_mps = mph_to_mps(c.driver.desired_speed_mph);
  wc.dt_s = c.dt_s;
  wc.demand_vph = c.demand_vph;
  wc.deterministic_headway = c.driver.deterministic_headway;
  wc.desired_speed_jitter_mph = c.driver.speed_jitter_mph;
  wc.cv_penetration = c.driver.cv_penetration;
  wc.compliance_rate = c.driver.compliance_rate;
  wc.closed_lane_grace_m = miles_to_m(c.closed_lane_grace_mi);
  return wc;
}

ChannelParams make_channel_params(const ScenarioConfig& c) {
  ChannelParams p;
  p.detector.c1 = c.detector.c1;
  p.detector.c2 = c.detector.c2;
  p.detector.debounce = c.detector.debounce;
  p.table = c.policy_table_path.empty() ? PolicyTable::default_table()
                                        : PolicyTable::load(c.policy_table_path);
  p.free_flow_speed_mph = c.driver.desired_speed_mph;
  p.hold_intervals = static_cast<int>(std::lround(c.detector.hold_s / c.collection_interval_s));
  return p;
}

}  // namespace

CaseFlags case_flags(CaseId id) {
  switch (id) {
    case CaseId::Baseline: return {false, false, false};
    case CaseId::Case1: return {true, false, false};
    case CaseId::Case2: return {true, true, false};
    case CaseId::Case3: return {true, true, true};
  }
  throw std::invalid_argument("unknown case id");
}

const char* to_string(CaseId id) {
  switch (id) {
    case CaseId::Baseline: return "baseline";
    case CaseId::Case1: return "case1";
    case CaseId::Case2: return "case2";
    case CaseId::Case3: return "case3";
  }
  return "?";
}

CaseId case_from_string(const std::string& name) {
  for (CaseId id : {CaseId::Baseline, CaseId::Case1, CaseId::Case2, CaseId::Case3}) {
    if (name == to_string(id)) return id;
  }
  throw std::invalid_argument("unknown case '" + name + "'");
}

ReplicationResult run_replication(const ScenarioConfig& config, CaseId case_id, int rep_index,
                                  const RunOptions& options) {
  return run_replication_flags(config, case_flags(case_id), case_id, rep_index, options);
}

ReplicationResult run_replication_flags(const ScenarioConfig& config, CaseFlags flags,
                                        CaseId label, int rep_index,
                                        const RunOptions& options) {
  config.validate();
  const double warmup = config.warmup_s;
  const double horizon = config.warmup_s + config.run_s;
  const int steps_per_interval =
      static_cast<int>(std::lround(config.collection_interval_s / config.dt_s));
  const int total_steps = static_cast<int>(std::lround(horizon / config.dt_s));

  Rng demand_rng = Rng::substream(config.master_seed, rep_index, kDemandStream);
  Rng driver_rng = Rng::substream(config.master_seed, rep_index, kDriverStream);
  Rng attack_rng = Rng::substream(config.master_seed, rep_index, kAttackStream);

  EventLog log = options.log_path.empty() ? EventLog{} : EventLog::to_file(options.log_path);
  World world(make_world_config(config), demand_rng, driver_rng, log);

  EventDescriptor incident;
  incident.kind = EventKind::Incident;
  incident.lane = config.incident.lane;
  incident.position_mi = config.incident.position_mi;
  incident.window_start_s = warmup + config.incident.start_after_warmup_s;
  incident.window_end_s = config.incident.duration_s < 0.0
                              ? kInf
                              : incident.window_start_s + config.incident.duration_s;
  world.apply_incident(incident);

  const ChannelParams channel_params = make_channel_params(config);
  ControlChannel atm_channel(config.geometry, channel_params, DecisionSource::ATMChannel);
  MonitorChannel monitor(config.geometry, channel_params);

  AttackEngine engine;
  if (flags.attacks) {
    engine = AttackEngine(schedule_attacks(config.attacks, warmup, horizon, attack_rng));
    if (log.enabled()) {
      for (const AttackSpec& s : engine.specs()) {
        log.write({{"type", "attack_scheduled"},
                   {"point", to_string(s.point)},
                   {"start", s.start_s},
                   {"end", s.end_s()}});
      }
    }
  }
  const int q_max = point_b_q_max(config.attacks, config.collection_interval_s);

  std::vector<GantryDecision> displayed_prev = world.active_states();
  std::vector<IntervalSpeedStat> trace;
  IntervalSpeedStat current_stat;
  long alerts = 0;
  int interval = 0;

  for (int step = 1; step <= total_steps; ++step) {
    world.step();
    const double t = world.clock_s();
    const bool measured = t > warmup + 1e-9;
    if (flags.monitoring && !options.monitoring_identity_mode) {
      auto reports = world.collect_cv_reports();
      monitor.observe(reports);
    }
    if (measured) world.speed_snapshot(current_stat.speed_sum_mph, current_stat.vehicle_steps);

    if (step % steps_per_interval != 0) continue;
    ++interval;
    auto samples = world.take_interval_samples(interval);
    if (log.enabled()) {
      for (const DetectorSample& s : samples) {
        OrderedJson rec = {{"type", "detector"}, {"t", t},       {"station", s.station},
                           {"lane", s.lane},     {"interval", s.interval}};
        if (s.u_mph) rec["u"] = *s.u_mph; else rec["u"] = nullptr;
        rec["q"] = s.q;
        log.write(rec);
      }
    }

    if (flags.atm) {
      auto atm_input = samples;
      if (flags.attacks && engine.active(AttackPoint::B, t)) {
        auto corrupted = apply_point_b(atm_input, attack_rng, q_max,
                                       config.driver.desired_speed_mph);
        if (log.enabled()) {
          OrderedJson before = OrderedJson::array(), after = OrderedJson::array();
          for (std::size_t i = 0; i < atm_input.size(); ++i) {
            before.push_back({{"u", atm_input[i].u_mph ? OrderedJson(*atm_input[i].u_mph)
                                                       : OrderedJson(nullptr)},
                              {"q", atm_input[i].q}});
            after.push_back({{"u", *corrupted[i].u_mph}, {"q", corrupted[i].q}});
          }
          log.write({{"type", "attack"}, {"point", "B"}, {"t", t},
                     {"before", before}, {"after", after}});
        }
        atm_input = corrupted;
      }

      auto atm_dec = atm_channel.update(atm_input, t);
      if (flags.attacks && engine.active(AttackPoint::A, t)) {
        for (auto& d : atm_dec) {
          const auto before = d.states;
          d = apply_point_a(d, attack_rng);
          if (log.enabled()) {
            log.write({{"type", "attack"}, {"point", "A"}, {"t", t}, {"gantry", d.gantry},
                       {"before", states_json(before)}, {"after", states_json(d.states)}});
          }
        }
      }

      std::vector<GantryDecision> displayed = atm_dec;
      std::vector<GantryDecision> mon_dec;
      std::vector<bool> mismatched(displayed.size(), false);
      if (flags.monitoring) {
        auto mon_samples =
            options.monitoring_identity_mode ? atm_input : monitor.take_interval(interval);
        mon_dec = monitor.update(mon_samples, t);
        for (std::size_t g = 0; g < displayed.size(); ++g) {
          const MatchOutcome outcome = match_states(atm_dec[g], mon_dec[g]);
          const ResolveResult rr = resolve(outcome, atm_dec[g], mon_dec[g]);
          displayed[g] = rr.final_decision;
          mismatched[g] = outcome.verdict == MatchVerdict::Mismatch;
          if (rr.alert) {
            ++alerts;
            if (log.enabled()) {
              OrderedJson lanes = OrderedJson::array();
              for (int l : outcome.differing_lanes) lanes.push_back(l);
              log.write({{"type", "alert"}, {"t", t}, {"gantry", static_cast<int>(g)},
                         {"differing_lanes", lanes},
                         {"atm", states_json(outcome.atm_states)},
                         {"mon", states_json(outcome.mon_states)}});
              log.write({{"type", "override"}, {"t", t}, {"gantry", static_cast<int>(g)},
                         {"displayed", states_json(displayed[g].states)}});
            }
          }
        }
      }

      if (flags.attacks && engine.active(AttackPoint::C, t)) {
        for (std::size_t g = 0; g < displayed.size(); ++g) {
          const auto before = displayed[g].states;
          displayed[g] = apply_point_c(displayed[g], attack_rng);
          if (log.enabled()) {
            log.write({{"type", "attack"}, {"point", "C"}, {"t", t},
                       {"gantry", static_cast<int>(g)},
                       {"before", states_json(before)},
                       {"after", states_json(displayed[g].states)}});
          }
        }
        if (flags.monitoring) {
          // display read-back compared against the monitoring decision
          for (std::size_t g = 0; g < displayed.size(); ++g) {
            const MatchOutcome outcome = match_states(displayed[g], mon_dec[g]);
            const ResolveResult rr = resolve(outcome, displayed[g], mon_dec[g]);
            if (rr.alert) {
              displayed[g] = rr.final_decision;
              mismatched[g] = true;
              ++alerts;
              if (log.enabled()) {
                log.write({{"type", "alert"}, {"t", t}, {"gantry", static_cast<int>(g)},
                           {"differing_lanes", OrderedJson::array()},
                           {"atm", states_json(outcome.atm_states)},
                           {"mon", states_json(outcome.mon_states)}});
                log.write({{"type", "override"}, {"t", t}, {"gantry", static_cast<int>(g)},
                           {"displayed", states_json(displayed[g].states)}});
              }
            }
          }
        }
      }

      if (options.probe && flags.monitoring) {
        for (std::size_t g = 0; g < displayed.size(); ++g) {
          options.probe->matches.push_back({interval, static_cast<int>(g), mismatched[g],
                                            displayed[g].states, mon_dec[g].states});
        }
      }

      if (log.enabled()) {
        for (std::size_t g = 0; g < displayed.size(); ++g) {
          if (displayed[g].states != displayed_prev[g].states) {
            log.write({{"type", "state"}, {"t", t}, {"gantry", static_cast<int>(g)},
                       {"states", states_json(displayed[g].states)},
                       {"source", to_string(displayed[g].source)}});
          }
        }
      }
      displayed_prev = displayed;
      world.apply_lane_states(displayed);
    }

    if (measured) {
      if (log.enabled() && current_stat.vehicle_steps > 0) {
        log.write({{"type", "interval"}, {"t", t}, {"index", interval},
                   {"mean_speed_mph", current_stat.speed_sum_mph / current_stat.vehicle_steps},
                   {"vehicle_steps", current_stat.vehicle_steps}});
      }
      trace.push_back(current_stat);
      current_stat = IntervalSpeedStat{};
    }
  }

  if (options.probe) options.probe->alerts = alerts;

  ReplicationResult result;
  result.case_id = label;
  result.rep_index = rep_index;
  result.seed = derive_seed(config.master_seed, rep_index);
  result.mean_speed_mph = mean_network_speed(trace);
  result.alerts = alerts;
  result.attacks = static_cast<long>(engine.specs().size());
  result.log_path = options.log_path;
  log.close();
  return result;
}

std::vector<ReplicationResult> run_case(const ScenarioConfig& config, CaseId case_id, int n,
                                        int jobs, const std::string& out_dir) {
  if (n < 2) throw std::invalid_argument("run_case: need at least 2 replications (paired test undefined)");
  std::vector<ReplicationResult> results(n);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        RunOptions opt;
        if (!out_dir.empty()) {
          opt.log_path = out_dir + "/" + std::string(to_string(case_id)) + "_rep" +
                         std::to_string(i) + ".jsonl";
        }
        results[i] = run_replication(config, case_id, i, opt);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const int threads = std::max(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

ComparisonReport build_report(const std::array<std::vector<ReplicationResult>, 4>& results) {
  const std::size_t n = results[0].size();
  for (const auto& r : results) {
    if (r.empty()) throw std::invalid_argument("build_report: missing case");
    if (r.size() != n) throw std::invalid_argument("build_report: unequal replication counts");
  }
  std::array<std::vector<double>, 4> speeds;
  for (int c = 0; c < 4; ++c) {
    speeds[c].reserve(n);
    for (const auto& r : results[c]) speeds[c].push_back(r.mean_speed_mph);
  }

  ComparisonReport rep;
  rep.replications = static_cast<int>(n);
  for (int c = 0; c < 4; ++c) {
    rep.cases[c].mean = sample_mean(speeds[c]);
    rep.cases[c].sd = sample_sd(speeds[c]);
  }
  for (int c = 1; c < 4; ++c) {
    for (int r = 0; r < c && r < 3; ++r) {
      PairComparison pc;
      pc.percent_change = (rep.cases[c].mean - rep.cases[r].mean) / rep.cases[r].mean;
      pc.test = paired_t_test(speeds[c], speeds[r]);
      rep.vs[c][r] = pc;
    }
  }
  return rep;
}

namespace {
std::string p_string(const TTestResult& t) {
  if (t.p < 0.01) return "<0.01";
  if (t.p > 0.10) return ">0.10";
  char buf[16];
  std::snprintf(buf, sizeof buf, "=%.2f", t.p);
  return buf;
}
}  // namespace

std::string render_report_text(const ComparisonReport& rep) {
  static const char* kNames[4] = {"Baseline", "Case 1", "Case 2", "Case 3"};
  static const char* kYesNo[2] = {"No", "Yes"};
  std::ostringstream out;
  out << "Scenario  ATM  Attack  Monitor  MeanSpeed(mph)  SD   vs Baseline     vs Case 1       vs Case 2\n";
  for (int c = 0; c < 4; ++c) {
    const CaseFlags f = case_flags(static_cast<CaseId>(c));
    char line[160];
    std::snprintf(line, sizeof line, "%-9s %-4s %-7s %-8s %6.0f        %5.0f",
                  kNames[c], kYesNo[f.atm], kYesNo[f.attacks], kYesNo[f.monitoring],
                  rep.cases[c].mean, rep.cases[c].sd);
    out << line;
    for (int r = 0; r < 3; ++r) {
      if (rep.vs[c][r]) {
        char cell[48];
        std::snprintf(cell, sizeof cell, "  %+4.0f%% %-8s",
                      rep.vs[c][r]->percent_change * 100.0, p_string(rep.vs[c][r]->test).c_str());
        out << cell;
      } else {
        out << (c == r ? "  base          " : "  -             ");
      }
    }
    out << '\n';
  }
  return out.str();
}

OrderedJson report_to_json(const ComparisonReport& rep) {
  OrderedJson j;
  j["replications"] = rep.replications;
  OrderedJson cases = OrderedJson::array();
  for (int c = 0; c < 4; ++c) {
    OrderedJson cj;
    cj["case"] = to_string(static_cast<CaseId>(c));
    cj["mean_speed_mph"] = rep.cases[c].mean;
    cj["sd_mph"] = rep.cases[c].sd;
    OrderedJson comps = OrderedJson::array();
    for (int r = 0; r < 3; ++r) {
      if (!rep.vs[c][r]) continue;
      const PairComparison& pc = *rep.vs[c][r];
      comps.push_back({{"reference", to_string(static_cast<CaseId>(r))},
                       {"percent_change", pc.percent_change},
                       {"t", std::isfinite(pc.test.t) ? OrderedJson(pc.test.t)
                                                      : OrderedJson(nullptr)},
                       {"p", pc.test.p},
                       {"df", pc.test.df},
                       {"degenerate_variance", pc.test.degenerate_variance}});
    }
    cj["comparisons"] = comps;
    cases.push_back(cj);
  }
  j["cases"] = cases;
  return j;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out.is_open()) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_replications_csv(const std::string& path,
                            const std::array<std::vector<ReplicationResult>, 4>& results) {
  std::ostringstream out;
  out << "case,rep_index,seed,mean_speed_mph,alerts,attacks\n";
  for (const auto& case_results : results) {
    for (const ReplicationResult& r : case_results) {
      out << to_string(r.case_id) << ',' << r.rep_index << ',' << r.seed << ','
          << format_double(r.mean_speed_mph) << ',' << r.alerts << ',' << r.attacks << '\n';
    }
  }
  atomic_write_file(path, out.str());
}

std::array<std::vector<ReplicationResult>, 4> read_replications_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error("cannot open " + path);
  std::array<std::vector<ReplicationResult>, 4> results;
  std::string line;
  if (!std::getline(in, line) || line != "case,rep_index,seed,mean_speed_mph,alerts,attacks")
    throw std::runtime_error("bad replications.csv header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    ReplicationResult r;
    std::getline(ls, field, ',');
    r.case_id = case_from_string(field);
    std::getline(ls, field, ',');
    r.rep_index = std::stoi(field);
    std::getline(ls, field, ',');
    r.seed = std::stoull(field);
    std::getline(ls, field, ',');
    r.mean_speed_mph = std::stod(field);
    std::getline(ls, field, ',');
    r.alerts = std::stol(field);
    std::getline(ls, field, ',');
    r.attacks = std::stol(field);
    results[static_cast<int>(r.case_id)].push_back(r);
  }
  return results;
}

Table1Output run_table1(const ScenarioConfig& config, int jobs, const std::string& out_dir) {
  Table1Output out;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  for (int c = 0; c < 4; ++c) {
    out.results[c] =
        run_case(config, static_cast<CaseId>(c), config.replications, jobs, out_dir);
  }
  out.report = build_report(out.results);
  if (!out_dir.empty()) {
    write_replications_csv(out_dir + "/replications.csv", out.results);
    atomic_write_file(out_dir + "/report.json", report_to_json(out.report).dump(2) + "\n");
    atomic_write_file(out_dir + "/report.txt", render_report_text(out.report));
    atomic_write_file(out_dir + "/config.json", config.to_json().dump(2) + "\n");
  }
  return out;
}

}  // namespace atmsim
