#include "atmsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace atmsim {

namespace {

using nlohmann::json;

/// Tracks consumed keys within one JSON object and rejects leftovers.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw std::invalid_argument("config: " + path_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (auto it = j_.find(key); it != j_.end()) {
      seen_.insert(key);
      try {
        out = it->get<T>();
      } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value type at " + path_ + key);
      }
    }
  }

  const json* child(const char* key) {
    if (auto it = j_.find(key); it != j_.end()) {
      seen_.insert(key);
      return &*it;
    }
    return nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw std::invalid_argument("config: unknown key '" + path_ + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

AttackPoint attack_point_from_string(const std::string& s) {
  if (s == "A") return AttackPoint::A;
  if (s == "B") return AttackPoint::B;
  if (s == "C") return AttackPoint::C;
  throw std::invalid_argument("config: attacks.points entries must be \"A\", \"B\" or \"C\"");
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("config: " + msg);
}

}  // namespace

void ScenarioConfig::validate() const {
  geometry.validate();
  require(demand_vph > 0.0, "demand_vph must be positive");
  require(warmup_s > 0.0, "warmup_s must be positive");
  require(run_s > 0.0, "run_s must be positive");
  require(dt_s > 0.0, "dt_s must be positive");
  require(collection_interval_s > 0.0, "collection_interval_s must be positive");
  const double steps = collection_interval_s / dt_s;
  require(std::abs(steps - std::round(steps)) < 1e-9,
          "collection_interval_s must be an integer multiple of dt_s");
  require(detector.c1 > 0.0 && detector.c1 < 1.0, "detector.c1 must be in (0,1)");
  require(detector.c2 > 0.0 && detector.c2 < 1.0, "detector.c2 must be in (0,1)");
  require(detector.debounce >= 1, "detector.debounce must be >= 1");
  require(detector.hold_s >= 0.0, "detector.hold_s must be >= 0");
  require(attacks.rate_per_run >= 0.0, "attacks.rate must be >= 0");
  require(attacks.duration_min_s > 0.0, "attacks.duration_min_s must be positive");
  require(attacks.duration_max_s >= attacks.duration_min_s,
          "attacks.duration_max_s must be >= duration_min_s");
  require(incident.lane >= 0 && incident.lane < geometry.lane_count,
          "incident.lane out of range");
  require(incident.position_mi >= 0.0 && incident.position_mi <= geometry.length_mi,
          "incident.position_mi outside segment");
  require(driver.compliance_rate >= 0.0 && driver.compliance_rate <= 1.0,
          "driver.compliance_rate must be in [0,1]");
  require(driver.cv_penetration >= 0.0 && driver.cv_penetration <= 1.0,
          "driver.cv_penetration must be in [0,1]");
  require(replications >= 1, "replications must be >= 1");
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  StrictObject root(j, "");

  if (const json* g = root.child("geometry")) {
    StrictObject go(*g, "geometry.");
    go.get("length_mi", c.geometry.length_mi);
    go.get("lane_count", c.geometry.lane_count);
    go.get("gantry_positions_mi", c.geometry.gantry_positions_mi);
    go.get("detector_setback_m", c.geometry.detector_setback_m);
    std::vector<double> zone = {c.geometry.incident_zone_mi[0], c.geometry.incident_zone_mi[1]};
    go.get("incident_zone_mi", zone);
    if (zone.size() != 2)
      throw std::invalid_argument("config: geometry.incident_zone_mi must have two entries");
    c.geometry.incident_zone_mi = {zone[0], zone[1]};
    go.finish();
  }
  root.get("demand_vph", c.demand_vph);
  root.get("warmup_s", c.warmup_s);
  root.get("run_s", c.run_s);
  root.get("dt_s", c.dt_s);
  root.get("collection_interval_s", c.collection_interval_s);
  if (const json* d = root.child("detector")) {
    StrictObject det(*d, "detector.");
    det.get("c1", c.detector.c1);
    det.get("c2", c.detector.c2);
    det.get("debounce", c.detector.debounce);
    det.get("hold_s", c.detector.hold_s);
    det.finish();
  }
  root.get("policy_table", c.policy_table_path);
  if (const json* a = root.child("attacks")) {
    StrictObject at(*a, "attacks.");
    std::vector<std::string> points;
    at.get("points", points);
    if (a->contains("points")) {
      c.attacks.points.clear();
      for (const auto& p : points) c.attacks.points.push_back(attack_point_from_string(p));
    }
    at.get("rate", c.attacks.rate_per_run);
    at.get("duration_min_s", c.attacks.duration_min_s);
    at.get("duration_max_s", c.attacks.duration_max_s);
    at.get("saturation_flow_vphpl", c.attacks.saturation_flow_vphpl);
    at.finish();
  }
  if (const json* i = root.child("incident")) {
    StrictObject inc(*i, "incident.");
    inc.get("lane", c.incident.lane);
    inc.get("position_mi", c.incident.position_mi);
    inc.get("start_after_warmup_s", c.incident.start_after_warmup_s);
    inc.get("duration_s", c.incident.duration_s);
    inc.finish();
  }
  if (const json* d = root.child("driver")) {
    StrictObject dr(*d, "driver.");
    dr.get("desired_speed_mph", c.driver.desired_speed_mph);
    dr.get("speed_jitter_mph", c.driver.speed_jitter_mph);
    dr.get("compliance_rate", c.driver.compliance_rate);
    dr.get("cv_penetration", c.driver.cv_penetration);
    dr.get("deterministic_headway", c.driver.deterministic_headway);
    dr.finish();
  }
  root.get("closed_lane_grace_mi", c.closed_lane_grace_mi);
  root.get("master_seed", c.master_seed);
  root.get("replications", c.replications);
  root.finish();

  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

nlohmann::ordered_json ScenarioConfig::to_json() const {
  nlohmann::ordered_json j;
  j["geometry"] = {{"length_mi", geometry.length_mi},
                   {"lane_count", geometry.lane_count},
                   {"gantry_positions_mi", geometry.gantry_positions_mi},
                   {"detector_setback_m", geometry.detector_setback_m},
                   {"incident_zone_mi", {geometry.incident_zone_mi[0], geometry.incident_zone_mi[1]}}};
  j["demand_vph"] = demand_vph;
  j["warmup_s"] = warmup_s;
  j["run_s"] = run_s;
  j["dt_s"] = dt_s;
  j["collection_interval_s"] = collection_interval_s;
  j["detector"] = {{"c1", detector.c1},
                   {"c2", detector.c2},
                   {"debounce", detector.debounce},
                   {"hold_s", detector.hold_s}};
  j["policy_table"] = policy_table_path;
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (AttackPoint p : attacks.points) points.push_back(to_string(p));
  j["attacks"] = {{"points", points},
                  {"rate", attacks.rate_per_run},
                  {"duration_min_s", attacks.duration_min_s},
                  {"duration_max_s", attacks.duration_max_s},
                  {"saturation_flow_vphpl", attacks.saturation_flow_vphpl}};
  j["incident"] = {{"lane", incident.lane},
                   {"position_mi", incident.position_mi},
                   {"start_after_warmup_s", incident.start_after_warmup_s},
                   {"duration_s", incident.duration_s}};
  j["driver"] = {{"desired_speed_mph", driver.desired_speed_mph},
                 {"speed_jitter_mph", driver.speed_jitter_mph},
                 {"compliance_rate", driver.compliance_rate},
                 {"cv_penetration", driver.cv_penetration},
                 {"deterministic_headway", driver.deterministic_headway}};
  j["closed_lane_grace_mi"] = closed_lane_grace_mi;
  j["master_seed"] = master_seed;
  j["replications"] = replications;
  return j;
}

}  // namespace atmsim
