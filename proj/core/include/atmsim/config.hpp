#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "atmsim/attack.hpp"
#include "atmsim/controller.hpp"
#include "atmsim/geometry.hpp"

namespace atmsim {

struct IncidentConfig {
  int lane = 2;
  double position_mi = 1.25;
  double start_after_warmup_s = 60.0;
  double duration_s = -1.0;  // negative: lasts until run end
};

struct DriverBehaviorConfig {
  double desired_speed_mph = 70.0;
  double speed_jitter_mph = 5.0;
  double compliance_rate = 1.0;
  double cv_penetration = 1.0;
  bool deterministic_headway = false;
};

struct DetectorConfig {
  double c1 = 0.6;
  double c2 = 0.1;
  int debounce = 2;
  double hold_s = 60.0;  // located event persists this long without fresh evidence
};

struct ScenarioConfig {
  RoadGeometry geometry;
  double demand_vph = 4500.0;
  double warmup_s = 120.0;
  double run_s = 600.0;
  double dt_s = 0.5;
  double collection_interval_s = 10.0;
  DetectorConfig detector;
  std::string policy_table_path;  // empty: built-in default table
  AttackConfig attacks;
  IncidentConfig incident;
  DriverBehaviorConfig driver;
  double closed_lane_grace_mi = 0.125;
  std::uint64_t master_seed = 0;
  int replications = 55;

  /// Throws std::invalid_argument with a field path on any violation.
  void validate() const;

  nlohmann::ordered_json to_json() const;
};

/// Strict parse: defaults filled, unknown keys rejected by name.
ScenarioConfig config_from_json(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);

}  // namespace atmsim
