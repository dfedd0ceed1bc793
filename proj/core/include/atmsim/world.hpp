#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "atmsim/eventlog.hpp"
#include "atmsim/geometry.hpp"
#include "atmsim/rng.hpp"
#include "atmsim/types.hpp"

namespace atmsim {

/// Intelligent Driver Model parameters. Speeds in m/s, accelerations in m/s².
struct IdmParams {
  double desired_speed_mps = mph_to_mps(70.0);
  double time_headway_s = 1.0;
  double max_accel_mps2 = 2.0;
  double comfort_decel_mps2 = 2.0;
  double standstill_gap_m = 2.0;
};

/// IDM acceleration toward a leader at distance `gap` moving at `lead_v`.
/// Pass an infinite gap for free driving.
double idm_accel(const IdmParams& p, double v, double v_des, double gap, double lead_v);

struct LaneChangeParams {
  double politeness = 0.2;
  double incentive_threshold_mps2 = 0.2;
  double safe_decel_discretionary_mps2 = 1.0;
  double safe_decel_mandatory_mps2 = 4.0;
  double min_gap_m = 0.5;
  double cooldown_s = 4.0;
};

struct WorldConfig {
  RoadGeometry geometry;
  IdmParams idm;
  LaneChangeParams lane_change;
  double dt_s = 0.5;
  double demand_vph = 4500.0;
  bool deterministic_headway = false;
  double desired_speed_jitter_mph = 5.0;
  double cv_penetration = 1.0;
  double compliance_rate = 1.0;
  double closed_lane_grace_m = 200.0;
  double detector_zone_halfwidth_m = 5.0;
  double stopped_speed_threshold_mps = 0.05;
};

/// Deterministic discrete-time microsimulation of the freeway segment.
/// Owns all vehicle state; one instance per replication.
class World {
 public:
  World(WorldConfig cfg, Rng demand_rng, Rng driver_rng, EventLog log = {});

  /// Registers the scenario event. Incidents become a stationary blockage
  /// while their window is active. Re-applying an identical event is a no-op.
  void apply_incident(const EventDescriptor& event);

  /// Installs the displayed lane control states; takes effect next step.
  void apply_lane_states(const std::vector<GantryDecision>& decisions);

  void step();

  /// Drains the detector aggregation for the interval just ended.
  /// One sample per (station, lane).
  std::vector<DetectorSample> take_interval_samples(int interval);

  /// One report per connected vehicle, reflecting current true state.
  std::vector<CVReport> collect_cv_reports() const;

  double clock_s() const { return clock_s_; }
  const std::vector<std::vector<Vehicle>>& lanes() const { return lanes_; }
  const std::vector<GantryDecision>& active_states() const { return active_states_; }

  std::int64_t vehicles_injected() const { return injected_; }
  std::int64_t vehicles_exited() const { return exited_; }
  std::int64_t vehicles_queued() const { return static_cast<std::int64_t>(entry_queue_.size()); }
  std::int64_t vehicles_present() const;

  /// Sum of speeds (mph) and vehicle count, for space-mean accumulation.
  void speed_snapshot(double& sum_mph, long& count) const;

  bool incident_blockage_active() const;

 private:
  struct PendingVehicle {
    double desired_speed_mps;
    bool is_cv;
    bool compliant;
  };

  void spawn_arrivals();
  void admit_queued();
  void resolve_lane_changes();
  void integrate();
  void remove_exited();

  LaneState state_at(int gantry, int lane) const;
  // First gantry at or downstream of pos with a non-Open state for `lane`,
  // or -1. Only meaningful for compliant vehicles.
  int restricting_gantry_ahead(double pos, int lane) const;
  // True when pos lies downstream of a gantry whose state for `lane` is Closed.
  bool inside_closed_stretch(double pos, int lane) const;
  bool lane_enterable(int lane, double pos) const;

  double effective_accel(int lane, double pos, double v, double v_des, bool compliant,
                         const Vehicle* self) const;
  const Vehicle* leader_in_lane(int lane, double pos, const Vehicle* self) const;
  const Vehicle* follower_in_lane(int lane, double pos, const Vehicle* self) const;
  bool try_lane_change(Vehicle& veh, int target, bool mandatory);
  void do_lane_change(Vehicle& veh, int from, int to);

  std::optional<double> blockage_position_m() const;

  WorldConfig cfg_;
  Rng demand_rng_;
  Rng driver_rng_;
  EventLog log_;

  double clock_s_ = 0.0;
  std::int64_t next_vehicle_id_ = 1;
  std::int64_t injected_ = 0;
  std::int64_t exited_ = 0;

  std::vector<std::vector<Vehicle>> lanes_;  // each sorted by ascending position
  std::deque<PendingVehicle> entry_queue_;
  double next_arrival_s_ = 0.0;

  std::vector<GantryDecision> active_states_;
  std::optional<EventDescriptor> incident_;

  // per (station, lane) crossing accumulation for the current interval
  std::vector<std::vector<double>> crossing_speed_sum_mph_;
  std::vector<std::vector<int>> crossing_count_;
};

/// Per-interval space-mean speed accumulator used for the mean network
/// speed metric (time mean over intervals of the space mean).
struct IntervalSpeedStat {
  double speed_sum_mph = 0.0;
  long vehicle_steps = 0;
};

/// Throws std::runtime_error("no measurement intervals") when every
/// interval is empty.
double mean_network_speed(const std::vector<IntervalSpeedStat>& trace);

}  // namespace atmsim
