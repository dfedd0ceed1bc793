#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "atmsim/controller.hpp"
#include "atmsim/geometry.hpp"
#include "atmsim/types.hpp"

namespace atmsim {

enum class MatchVerdict { Match, Mismatch };

struct MatchOutcome {
  int gantry = 0;
  std::vector<LaneState> atm_states;
  std::vector<LaneState> mon_states;
  MatchVerdict verdict = MatchVerdict::Match;
  std::vector<int> differing_lanes;
};

struct Alert {
  double timestamp_s = 0.0;
  int gantry = 0;
  MatchOutcome outcome;
};

/// Lane-wise comparison of the two channels' decisions for one gantry.
/// Throws std::invalid_argument on a gantry or timestamp mismatch.
MatchOutcome match_states(const GantryDecision& atm, const GantryDecision& mon);

struct ResolveResult {
  GantryDecision final_decision;
  std::optional<Alert> alert;
};

/// Match keeps the ATM decision; any deviation displays the monitoring
/// decision and raises an operator alert.
ResolveResult resolve(const MatchOutcome& outcome, const GantryDecision& atm,
                      const GantryDecision& mon);

/// Builds detector-equivalent interval samples from per-step CV reports.
/// Crossing extraction mirrors the loop detectors exactly, so under 100%
/// penetration the aggregates equal the detector samples.
class CvAggregator {
 public:
  CvAggregator(RoadGeometry geometry, double zone_halfwidth_m = 5.0,
               double stopped_threshold_mps = 0.05);

  /// Feed the reports of one time step (all connected vehicles).
  void observe(std::span<const CVReport> reports);

  /// Drains the interval aggregation; one sample per (station, lane).
  std::vector<DetectorSample> take_interval(int interval);

 private:
  RoadGeometry geometry_;
  double zone_halfwidth_m_;
  double stopped_threshold_mps_;
  std::unordered_map<std::int64_t, double> last_position_;
  std::vector<CVReport> last_step_;
  std::vector<std::vector<double>> speed_sum_mph_;
  std::vector<std::vector<int>> count_;
};

/// Stateless wrapper over CvAggregator for a single interval's report
/// stream (steps in chronological order, each step a contiguous group).
std::vector<DetectorSample> cv_aggregate(std::span<const std::vector<CVReport>> steps,
                                         const RoadGeometry& geometry, int interval);

/// The monitoring channel: CV aggregation feeding the shared control logic.
class MonitorChannel {
 public:
  MonitorChannel(RoadGeometry geometry, ChannelParams params);

  void observe(std::span<const CVReport> reports) { agg_.observe(reports); }
  std::vector<DetectorSample> take_interval(int interval) { return agg_.take_interval(interval); }

  std::vector<GantryDecision> update(const std::vector<DetectorSample>& samples, double now_s,
                                     std::span<const EventDescriptor> scheduled = {}) {
    return channel_.update(samples, now_s, scheduled);
  }

 private:
  CvAggregator agg_;
  ControlChannel channel_;
};

}  // namespace atmsim
