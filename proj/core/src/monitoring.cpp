#include "atmsim/monitoring.hpp"

#include <cmath>
#include <stdexcept>

#include "atmsim/units.hpp"

namespace atmsim {

MatchOutcome match_states(const GantryDecision& atm, const GantryDecision& mon) {
  if (atm.gantry != mon.gantry)
    throw std::invalid_argument("match_states: gantry mismatch (caller bug)");
  if (atm.timestamp_s != mon.timestamp_s)
    throw std::invalid_argument("match_states: timestamp mismatch (caller bug)");
  if (atm.states.size() != mon.states.size())
    throw std::invalid_argument("match_states: lane arity mismatch");

  MatchOutcome out;
  out.gantry = atm.gantry;
  out.atm_states = atm.states;
  out.mon_states = mon.states;
  for (std::size_t i = 0; i < atm.states.size(); ++i) {
    if (atm.states[i] != mon.states[i]) out.differing_lanes.push_back(static_cast<int>(i));
  }
  out.verdict = out.differing_lanes.empty() ? MatchVerdict::Match : MatchVerdict::Mismatch;
  return out;
}

ResolveResult resolve(const MatchOutcome& outcome, const GantryDecision& atm,
                      const GantryDecision& mon) {
  if (outcome.verdict == MatchVerdict::Match) return {atm, std::nullopt};
  Alert alert;
  alert.timestamp_s = mon.timestamp_s;
  alert.gantry = outcome.gantry;
  alert.outcome = outcome;
  GantryDecision final_decision = mon;
  final_decision.source = DecisionSource::MonitoringChannel;
  return {final_decision, alert};
}

CvAggregator::CvAggregator(RoadGeometry geometry, double zone_halfwidth_m,
                           double stopped_threshold_mps)
    : geometry_(std::move(geometry)),
      zone_halfwidth_m_(zone_halfwidth_m),
      stopped_threshold_mps_(stopped_threshold_mps) {
  speed_sum_mph_.assign(geometry_.gantry_count(),
                        std::vector<double>(geometry_.lane_count, 0.0));
  count_.assign(geometry_.gantry_count(), std::vector<int>(geometry_.lane_count, 0));
}

void CvAggregator::observe(std::span<const CVReport> reports) {
  for (const CVReport& r : reports) {
    auto it = last_position_.find(r.vehicle_id);
    if (it != last_position_.end()) {
      for (int st = 0; st < geometry_.gantry_count(); ++st) {
        const double dp = geometry_.detector_position_m(st);
        if (it->second < dp && r.position_m >= dp) {
          count_[st][r.lane] += 1;
          speed_sum_mph_[st][r.lane] += mps_to_mph(r.speed_mps);
        }
      }
      it->second = r.position_m;
    } else {
      // first report of a vehicle: entry at position ~0, upstream of all stations
      for (int st = 0; st < geometry_.gantry_count(); ++st) {
        const double dp = geometry_.detector_position_m(st);
        if (r.position_m >= dp) {
          count_[st][r.lane] += 1;
          speed_sum_mph_[st][r.lane] += mps_to_mph(r.speed_mps);
        }
      }
      last_position_.emplace(r.vehicle_id, r.position_m);
    }
  }
  last_step_.assign(reports.begin(), reports.end());
}

std::vector<DetectorSample> CvAggregator::take_interval(int interval) {
  std::vector<DetectorSample> out;
  for (int st = 0; st < geometry_.gantry_count(); ++st) {
    for (int l = 0; l < geometry_.lane_count; ++l) {
      DetectorSample s;
      s.station = st;
      s.lane = l;
      s.interval = interval;
      if (count_[st][l] > 0) {
        s.q = count_[st][l];
        s.u_mph = speed_sum_mph_[st][l] / count_[st][l];
      } else {
        const double dp = geometry_.detector_position_m(st);
        for (const CVReport& r : last_step_) {
          if (r.lane == l && std::abs(r.position_m - dp) <= zone_halfwidth_m_ &&
              r.speed_mps < stopped_threshold_mps_) {
            s.q = 0;
            s.u_mph = 0.0;
            break;
          }
        }
      }
      count_[st][l] = 0;
      speed_sum_mph_[st][l] = 0.0;
      out.push_back(s);
    }
  }
  return out;
}

std::vector<DetectorSample> cv_aggregate(std::span<const std::vector<CVReport>> steps,
                                         const RoadGeometry& geometry, int interval) {
  CvAggregator agg(geometry);
  for (const auto& step : steps) agg.observe(step);
  return agg.take_interval(interval);
}

MonitorChannel::MonitorChannel(RoadGeometry geometry, ChannelParams params)
    : agg_(geometry), channel_(geometry, std::move(params), DecisionSource::MonitoringChannel) {}

}  // namespace atmsim
