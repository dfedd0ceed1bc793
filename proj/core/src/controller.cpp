#include "atmsim/controller.hpp"

#include <limits>
#include <stdexcept>

namespace atmsim {

namespace {
constexpr double kNoEnd = std::numeric_limits<double>::infinity();
}

std::vector<bool> evaluate_triggers(std::span<const DetectorSample> current,
                                    std::span<const DetectorSample> previous,
                                    const IncidentDetectorParams& params) {
  const std::size_t lanes = current.size();
  if (lanes == 0) throw std::invalid_argument("detect: no lanes in current interval");
  if (!previous.empty() && previous.size() != lanes)
    throw std::invalid_argument("detect: current and previous lane sets differ");
  for (std::size_t i = 0; i < lanes; ++i) {
    if (!previous.empty() &&
        (current[i].lane != previous[i].lane || current[i].station != previous[i].station))
      throw std::invalid_argument("detect: current and previous lane sets differ");
  }

  std::vector<bool> flags(lanes, false);
  for (std::size_t i = 0; i < lanes; ++i) {
    const DetectorSample& cur = current[i];
    // speed zero with a vehicle stopped on the detector
    if (cur.u_mph && *cur.u_mph == 0.0) {
      flags[i] = true;
      continue;
    }
    if (!previous.empty()) {
      const DetectorSample& prev = previous[i];
      // count drops to zero after a nonzero interval
      if (cur.q == 0 && prev.q > 0) {
        flags[i] = true;
        continue;
      }
      // comparative speed drop, guarded by the other lanes holding up
      if (cur.u_mph && prev.u_mph && *cur.u_mph < params.c1 * *prev.u_mph) {
        bool others_hold = true;
        for (std::size_t j = 0; j < lanes; ++j) {
          if (j == i) continue;
          const DetectorSample& cj = current[j];
          const DetectorSample& pj = previous[j];
          if (!cj.u_mph || !pj.u_mph || !(*cj.u_mph > (1.0 - params.c2) * *pj.u_mph)) {
            others_hold = false;
            break;
          }
        }
        if (others_hold) flags[i] = true;
      }
    }
  }
  return flags;
}

std::vector<bool> detect_incident(std::span<const DetectorSample> current,
                                  std::span<const DetectorSample> previous,
                                  const IncidentDetectorParams& params,
                                  std::vector<int>& counters) {
  auto flags = evaluate_triggers(current, previous, params);
  if (counters.size() != flags.size()) counters.assign(flags.size(), 0);
  std::vector<bool> confirmed(flags.size(), false);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    counters[i] = flags[i] ? counters[i] + 1 : 0;
    confirmed[i] = counters[i] >= params.debounce;
  }
  return confirmed;
}

EventDescriptor locate_event(const std::vector<std::vector<bool>>& confirmed_per_station,
                             const RoadGeometry& geometry,
                             std::span<const EventDescriptor> scheduled, double now_s) {
  for (int st = static_cast<int>(confirmed_per_station.size()) - 1; st >= 0; --st) {
    const auto& lanes = confirmed_per_station[st];
    for (std::size_t lane = 0; lane < lanes.size(); ++lane) {
      if (lanes[lane]) {
        EventDescriptor e;
        e.kind = EventKind::Incident;
        e.lane = static_cast<int>(lane);
        e.position_mi = geometry.section_midpoint_mi(st);
        e.window_start_s = now_s;
        e.window_end_s = kNoEnd;
        return e;
      }
    }
  }
  for (const EventDescriptor& e : scheduled) {
    if (e.kind == EventKind::Paving && e.active_at(now_s)) return e;
  }
  return EventDescriptor{};
}

GantryDecision decide_lane_states(const DecisionInput& input, const PolicyTable& table,
                                  int gantry, int lane_count, double timestamp_s,
                                  DecisionSource source) {
  GantryDecision d;
  d.gantry = gantry;
  d.states = table.lookup(input, lane_count);
  d.timestamp_s = timestamp_s;
  d.source = source;
  return d;
}

ControlChannel::ControlChannel(RoadGeometry geometry, ChannelParams params, DecisionSource source)
    : geometry_(std::move(geometry)), params_(std::move(params)), source_(source) {
  counters_.assign(geometry_.gantry_count(), std::vector<int>(geometry_.lane_count, 0));
  prev_.resize(geometry_.gantry_count());
}

std::vector<GantryDecision> ControlChannel::update(const std::vector<DetectorSample>& samples,
                                                   double now_s,
                                                   std::span<const EventDescriptor> scheduled) {
  const int stations = geometry_.gantry_count();
  const int lanes = geometry_.lane_count;
  if (static_cast<int>(samples.size()) != stations * lanes)
    throw std::invalid_argument("channel update: expected one sample per station and lane");

  std::vector<std::vector<bool>> confirmed(stations);
  std::vector<double> prevailing(stations, params_.free_flow_speed_mph);
  for (int st = 0; st < stations; ++st) {
    std::span<const DetectorSample> cur(samples.data() + st * lanes, lanes);
    confirmed[st] = detect_incident(cur, prev_[st], params_.detector, counters_[st]);
    double sum = 0.0;
    int n = 0;
    for (const DetectorSample& s : cur) {
      if (s.u_mph) {
        sum += *s.u_mph;
        ++n;
      }
    }
    if (n > 0) prevailing[st] = sum / n;
    prev_[st].assign(cur.begin(), cur.end());
  }

  EventDescriptor located = locate_event(confirmed, geometry_, scheduled, now_s);
  if (located.kind != EventKind::None) {
    current_event_ = located;
    hold_remaining_ = params_.hold_intervals;
  } else if (hold_remaining_ > 0) {
    --hold_remaining_;  // latched event persists across quiet intervals
  } else {
    current_event_ = EventDescriptor{};
  }

  std::vector<GantryDecision> out;
  out.reserve(stations);
  for (int g = 0; g < stations; ++g) {
    DecisionInput in;
    in.prevailing_speed_mph = prevailing[g];
    const double dist = current_event_.position_mi - geometry_.gantry_positions_mi[g];
    if (current_event_.kind != EventKind::None && dist >= 0.0) {
      in.event = current_event_.kind;
      in.event_lane = current_event_.lane;
      in.distance_to_event_mi = dist;
      in.role = GantryRole::Nearest;
      for (int other = g + 1; other < stations; ++other) {
        if (geometry_.gantry_positions_mi[other] <= current_event_.position_mi)
          in.role = GantryRole::Upstream;
      }
    }
    out.push_back(decide_lane_states(in, params_.table, g, lanes, now_s, source_));
  }
  return out;
}

}  // namespace atmsim
