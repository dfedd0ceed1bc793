#include "atmsim/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace atmsim {

std::vector<AttackSpec> schedule_attacks(const AttackConfig& cfg, double window_start_s,
                                         double window_end_s, Rng& rng) {
  if (cfg.rate_per_run < 0.0) throw std::invalid_argument("attack rate must be >= 0");
  if (cfg.rate_per_run == 0.0 || cfg.points.empty()) return {};
  const int count = rng.poisson(cfg.rate_per_run);
  std::vector<AttackSpec> specs;
  specs.reserve(count);
  for (int k = 0; k < count; ++k) {
    AttackSpec s;
    s.point = cfg.points[rng.uniform_int(cfg.points.size())];
    s.start_s = rng.uniform(window_start_s, window_end_s);
    s.duration_s = rng.uniform(cfg.duration_min_s, cfg.duration_max_s);
    s.duration_s = std::min(s.duration_s, window_end_s - s.start_s);
    if (s.duration_s > 0.0) specs.push_back(s);
  }
  std::sort(specs.begin(), specs.end(), [](const AttackSpec& a, const AttackSpec& b) {
    if (a.point != b.point) return a.point < b.point;
    return a.start_s < b.start_s;
  });
  // merge overlaps within one point
  std::vector<AttackSpec> merged;
  for (const AttackSpec& s : specs) {
    if (!merged.empty() && merged.back().point == s.point &&
        s.start_s <= merged.back().end_s()) {
      merged.back().duration_s =
          std::max(merged.back().end_s(), s.end_s()) - merged.back().start_s;
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

namespace {
GantryDecision scramble_states(const GantryDecision& decision, const StateDraw& draw) {
  GantryDecision out = decision;
  for (auto& s : out.states) s = static_cast<LaneState>(draw());
  return out;
}
}  // namespace

GantryDecision apply_point_a(const GantryDecision& decision, const StateDraw& draw) {
  return scramble_states(decision, draw);
}

GantryDecision apply_point_a(const GantryDecision& decision, Rng& rng) {
  return scramble_states(decision, [&rng] { return static_cast<int>(rng.uniform_int(3)); });
}

std::vector<DetectorSample> apply_point_b(const std::vector<DetectorSample>& samples, Rng& rng,
                                          int q_max, double u_max_mph) {
  std::vector<DetectorSample> out = samples;
  for (DetectorSample& s : out) {
    s.u_mph = rng.uniform(0.0, u_max_mph);
    s.q = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(q_max) + 1));
  }
  return out;
}

GantryDecision apply_point_c(const GantryDecision& decision, const StateDraw& draw) {
  return scramble_states(decision, draw);
}

GantryDecision apply_point_c(const GantryDecision& decision, Rng& rng) {
  return scramble_states(decision, [&rng] { return static_cast<int>(rng.uniform_int(3)); });
}

int point_b_q_max(const AttackConfig& cfg, double interval_s) {
  return static_cast<int>(std::ceil(cfg.saturation_flow_vphpl * interval_s / 3600.0));
}

}  // namespace atmsim
