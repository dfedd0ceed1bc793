#pragma once

#include <functional>
#include <vector>

#include "atmsim/rng.hpp"
#include "atmsim/types.hpp"

namespace atmsim {

enum class AttackPoint { A, B, C };

inline const char* to_string(AttackPoint p) {
  switch (p) {
    case AttackPoint::A: return "A";
    case AttackPoint::B: return "B";
    case AttackPoint::C: return "C";
  }
  return "?";
}

struct AttackSpec {
  AttackPoint point = AttackPoint::A;
  double start_s = 0.0;
  double duration_s = 0.0;

  double end_s() const { return start_s + duration_s; }
};

struct AttackConfig {
  std::vector<AttackPoint> points = {AttackPoint::A, AttackPoint::B};
  double rate_per_run = 3.0;
  double duration_min_s = 30.0;
  double duration_max_s = 120.0;
  double saturation_flow_vphpl = 2200.0;
};

/// Poisson number of attacks with uniform starts over [window_start,
/// window_end) and uniform durations, truncated at the window end.
/// Overlapping windows at the same point are merged.
std::vector<AttackSpec> schedule_attacks(const AttackConfig& cfg, double window_start_s,
                                         double window_end_s, Rng& rng);

using StateDraw = std::function<int()>;  // uniform index into {Open, Merge, Closed}

GantryDecision apply_point_a(const GantryDecision& decision, const StateDraw& draw);
GantryDecision apply_point_a(const GantryDecision& decision, Rng& rng);

/// Scrambles U uniform over [0, u_max_mph] and Q uniform over [0, q_max];
/// station/lane/interval fields are untouched.
std::vector<DetectorSample> apply_point_b(const std::vector<DetectorSample>& samples, Rng& rng,
                                          int q_max, double u_max_mph = 70.0);

GantryDecision apply_point_c(const GantryDecision& decision, const StateDraw& draw);
GantryDecision apply_point_c(const GantryDecision& decision, Rng& rng);

/// Q_max for point-B scrambling: one saturated collection interval per lane.
int point_b_q_max(const AttackConfig& cfg, double interval_s);

class AttackEngine {
 public:
  AttackEngine() = default;
  explicit AttackEngine(std::vector<AttackSpec> specs) : specs_(std::move(specs)) {}

  bool active(AttackPoint point, double t) const {
    for (const AttackSpec& s : specs_) {
      if (s.point == point && t >= s.start_s && t < s.end_s()) return true;
    }
    return false;
  }
  const std::vector<AttackSpec>& specs() const { return specs_; }

 private:
  std::vector<AttackSpec> specs_;
};

}  // namespace atmsim
