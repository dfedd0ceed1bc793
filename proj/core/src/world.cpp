#include "atmsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace atmsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinEntrySpeedMps = 4.5;
constexpr double kOverlapClampGapM = 0.1;

bool pos_less(const Vehicle& v, double pos) { return v.position_m < pos; }
}  // namespace

double idm_accel(const IdmParams& p, double v, double v_des, double gap, double lead_v) {
  const double free_term = 1.0 - std::pow(v / std::max(v_des, 0.1), 4.0);
  if (!std::isfinite(gap)) return p.max_accel_mps2 * free_term;
  if (gap <= 0.05) return -3.0 * p.comfort_decel_mps2;
  const double dv = v - lead_v;
  double s_star = p.standstill_gap_m +
                  std::max(0.0, v * p.time_headway_s +
                                    v * dv / (2.0 * std::sqrt(p.max_accel_mps2 * p.comfort_decel_mps2)));
  const double ratio = s_star / gap;
  return p.max_accel_mps2 * (free_term - ratio * ratio);
}

World::World(WorldConfig cfg, Rng demand_rng, Rng driver_rng, EventLog log)
    : cfg_(std::move(cfg)), demand_rng_(demand_rng), driver_rng_(driver_rng), log_(std::move(log)) {
  cfg_.geometry.validate();
  lanes_.resize(cfg_.geometry.lane_count);
  active_states_.resize(cfg_.geometry.gantry_count());
  for (int g = 0; g < cfg_.geometry.gantry_count(); ++g) {
    active_states_[g].gantry = g;
    active_states_[g].states.assign(cfg_.geometry.lane_count, LaneState::Open);
  }
  crossing_speed_sum_mph_.assign(cfg_.geometry.gantry_count(),
                                 std::vector<double>(cfg_.geometry.lane_count, 0.0));
  crossing_count_.assign(cfg_.geometry.gantry_count(),
                         std::vector<int>(cfg_.geometry.lane_count, 0));
  if (cfg_.demand_vph > 0.0) {
    const double mean_headway = 3600.0 / cfg_.demand_vph;
    next_arrival_s_ =
        cfg_.deterministic_headway ? mean_headway : demand_rng_.exponential(mean_headway);
  } else {
    next_arrival_s_ = kInf;
  }
}

void World::apply_incident(const EventDescriptor& event) {
  if (event.kind == EventKind::None) return;
  if (event.position_mi < 0.0 || event.position_mi > cfg_.geometry.length_mi)
    throw std::invalid_argument("incident position outside segment");
  if (event.lane < 0 || event.lane >= cfg_.geometry.lane_count)
    throw std::invalid_argument("incident lane out of range");
  if (incident_ && *incident_ == event) return;  // idempotent
  incident_ = event;
}

void World::apply_lane_states(const std::vector<GantryDecision>& decisions) {
  if (static_cast<int>(decisions.size()) != cfg_.geometry.gantry_count())
    throw std::invalid_argument("apply_lane_states: one decision per gantry required");
  for (const auto& d : decisions) {
    if (static_cast<int>(d.states.size()) != cfg_.geometry.lane_count)
      throw std::invalid_argument("apply_lane_states: wrong lane arity");
  }
  active_states_ = decisions;
}

LaneState World::state_at(int gantry, int lane) const {
  return active_states_[gantry].states[lane];
}

int World::restricting_gantry_ahead(double pos, int lane) const {
  for (int g = 0; g < cfg_.geometry.gantry_count(); ++g) {
    const double gp = cfg_.geometry.gantry_position_m(g);
    if (gp >= pos && state_at(g, lane) != LaneState::Open) return g;
  }
  return -1;
}

bool World::inside_closed_stretch(double pos, int lane) const {
  int governing = -1;
  for (int g = 0; g < cfg_.geometry.gantry_count(); ++g) {
    if (cfg_.geometry.gantry_position_m(g) < pos) governing = g;
  }
  return governing >= 0 && state_at(governing, lane) == LaneState::Closed;
}

bool World::lane_enterable(int lane, double pos) const {
  if (lane < 0 || lane >= cfg_.geometry.lane_count) return false;
  if (inside_closed_stretch(pos, lane)) return false;
  for (int g = 0; g < cfg_.geometry.gantry_count(); ++g) {
    if (cfg_.geometry.gantry_position_m(g) >= pos && state_at(g, lane) == LaneState::Closed)
      return false;
  }
  return true;
}

std::optional<double> World::blockage_position_m() const {
  if (incident_ && incident_->active_at(clock_s_)) return miles_to_m(incident_->position_mi);
  return std::nullopt;
}

bool World::incident_blockage_active() const { return blockage_position_m().has_value(); }

const Vehicle* World::leader_in_lane(int lane, double pos, const Vehicle* self) const {
  const auto& ln = lanes_[lane];
  auto it = std::lower_bound(ln.begin(), ln.end(), pos, pos_less);
  while (it != ln.end() && (&*it == self || it->position_m <= pos)) ++it;
  return it == ln.end() ? nullptr : &*it;
}

const Vehicle* World::follower_in_lane(int lane, double pos, const Vehicle* self) const {
  const auto& ln = lanes_[lane];
  auto it = std::lower_bound(ln.begin(), ln.end(), pos, pos_less);
  while (it != ln.begin()) {
    --it;
    if (&*it != self && it->position_m <= pos) return &*it;
  }
  return nullptr;
}

double World::effective_accel(int lane, double pos, double v, double v_des, bool compliant,
                              const Vehicle* self) const {
  double acc = idm_accel(cfg_.idm, v, v_des, kInf, 0.0);
  if (const Vehicle* lead = leader_in_lane(lane, pos, self)) {
    const double gap = lead->position_m - lead->length_m - pos;
    acc = std::min(acc, idm_accel(cfg_.idm, v, v_des, gap, lead->speed_mps));
  }
  if (auto block = blockage_position_m(); block && lane == incident_->lane && *block >= pos) {
    acc = std::min(acc, idm_accel(cfg_.idm, v, v_des, *block - pos, 0.0));
  }
  if (compliant) {
    const int g = restricting_gantry_ahead(pos, lane);
    if (g >= 0) {
      const double gap = cfg_.geometry.gantry_position_m(g) - pos;
      acc = std::min(acc, idm_accel(cfg_.idm, v, v_des, gap, 0.0));
    }
  }
  return acc;
}

void World::spawn_arrivals() {
  if (cfg_.demand_vph <= 0.0) return;
  const double mean_headway = 3600.0 / cfg_.demand_vph;
  while (next_arrival_s_ <= clock_s_ + 1e-9) {
    PendingVehicle pv;
    const double base = cfg_.idm.desired_speed_mps;
    const double jitter = mph_to_mps(cfg_.desired_speed_jitter_mph);
    pv.desired_speed_mps = base + driver_rng_.uniform(-jitter, jitter);
    pv.is_cv = cfg_.cv_penetration >= 1.0 || driver_rng_.bernoulli(cfg_.cv_penetration);
    pv.compliant = cfg_.compliance_rate >= 1.0 || driver_rng_.bernoulli(cfg_.compliance_rate);
    entry_queue_.push_back(pv);
    ++injected_;
    next_arrival_s_ +=
        cfg_.deterministic_headway ? mean_headway : demand_rng_.exponential(mean_headway);
  }
}

void World::admit_queued() {
  std::vector<bool> admitted(cfg_.geometry.lane_count, false);
  while (!entry_queue_.empty()) {
    const PendingVehicle& pv = entry_queue_.front();
    std::vector<int> feasible;
    std::vector<double> entry_speed;
    for (int l = 0; l < cfg_.geometry.lane_count; ++l) {
      if (admitted[l]) continue;
      if (pv.compliant && inside_closed_stretch(0.0, l)) continue;
      double ve = pv.desired_speed_mps;
      if (!lanes_[l].empty()) {
        const Vehicle& lead = lanes_[l].front();
        const double gap = lead.position_m - lead.length_m;
        ve = std::min(ve, std::max(0.0, gap - cfg_.idm.standstill_gap_m) / cfg_.idm.time_headway_s);
        ve = std::min(ve, lead.speed_mps + 5.0);
      }
      if (ve >= kMinEntrySpeedMps) {
        feasible.push_back(l);
        entry_speed.push_back(ve);
      }
    }
    if (feasible.empty()) break;
    const std::size_t pick = demand_rng_.uniform_int(feasible.size());
    const int lane = feasible[pick];
    Vehicle v;
    v.id = next_vehicle_id_++;
    v.lane = lane;
    v.position_m = 0.0;
    v.speed_mps = entry_speed[pick];
    v.desired_speed_mps = pv.desired_speed_mps;
    v.is_cv = pv.is_cv;
    v.compliant = pv.compliant;
    lanes_[lane].insert(lanes_[lane].begin(), v);
    admitted[lane] = true;
    entry_queue_.pop_front();
    if (log_.enabled()) {
      log_.write({{"type", "entry"}, {"t", clock_s_}, {"veh", v.id}, {"lane", lane}});
    }
  }
}

bool World::try_lane_change(Vehicle& veh, int target, bool mandatory) {
  if (target < 0 || target >= cfg_.geometry.lane_count || target == veh.lane) return false;
  const LaneChangeParams& lc = cfg_.lane_change;
  const Vehicle* new_lead = leader_in_lane(target, veh.position_m, &veh);
  const Vehicle* new_foll = follower_in_lane(target, veh.position_m, &veh);

  const double lead_gap =
      new_lead ? new_lead->position_m - new_lead->length_m - veh.position_m : kInf;
  const double foll_gap =
      new_foll ? veh.position_m - veh.length_m - new_foll->position_m : kInf;
  double min_gap = lc.min_gap_m;
  if (mandatory && veh.speed_mps < 3.0) min_gap *= 0.5;
  if (lead_gap < min_gap || foll_gap < min_gap) return false;

  const double b_safe =
      mandatory ? lc.safe_decel_mandatory_mps2 : lc.safe_decel_discretionary_mps2;
  double foll_acc_new = 0.0;
  if (new_foll) {
    foll_acc_new = idm_accel(cfg_.idm, new_foll->speed_mps, new_foll->desired_speed_mps,
                             foll_gap, veh.speed_mps);
    if (foll_acc_new < -b_safe) return false;
  }

  if (!mandatory) {
    const double acc_old = effective_accel(veh.lane, veh.position_m, veh.speed_mps,
                                           veh.desired_speed_mps, veh.compliant, &veh);
    const double acc_new = effective_accel(target, veh.position_m, veh.speed_mps,
                                           veh.desired_speed_mps, veh.compliant, &veh);
    double foll_acc_old = 0.0;
    if (new_foll) {
      foll_acc_old = effective_accel(target, new_foll->position_m, new_foll->speed_mps,
                                     new_foll->desired_speed_mps, new_foll->compliant, new_foll);
    }
    const double incentive = (acc_new - acc_old) + lc.politeness * (foll_acc_new - foll_acc_old);
    if (incentive <= lc.incentive_threshold_mps2) return false;
  }

  do_lane_change(veh, veh.lane, target);
  return true;
}

void World::do_lane_change(Vehicle& veh, int from, int to) {
  Vehicle moved = veh;
  moved.lane = to;
  moved.pending_merge.reset();
  moved.last_lane_change_s = clock_s_;
  auto& src = lanes_[from];
  src.erase(src.begin() + (&veh - src.data()));
  auto& dst = lanes_[to];
  auto it = std::lower_bound(dst.begin(), dst.end(), moved.position_m, pos_less);
  dst.insert(it, moved);
}

void World::resolve_lane_changes() {
  const LaneChangeParams& lc = cfg_.lane_change;
  for (int l = 0; l < cfg_.geometry.lane_count; ++l) {
    // front to back; index shifts only affect vehicles behind the cursor
    for (int i = static_cast<int>(lanes_[l].size()) - 1; i >= 0; --i) {
      if (i >= static_cast<int>(lanes_[l].size())) continue;
      Vehicle& veh = lanes_[l][i];
      if (veh.last_lane_change_s == clock_s_) continue;  // already moved this step

      bool mandatory = false;
      if (veh.compliant) {
        mandatory = inside_closed_stretch(veh.position_m, veh.lane) ||
                    restricting_gantry_ahead(veh.position_m, veh.lane) >= 0;
      }
      if (mandatory) {
        std::vector<int> targets;
        for (int t : {veh.lane + 1, veh.lane - 1}) {
          if (t < 0 || t >= cfg_.geometry.lane_count) continue;
          if (!lane_enterable(t, veh.position_m)) continue;
          targets.push_back(t);
        }
        // prefer the target with more room to drive
        std::stable_sort(targets.begin(), targets.end(), [&](int a, int b) {
          const double aa = effective_accel(a, veh.position_m, veh.speed_mps,
                                            veh.desired_speed_mps, veh.compliant, &veh);
          const double ab = effective_accel(b, veh.position_m, veh.speed_mps,
                                            veh.desired_speed_mps, veh.compliant, &veh);
          return aa > ab;
        });
        veh.pending_merge = targets.empty() ? std::optional<int>{} : std::optional<int>{targets[0]};
        bool changed = false;
        for (int t : targets) {
          if (try_lane_change(veh, t, /*mandatory=*/true)) {
            changed = true;
            break;
          }
        }
        if (changed) continue;
      } else {
        veh.pending_merge.reset();
        if (clock_s_ - veh.last_lane_change_s < lc.cooldown_s) continue;
        for (int t : {veh.lane + 1, veh.lane - 1}) {
          if (t < 0 || t >= cfg_.geometry.lane_count) continue;
          if (veh.compliant && !lane_enterable(t, veh.position_m)) continue;
          if (veh.compliant && restricting_gantry_ahead(veh.position_m, t) >= 0) continue;
          if (try_lane_change(veh, t, /*mandatory=*/false)) break;
        }
      }
    }
  }
}

void World::integrate() {
  const double dt = cfg_.dt_s;
  const auto block = blockage_position_m();

  for (int l = 0; l < cfg_.geometry.lane_count; ++l) {
    auto& ln = lanes_[l];
    const std::size_t n = ln.size();
    std::vector<double> prev_pos(n);
    std::vector<double> accel(n);
    std::vector<double> hard_limit(n, kInf);

    for (std::size_t i = 0; i < n; ++i) {
      Vehicle& v = ln[i];
      prev_pos[i] = v.position_m;
      accel[i] = effective_accel(l, v.position_m, v.speed_mps, v.desired_speed_mps,
                                 v.compliant, &v);
      if (block && l == incident_->lane && *block >= v.position_m)
        hard_limit[i] = std::min(hard_limit[i], *block - 0.5);
      if (v.compliant) {
        const int g = restricting_gantry_ahead(v.position_m, l);
        if (g >= 0)
          hard_limit[i] = std::min(hard_limit[i], cfg_.geometry.gantry_position_m(g) - 0.3);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vehicle& v = ln[i];
      const double v_new = std::max(0.0, v.speed_mps + accel[i] * dt);
      double p_new = v.position_m + 0.5 * (v.speed_mps + v_new) * dt;
      v.accel_mps2 = (v_new - v.speed_mps) / dt;
      v.speed_mps = v_new;
      if (p_new > hard_limit[i]) {
        p_new = hard_limit[i];
        v.speed_mps = 0.0;
      }
      v.position_m = p_new;
    }
    // no-overlap clamp, front to back
    for (int i = static_cast<int>(n) - 2; i >= 0; --i) {
      const Vehicle& lead = ln[i + 1];
      const double max_pos = lead.position_m - lead.length_m - kOverlapClampGapM;
      if (ln[i].position_m > max_pos) {
        ln[i].position_m = std::max(prev_pos[i], max_pos);
        ln[i].speed_mps = std::min(ln[i].speed_mps, lead.speed_mps);
      }
    }
    // detector crossings, evaluated on final positions
    for (int st = 0; st < cfg_.geometry.gantry_count(); ++st) {
      const double dp = cfg_.geometry.detector_position_m(st);
      for (std::size_t i = 0; i < n; ++i) {
        if (prev_pos[i] < dp && ln[i].position_m >= dp) {
          crossing_count_[st][l] += 1;
          crossing_speed_sum_mph_[st][l] += mps_to_mph(ln[i].speed_mps);
        }
      }
    }
  }
}

void World::remove_exited() {
  const double len = cfg_.geometry.length_m();
  for (auto& ln : lanes_) {
    while (!ln.empty() && ln.back().position_m >= len) {
      if (log_.enabled()) {
        log_.write({{"type", "exit"}, {"t", clock_s_}, {"veh", ln.back().id}});
      }
      ln.pop_back();
      ++exited_;
    }
  }
}

void World::step() {
  spawn_arrivals();
  admit_queued();
  resolve_lane_changes();
  integrate();
  clock_s_ += cfg_.dt_s;
  remove_exited();
}

std::vector<DetectorSample> World::take_interval_samples(int interval) {
  std::vector<DetectorSample> out;
  for (int st = 0; st < cfg_.geometry.gantry_count(); ++st) {
    for (int l = 0; l < cfg_.geometry.lane_count; ++l) {
      DetectorSample s;
      s.station = st;
      s.lane = l;
      s.interval = interval;
      const int q = crossing_count_[st][l];
      if (q > 0) {
        s.q = q;
        s.u_mph = crossing_speed_sum_mph_[st][l] / q;
      } else {
        const double dp = cfg_.geometry.detector_position_m(st);
        bool stopped = false;
        for (const Vehicle& v : lanes_[l]) {
          if (std::abs(v.position_m - dp) <= cfg_.detector_zone_halfwidth_m &&
              v.speed_mps < cfg_.stopped_speed_threshold_mps) {
            stopped = true;
            break;
          }
        }
        if (stopped) {
          s.q = 0;
          s.u_mph = 0.0;
        }  // else: empty sample
      }
      crossing_count_[st][l] = 0;
      crossing_speed_sum_mph_[st][l] = 0.0;
      out.push_back(s);
    }
  }
  return out;
}

std::vector<CVReport> World::collect_cv_reports() const {
  std::vector<CVReport> out;
  for (const auto& ln : lanes_) {
    for (const Vehicle& v : ln) {
      if (!v.is_cv) continue;
      out.push_back({v.id, v.lane, v.position_m, v.speed_mps, clock_s_});
    }
  }
  return out;
}

std::int64_t World::vehicles_present() const {
  std::int64_t n = 0;
  for (const auto& ln : lanes_) n += static_cast<std::int64_t>(ln.size());
  return n;
}

void World::speed_snapshot(double& sum_mph, long& count) const {
  for (const auto& ln : lanes_) {
    for (const Vehicle& v : ln) {
      sum_mph += mps_to_mph(v.speed_mps);
      ++count;
    }
  }
}

double mean_network_speed(const std::vector<IntervalSpeedStat>& trace) {
  double sum = 0.0;
  int intervals = 0;
  for (const auto& s : trace) {
    if (s.vehicle_steps > 0) {
      sum += s.speed_sum_mph / static_cast<double>(s.vehicle_steps);
      ++intervals;
    }
  }
  if (intervals == 0) throw std::runtime_error("no measurement intervals");
  return sum / intervals;
}

}  // namespace atmsim
