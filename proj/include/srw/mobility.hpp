#pragma once

// Sedentary random waypoint chain and the append-only trajectory log built
// from it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "srw/config.hpp"
#include "srw/errors.hpp"
#include "srw/geometry.hpp"
#include "srw/random.hpp"
#include "srw/sampling.hpp"

namespace srw {

/// Chain state while walking the current leg prev_wp -> next_wp.
struct WalkerState {
  Point2 home;
  Point2 prev_wp;
  Point2 next_wp;
  double speed = 1.0;
  /// Remaining alarm time R_n; +inf when the variant has no alarm.
  double alarm_rem = std::numeric_limits<double>::infinity();
  double leg_start = 0.0;
  long leg_count = 0;
  /// The current leg is a forced return home.
  bool going_home = false;

  double leg_duration() const { return norm(next_wp - prev_wp) / speed; }
  double leg_end() const { return leg_start + leg_duration(); }

  friend bool operator==(const WalkerState&, const WalkerState&) = default;
};

struct WalkerTrajectory {
  Point2 home;
  std::vector<Segment> legs;
  /// T_n for each stored leg (its arrival time).
  std::vector<double> waypoint_times;
  /// Leg ends with a forced homecoming.
  std::vector<char> home_arrival;
  /// Legs discarded by prune_before; waypoint indices stay absolute.
  std::size_t dropped = 0;

  double horizon() const { return legs.empty() ? 0.0 : legs.back().t_end; }
  /// Absolute number of legs generated so far.
  std::size_t leg_total() const { return dropped + legs.size(); }
};

namespace detail {

inline Point2 draw_destination(Point2 home, const MobilityConfig& cfg, RngStream& rng) {
  if (cfg.variant.kind == ModelVariant::Kind::interpolation) {
    if (rng.bernoulli(cfg.variant.p)) return sample_waypoint(AnnulusUniform{cfg.variant.R}, home, cfg.domain, rng);
    return sample_waypoint(BallUniform{cfg.variant.R}, home, cfg.domain, rng);
  }
  return sample_waypoint(cfg.waypoint, home, cfg.domain, rng);
}

}  // namespace detail

/// Default initialization: the walker starts at home at t = 0.
inline WalkerState init_walker(Point2 home, const MobilityConfig& cfg, RngStream& rng) {
  WalkerState s;
  s.home = home;
  s.prev_wp = home;
  s.next_wp = detail::draw_destination(home, cfg, rng);
  s.speed = sample_velocity(cfg.velocity, rng);
  s.leg_start = 0.0;
  s.leg_count = 1;
  switch (cfg.variant.kind) {
    case ModelVariant::Kind::srw_carryover:
      s.alarm_rem = sample_alarm(cfg.alarm, rng) + s.leg_duration();
      break;
    case ModelVariant::Kind::srw_reset:
      s.alarm_rem = sample_alarm(cfg.alarm, rng);
      break;
    default:
      s.alarm_rem = std::numeric_limits<double>::infinity();
  }
  return s;
}

/// One transition of the chain: the state for the leg after the current one.
inline WalkerState next_leg(const WalkerState& cur, const MobilityConfig& cfg, RngStream& rng) {
  const double elapsed = cur.leg_duration();
  WalkerState s;
  s.home = cur.home;
  s.prev_wp = cur.next_wp;
  s.leg_start = cur.leg_start + elapsed;
  s.leg_count = cur.leg_count + 1;

  using K = ModelVariant::Kind;
  switch (cfg.variant.kind) {
    case K::srw_carryover: {
      const double rem = cur.alarm_rem - elapsed;
      if (rem > 0.0) {
        s.next_wp = detail::draw_destination(s.home, cfg, rng);
        s.speed = sample_velocity(cfg.velocity, rng);
        s.alarm_rem = rem;
        return s;
      }
      // Alarm rang: head home and re-arm. Already home means a zero-length
      // return, so the walker leaves again immediately.
      const bool at_home = s.prev_wp == s.home;
      s.next_wp = at_home ? detail::draw_destination(s.home, cfg, rng) : s.home;
      s.speed = sample_velocity(cfg.velocity, rng);
      s.alarm_rem = sample_alarm(cfg.alarm, rng) + s.leg_duration();
      s.going_home = !at_home;
      return s;
    }
    case K::srw_reset: {
      const bool home_next = cur.alarm_rem <= elapsed && s.prev_wp != s.home;
      s.next_wp = home_next ? s.home : detail::draw_destination(s.home, cfg, rng);
      s.speed = sample_velocity(cfg.velocity, rng);
      s.alarm_rem = sample_alarm(cfg.alarm, rng);
      s.going_home = home_next;
      return s;
    }
    case K::interpolation:
    case K::classical_rwp:
      s.next_wp = detail::draw_destination(s.home, cfg, rng);
      s.speed = sample_velocity(cfg.velocity, rng);
      s.alarm_rem = std::numeric_limits<double>::infinity();
      return s;
  }
  return s;
}

inline void append_leg(WalkerTrajectory& traj, const WalkerState& s) {
  const double t_end = s.leg_end();
  traj.legs.push_back(Segment{s.prev_wp, s.next_wp, s.leg_start, t_end, s.speed});
  traj.waypoint_times.push_back(t_end);
  traj.home_arrival.push_back(s.going_home ? 1 : 0);
}

inline WalkerTrajectory start_trajectory(const WalkerState& first) {
  WalkerTrajectory traj;
  traj.home = first.home;
  append_leg(traj, first);
  return traj;
}

/// Extends traj (whose last leg is `state`) until its horizon exceeds t_target.
inline void advance_to(WalkerTrajectory& traj, WalkerState& state, double t_target, const MobilityConfig& cfg,
                       RngStream& rng) {
  int stalled = 0;
  while (traj.horizon() <= t_target) {
    const double before = traj.horizon();
    state = next_leg(state, cfg, rng);
    append_leg(traj, state);
    stalled = traj.horizon() > before ? 0 : stalled + 1;
    if (stalled > 10000) throw StalledChain("waypoint chain makes no progress in time");
  }
}

/// A walker from home simulated until its horizon exceeds t_target.
inline WalkerTrajectory simulate_walker(Point2 home, const MobilityConfig& cfg, RngStream& rng, double t_target,
                                        WalkerState* final_state = nullptr) {
  WalkerState state = init_walker(home, cfg, rng);
  WalkerTrajectory traj = start_trajectory(state);
  advance_to(traj, state, t_target, cfg, rng);
  if (final_state) *final_state = state;
  return traj;
}

/// Position at time t by linear interpolation along the active leg.
inline Point2 position_at(const WalkerTrajectory& traj, double t) {
  if (traj.legs.empty() || t < traj.legs.front().t_start || t > traj.horizon() || std::isnan(t))
    throw HorizonExceeded("query time outside the simulated window");
  const auto it = std::lower_bound(traj.waypoint_times.begin(), traj.waypoint_times.end(), t);
  const Segment& leg = traj.legs[static_cast<std::size_t>(it - traj.waypoint_times.begin())];
  return leg.position(t);
}

/// M(t): number of waypoints reached by time t.
inline long waypoint_count(const WalkerTrajectory& traj, double t) {
  if (t > traj.horizon()) throw HorizonExceeded("waypoint count beyond the simulated window");
  const auto it = std::upper_bound(traj.waypoint_times.begin(), traj.waypoint_times.end(), t);
  return static_cast<long>(traj.dropped) + static_cast<long>(it - traj.waypoint_times.begin());
}

/// Guaranteed minimum of M(t): every leg lasts at most diam / v_minus.
inline long min_waypoint_count(double t, const MobilityConfig& cfg) {
  return static_cast<long>(std::floor(t * cfg.vmin() / cfg.diameter()));
}

inline std::vector<double> homecoming_times(const WalkerTrajectory& traj) {
  std::vector<double> out;
  for (std::size_t i = 0; i < traj.legs.size(); ++i)
    if (traj.home_arrival[i]) out.push_back(traj.waypoint_times[i]);
  return out;
}

/// Drops legs that ended before t. Position queries earlier than the first
/// kept leg then raise HorizonExceeded.
inline void prune_before(WalkerTrajectory& traj, double t) {
  std::size_t k = 0;
  while (k + 1 < traj.legs.size() && traj.legs[k].t_end < t) ++k;
  if (k == 0) return;
  traj.legs.erase(traj.legs.begin(), traj.legs.begin() + static_cast<long>(k));
  traj.waypoint_times.erase(traj.waypoint_times.begin(), traj.waypoint_times.begin() + static_cast<long>(k));
  traj.home_arrival.erase(traj.home_arrival.begin(), traj.home_arrival.begin() + static_cast<long>(k));
  traj.dropped += k;
}

/// W_n for n in [0, leg_total()]; W_0 is home.
inline Point2 waypoint(const WalkerTrajectory& traj, std::size_t n) {
  if (n == 0 && traj.dropped == 0) return traj.home;
  if (n <= traj.dropped || n > traj.leg_total()) throw HorizonExceeded("waypoint index outside the stored log");
  return traj.legs[n - traj.dropped - 1].end;
}

}  // namespace srw
