#pragma once

// Event-driven detection and coverage times, Monte Carlo survival curves and
// the constants of the exponential tail bounds.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "srw/config.hpp"
#include "srw/errors.hpp"
#include "srw/geometry.hpp"
#include "srw/mobility.hpp"
#include "srw/parallel.hpp"
#include "srw/random.hpp"
#include "srw/sampling.hpp"
#include "srw/stats.hpp"

namespace srw {

/// Throws TargetOutsideErodedDomain unless w lies in dom eroded by rho.
inline void check_target(const RectDomain& dom, Point2 w, double rho) {
  bool inside = false;
  try {
    inside = erode(dom, rho).contains(w);
  } catch (const EmptyErosion&) {
  }
  if (!inside) throw TargetOutsideErodedDomain("target closer than rho to the domain boundary");
}

/// First time any walker comes within rho of the fixed target w, or nothing if
/// that happens after t_max.
inline std::optional<double> detect_static(std::span<const WalkerTrajectory> walkers, Point2 w, double rho,
                                           double t_max, const RectDomain& dom = {}) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& traj : walkers) {
    for (const Segment& leg : traj.legs) {
      if (leg.t_start > t_max || leg.t_start >= best) break;
      const Approach a = min_distance_point_segment(leg, w, dom);
      if (a.distance > rho) continue;
      const auto hit = first_contact_point(leg, w, rho, dom);
      best = std::min(best, hit.value_or(a.time));
      break;
    }
  }
  if (best > t_max) return std::nullopt;
  return best;
}

namespace detail {

inline bool boxes_within(const Segment& a, const Segment& b, double rho) {
  const auto [ax0, ax1] = std::minmax(a.start.x, a.end.x);
  const auto [ay0, ay1] = std::minmax(a.start.y, a.end.y);
  const auto [bx0, bx1] = std::minmax(b.start.x, b.end.x);
  const auto [by0, by1] = std::minmax(b.start.y, b.end.y);
  const double dx = std::max({0.0, bx0 - ax1, ax0 - bx1});
  const double dy = std::max({0.0, by0 - ay1, ay0 - by1});
  return dx * dx + dy * dy <= rho * rho;
}

}  // namespace detail

/// First time the moving walker `extra` comes within rho of any walker.
/// Legs are paired by a merge over time; pairs whose bounding boxes are more
/// than rho apart are skipped before solving the contact quadratic.
inline std::optional<double> detect_mobile(std::span<const WalkerTrajectory> walkers, const WalkerTrajectory& extra,
                                           double rho, double t_max, const RectDomain& dom = {}) {
  double best = std::numeric_limits<double>::infinity();
  const auto& xs = extra.legs;
  for (const auto& traj : walkers) {
    const auto& ws = traj.legs;
    std::size_t i = 0, j = 0;
    while (i < ws.size() && j < xs.size()) {
      const Segment& a = ws[i];
      const Segment& b = xs[j];
      const double t0 = std::max(a.t_start, b.t_start);
      if (t0 > t_max || t0 >= best) break;
      if (std::min(a.t_end, b.t_end) >= t0) {
        if (dom.is_torus() || detail::boxes_within(a, b, rho)) {
          if (const auto t = first_contact_two_moving(a, b, rho, dom)) {
            best = std::min(best, *t);
            break;
          }
        }
      }
      if (a.t_end < b.t_end) ++i;
      else ++j;
    }
  }
  if (best > t_max) return std::nullopt;
  return best;
}

struct CoverageResult {
  /// Time every cover center has been hit; nothing if some center is missed by t_max.
  std::optional<double> time;
  std::vector<Point2> centers;
  std::vector<std::optional<double>> hits;
};

/// Coverage time of region: the region is covered by eps-balls and each ball
/// counts as discovered once a walker enters B(center, r - eps).
inline CoverageResult coverage_time(std::span<const WalkerTrajectory> walkers, const RectDomain& region, double r,
                                    double eps, double t_max, const RectDomain& dom = {}) {
  if (!(eps > 0.0 && eps < r)) throw EpsNotLessThanR("coverage needs 0 < eps < r");
  const double rho = r - eps;
  CoverageResult out;
  out.centers = cover_with_balls(region, eps);
  const std::size_t n = out.centers.size();
  std::vector<double> hit(n, std::numeric_limits<double>::infinity());

  if (dom.is_torus()) {
    for (std::size_t k = 0; k < n; ++k)
      if (const auto t = detect_static(walkers, out.centers[k], rho, t_max, dom)) hit[k] = *t;
  } else {
    // Centers form a regular grid, so the candidates for one leg are an index box.
    const double spacing = eps * std::sqrt(2.0);
    const auto cells = [&](double len) {
      return std::max<long>(1, static_cast<long>(std::ceil(len / spacing - 1e-12)));
    };
    const long nx = cells(region.width), ny = cells(region.height);
    const double cx = region.width / static_cast<double>(nx);
    const double cy = region.height / static_cast<double>(ny);
    const auto index_range = [](double lo, double hi, double origin, double step, long count) {
      if (step == 0.0) return std::pair<long, long>{lo <= origin && origin <= hi ? 0 : 1, 0};
      const long a = std::max<long>(0, static_cast<long>(std::ceil((lo - origin) / step - 0.5)));
      const long b = std::min<long>(count - 1, static_cast<long>(std::floor((hi - origin) / step - 0.5)));
      return std::pair<long, long>{a, b};
    };
    for (const auto& traj : walkers) {
      for (const Segment& leg : traj.legs) {
        if (leg.t_start > t_max) break;
        const auto [x0, x1] = std::minmax(leg.start.x, leg.end.x);
        const auto [y0, y1] = std::minmax(leg.start.y, leg.end.y);
        const auto [ia, ib] = index_range(x0 - rho, x1 + rho, region.x0, cx, nx);
        const auto [ja, jb] = index_range(y0 - rho, y1 + rho, region.y0, cy, ny);
        for (long j = ja; j <= jb; ++j) {
          for (long i = ia; i <= ib; ++i) {
            const std::size_t k = static_cast<std::size_t>(j * nx + i);
            if (leg.t_start >= hit[k]) continue;
            if (const auto t = first_contact_point(leg, out.centers[k], rho)) hit[k] = std::min(hit[k], *t);
          }
        }
      }
    }
  }

  out.hits.resize(n);
  double worst = 0.0;
  bool all = true;
  for (std::size_t k = 0; k < n; ++k) {
    if (hit[k] <= t_max) {
      out.hits[k] = hit[k];
      worst = std::max(worst, hit[k]);
    } else {
      all = false;
    }
  }
  if (all) out.time = worst;
  return out;
}

// ---------------------------------------------------------------------------

struct SurvivalCurve {
  std::vector<double> t_grid;
  std::vector<double> survival;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  /// Survivor counts behind each point estimate.
  std::vector<long> survivors;
  long reps = 0;
  double censored_frac = 0.0;
  /// Optional c1 * exp(-c2 t) overlay; empty when not applicable.
  std::vector<double> bound;
};

inline std::vector<double> make_grid(double t_max, double step) {
  std::vector<double> g;
  const long n = static_cast<long>(std::floor(t_max / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(static_cast<double>(i) * step);
  return g;
}

/// Empirical P(T > t) with Wilson 95% bands. Censored samples (nothing) count
/// as survivors at every grid point.
inline SurvivalCurve survival_from_samples(std::span<const std::optional<double>> samples,
                                           std::span<const double> t_grid) {
  SurvivalCurve c;
  c.t_grid.assign(t_grid.begin(), t_grid.end());
  c.reps = static_cast<long>(samples.size());
  long censored = 0;
  std::vector<double> times;
  for (const auto& s : samples) {
    if (s) times.push_back(*s);
    else ++censored;
  }
  std::sort(times.begin(), times.end());
  c.censored_frac = c.reps ? static_cast<double>(censored) / static_cast<double>(c.reps) : 0.0;
  for (const double t : t_grid) {
    const long above = static_cast<long>(times.end() - std::upper_bound(times.begin(), times.end(), t));
    const long k = above + censored;
    const auto [lo, hi] = wilson_interval(k, c.reps);
    c.survivors.push_back(k);
    c.survival.push_back(c.reps ? static_cast<double>(k) / static_cast<double>(c.reps) : 1.0);
    c.ci_lo.push_back(lo);
    c.ci_hi.push_back(hi);
  }
  return c;
}

/// Runs `sampler` once per replication on stream (seed, rep); output order is
/// the replication order whatever the worker count.
inline std::vector<std::optional<double>> run_replications(
    const std::function<std::optional<double>(RngStream&)>& sampler, long reps, std::uint64_t seed,
    unsigned workers = worker_count()) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(reps));
  parallel_for(
      out.size(),
      [&](std::size_t i) {
        RngStream rng(seed, i);
        out[i] = sampler(rng);
      },
      workers);
  return out;
}

inline SurvivalCurve estimate_survival(const std::function<std::optional<double>(RngStream&)>& sampler, long reps,
                                       std::span<const double> t_grid, std::uint64_t seed,
                                       unsigned workers = worker_count()) {
  const auto samples = run_replications(sampler, reps, seed, workers);
  return survival_from_samples(samples, t_grid);
}

/// Least-squares slope of log survival against t, from the first grid point
/// below 1 up to the last point with at least min_survivors survivors.
inline std::optional<double> fit_log_survival_slope(const SurvivalCurve& c, long min_survivors = 10,
                                                    double t_from = 0.0) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
    if (c.t_grid[i] < t_from || c.survivors[i] < min_survivors) continue;
    if (c.survival[i] >= 1.0 && xs.empty()) continue;
    xs.push_back(c.t_grid[i]);
    ys.push_back(std::log(c.survival[i]));
  }
  const auto fit = linear_fit(xs, ys);
  if (!fit) return std::nullopt;
  return fit->slope;
}

// ---------------------------------------------------------------------------

struct BoundConstants {
  /// Prefactor with the home-vacancy probability exp(-4 pi lambda r^2).
  double c1 = 0.0;
  /// Decay rate of the static detection and coverage bounds.
  double c2 = 0.0;
  double q = 0.0;
  double q_star = 0.0;
  double q_star_se = 0.0;
  /// Prefactor with the exponent e^{+lambda pi r^2} exactly as printed.
  double c1_as_printed = 0.0;
  /// Decay rate of the mobile detection bound.
  double c_mobile = 0.0;
  /// Long-run fraction of time a walker spends within r of its home.
  double p_home = 0.0;
};

/// Mass of B(target, 2r) under the waypoint law of a walker homed at target.
/// Home-centered measures are largest there, so this is the max over homes.
inline double max_ball_mass(const MobilityConfig& cfg, Point2 target, double radius) {
  if (cfg.variant.kind == ModelVariant::Kind::interpolation) {
    const double near = measure_mass_on_ball(BallUniform{cfg.variant.R}, target, target, radius, cfg.domain);
    const double far = measure_mass_on_ball(AnnulusUniform{cfg.variant.R}, target, target, radius, cfg.domain);
    return (1.0 - cfg.variant.p) * near + cfg.variant.p * far;
  }
  return measure_mass_on_ball(cfg.waypoint, target, target, radius, cfg.domain);
}

/// Constants of the static and mobile detection tail bounds for a homogeneous
/// config. q_star is the Monte Carlo frequency of a fresh walker finishing its
/// first leg before a freshly drawn alarm; p_home integrates occupation of
/// B(home, r) exactly along long simulated paths.
inline BoundConstants compute_bound_constants(const MobilityConfig& cfg, Point2 target, long mc_reps,
                                              std::uint64_t seed, unsigned workers = worker_count()) {
  using std::numbers::pi;
  BoundConstants b;
  b.q = max_ball_mass(cfg, target, 2.0 * cfg.r);

  const bool has_alarm = cfg.variant.kind == ModelVariant::Kind::srw_carryover ||
                         cfg.variant.kind == ModelVariant::Kind::srw_reset;
  if (!has_alarm) {
    b.q_star = 1.0;
  } else {
    constexpr std::size_t kChunks = 64;
    std::vector<long> hits(kChunks, 0), tries(kChunks, 0);
    parallel_for(
        kChunks,
        [&](std::size_t c) {
          RngStream rng(seed, 0x51A7000000000000ULL + c);
          for (long i = static_cast<long>(c); i < mc_reps; i += static_cast<long>(kChunks)) {
            const Point2 home = sample_uniform(cfg.domain, rng);
            const WalkerState s = init_walker(home, cfg, rng);
            const double z = sample_alarm(cfg.alarm, rng);
            hits[c] += s.leg_duration() < z ? 1 : 0;
            ++tries[c];
          }
        },
        workers);
    const double h = static_cast<double>(std::accumulate(hits.begin(), hits.end(), 0L));
    const double n = static_cast<double>(std::accumulate(tries.begin(), tries.end(), 0L));
    b.q_star = h / n;
    b.q_star_se = std::sqrt(b.q_star * (1.0 - b.q_star) / n);
  }

  const double rate = cfg.vmin() / cfg.diameter();
  b.c2 = -rate * std::max(std::log1p(-b.q_star), std::log1p(-b.q));
  const double vacancy = std::exp(-4.0 * pi * cfg.lambda * cfg.r * cfg.r);
  b.c1 = std::max(1.0 - vacancy, vacancy) / (1.0 - b.q);
  const double printed = std::exp(cfg.lambda * pi * cfg.r * cfg.r);
  b.c1_as_printed = std::max(1.0 - printed, printed) / (1.0 - b.q);

  {
    constexpr std::size_t kWalkers = 256;
    const double horizon = 200.0 * cfg.diameter() / cfg.vmin();
    std::vector<double> frac(kWalkers, 0.0);
    parallel_for(
        kWalkers,
        [&](std::size_t i) {
          RngStream rng(seed, 0xB0DE000000000000ULL + i);
          const Point2 home = sample_uniform(cfg.domain, rng);
          const WalkerTrajectory traj = simulate_walker(home, cfg, rng, horizon);
          double inside = 0.0;
          for (const Segment& leg : traj.legs) {
            if (leg.t_start >= horizon) break;
            Segment clipped = leg;
            if (leg.t_end > horizon) {
              clipped.end = leg.position(horizon);
              clipped.t_end = horizon;
            }
            inside += time_within_disk(clipped, home, cfg.r);
          }
          frac[i] = inside / horizon;
        },
        workers);
    b.p_home = mean(frac);
  }
  b.c_mobile = cfg.lambda * cfg.vmin() * b.p_home / cfg.diameter();

  if (b.q >= 1.0) throw DegenerateBound("q >= 1: waypoint mass concentrated on the target ball");
  if (!(b.c2 > 0.0) || !std::isfinite(b.c2)) throw DegenerateBound("decay rate c2 is not positive and finite");
  return b;
}

/// c1 * exp(-c2 t) on the grid.
inline std::vector<double> exponential_bound(std::span<const double> t_grid, double c1, double c2) {
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (const double t : t_grid) out.push_back(c1 * std::exp(-c2 * t));
  return out;
}

}  // namespace srw
