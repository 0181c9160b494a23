#pragma once

// Time-stationary position sampling, Palm-ratio occupation estimates and the
// polynomial stationary density of the classical random waypoint model.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "srw/config.hpp"
#include "srw/geometry.hpp"
#include "srw/mobility.hpp"
#include "srw/parallel.hpp"
#include "srw/random.hpp"
#include "srw/sampling.hpp"
#include "srw/stats.hpp"

namespace srw {

/// Offsets after burn-in spaced by diam / v_minus.
inline std::vector<double> default_sample_times(const MobilityConfig& cfg, int n) {
  const double gap = cfg.diameter() / cfg.vmin();
  std::vector<double> t(static_cast<std::size_t>(std::max(n, 0)));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = gap * static_cast<double>(i);
  return t;
}

/// Positions of n_walkers independent walkers at burn_in + each sample time.
/// Walker i uses stream (seed, i) with its home uniform in the domain.
/// Result is indexed [sample][walker].
inline std::vector<std::vector<Point2>> stationary_positions(const MobilityConfig& cfg, int n_walkers,
                                                             double burn_in, std::span<const double> sample_times,
                                                             std::uint64_t seed,
                                                             unsigned workers = worker_count()) {
  const std::size_t nw = static_cast<std::size_t>(std::max(n_walkers, 0));
  std::vector<std::vector<Point2>> snaps(sample_times.size(), std::vector<Point2>(nw));
  if (nw == 0 || sample_times.empty()) return snaps;
  parallel_for(
      nw,
      [&](std::size_t i) {
        RngStream rng(seed, i);
        const Point2 home = sample_uniform(cfg.domain, rng);
        WalkerState state = init_walker(home, cfg, rng);
        WalkerTrajectory traj = start_trajectory(state);
        // Sample times are visited in order so old legs can be dropped.
        std::vector<std::size_t> order(sample_times.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return sample_times[a] < sample_times[b]; });
        for (const std::size_t k : order) {
          const double t = burn_in + sample_times[k];
          advance_to(traj, state, t, cfg, rng);
          snaps[k][i] = position_at(traj, t);
          prune_before(traj, t);
        }
      },
      workers);
  return snaps;
}

/// Polynomial approximation 36/a^6 (x^2 - a x)(y^2 - a y) of the classical
/// random waypoint stationary density on [0, a]^2.
inline double rwp_density(double x, double y, double a) {
  const double a3 = a * a * a;
  return 36.0 / (a3 * a3) * (x * x - a * x) * (y * y - a * y);
}

class SpatialHistogram {
 public:
  SpatialHistogram(const RectDomain& dom, int nx, int ny)
      : dom_(dom), nx_(nx), ny_(ny), counts_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0) {}

  void add(Point2 p) {
    const int i = std::clamp(static_cast<int>(std::floor((p.x - dom_.x0) / dom_.width * nx_)), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y - dom_.y0) / dom_.height * ny_)), 0, ny_ - 1);
    ++counts_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)];
    ++total_;
  }
  void add(std::span<const Point2> ps) {
    for (const Point2 p : ps) add(p);
  }
  void merge(const SpatialHistogram& other) {
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
    total_ += other.total_;
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  long total() const { return total_; }
  long count(int i, int j) const {
    return counts_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)];
  }
  double bin_area() const { return dom_.area() / (static_cast<double>(nx_) * ny_); }
  RectDomain bin(int i, int j) const {
    const double w = dom_.width / nx_, h = dom_.height / ny_;
    return RectDomain{w, h, BoundaryMode::bounded, dom_.x0 + i * w, dom_.y0 + j * h};
  }
  const RectDomain& domain() const { return dom_; }

 private:
  RectDomain dom_;
  int nx_, ny_;
  std::vector<long> counts_;
  long total_ = 0;
};

/// Integral of f over box by a 4 x 4 midpoint rule.
inline double integrate_box(const std::function<double(double, double)>& f, const RectDomain& box) {
  constexpr int k = 4;
  const double hx = box.width / k, hy = box.height / k;
  double s = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) s += f(box.x0 + (i + 0.5) * hx, box.y0 + (j + 0.5) * hy);
  return s * hx * hy;
}

/// Total-variation distance between the histogram's empirical bin masses and
/// the bin masses of density f.
inline double density_distance(const SpatialHistogram& h, const std::function<double(double, double)>& f) {
  double tv = 0.0;
  const double total = static_cast<double>(h.total());
  for (int j = 0; j < h.ny(); ++j)
    for (int i = 0; i < h.nx(); ++i)
      tv += std::abs(static_cast<double>(h.count(i, j)) / total - integrate_box(f, h.bin(i, j)));
  return 0.5 * tv;
}

/// Rows `bin_x,bin_y,count,expected`, with expected = total * bin mass of f.
inline void write_histogram_csv(std::ostream& os, const SpatialHistogram& h,
                                const std::function<double(double, double)>& f) {
  os << "bin_x,bin_y,count,expected\n";
  char buf[64];
  for (int j = 0; j < h.ny(); ++j) {
    for (int i = 0; i < h.nx(); ++i) {
      std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(h.total()) * integrate_box(f, h.bin(i, j)));
      os << i << ',' << j << ',' << h.count(i, j) << ',' << buf << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Regions with exact (or finely resolved) occupation time along a leg.

struct RectRegion {
  RectDomain box;
  bool contains(Point2 p) const { return box.contains(p); }
  double occupation(const Segment& s) const { return time_within_rect(s, box); }
};

struct DiskRegion {
  Point2 center;
  double radius;
  bool contains(Point2 p) const { return norm(p - center) <= radius; }
  double occupation(const Segment& s) const { return time_within_disk(s, center, radius); }
};

/// Arbitrary indicator; occupation by a 256-step midpoint rule along the leg.
struct PredicateRegion {
  std::function<bool(Point2)> pred;
  bool contains(Point2 p) const { return pred(p); }
  double occupation(const Segment& s) const {
    constexpr int n = 256;
    const double dt = s.duration() / n;
    int in = 0;
    for (int k = 0; k < n; ++k) in += pred(s.position(s.t_start + (k + 0.5) * dt)) ? 1 : 0;
    return dt * in;
  }
};

template <class R>
concept Region = requires(const R& r, const Segment& s, Point2 p) {
  { r.occupation(s) } -> std::convertible_to<double>;
  { r.contains(p) } -> std::convertible_to<bool>;
};

namespace detail {

constexpr long kPalmBurnLegs = 100;
constexpr std::size_t kPalmChains = 64;

/// Runs min(n_trips, 64) chains, each discarding kPalmBurnLegs legs, and calls
/// visit(chain, leg) for the next trips of each chain.
template <class Visit>
void for_each_post_burn_leg(const MobilityConfig& cfg, long n_trips, std::uint64_t seed,
                            std::optional<Point2> home, unsigned workers, Visit&& visit) {
  const std::size_t chains = static_cast<std::size_t>(std::min<long>(std::max(n_trips, 1L), kPalmChains));
  parallel_for(
      chains,
      [&](std::size_t c) {
        RngStream rng(seed, c);
        const Point2 h = home ? *home : sample_uniform(cfg.domain, rng);
        WalkerState s = init_walker(h, cfg, rng);
        for (long k = 0; k < kPalmBurnLegs; ++k) s = next_leg(s, cfg, rng);
        const long mine = n_trips / static_cast<long>(chains) + (static_cast<long>(c) < n_trips % static_cast<long>(chains) ? 1 : 0);
        for (long k = 0; k < mine; ++k) {
          visit(c, Segment{s.prev_wp, s.next_wp, s.leg_start, s.leg_end(), s.speed});
          s = next_leg(s, cfg, rng);
        }
      },
      workers);
}

}  // namespace detail

/// Stationary probability of the region as the ratio of mean per-trip
/// occupation time to mean trip duration, over trips taken at transition
/// instants of burnt-in chains. The standard error treats chains as the
/// independent units (delta method for the ratio).
template <Region R>
Estimate palm_ratio_estimate(const MobilityConfig& cfg, const R& region, long n_trips, std::uint64_t seed,
                             std::optional<Point2> home = std::nullopt, unsigned workers = worker_count()) {
  const std::size_t chains = static_cast<std::size_t>(std::min<long>(std::max(n_trips, 1L), detail::kPalmChains));
  std::vector<double> occ(chains, 0.0), dur(chains, 0.0);
  detail::for_each_post_burn_leg(cfg, n_trips, seed, home, workers, [&](std::size_t c, const Segment& leg) {
    occ[c] += region.occupation(leg);
    dur[c] += leg.duration();
  });
  const double so = std::accumulate(occ.begin(), occ.end(), 0.0);
  const double sd = std::accumulate(dur.begin(), dur.end(), 0.0);
  if (sd <= 0.0) return {0.0, 0.0};
  const double ratio = so / sd;
  double se = 0.0;
  if (chains > 1) {
    const double k = static_cast<double>(chains);
    double ss = 0.0;
    for (std::size_t c = 0; c < chains; ++c) ss += (occ[c] - ratio * dur[c]) * (occ[c] - ratio * dur[c]);
    const double mean_dur = sd / k;
    se = std::sqrt(ss / (k * (k - 1.0))) / mean_dur;
  }
  return {ratio, se};
}

/// Mean trip duration E[S] over burnt-in chains; SE from the spread of
/// per-chain means.
inline Estimate mean_leg_duration(const MobilityConfig& cfg, long n_trips, std::uint64_t seed,
                                  std::optional<Point2> home = std::nullopt, unsigned workers = worker_count()) {
  const std::size_t chains = static_cast<std::size_t>(std::min<long>(std::max(n_trips, 1L), detail::kPalmChains));
  std::vector<double> sum(chains, 0.0);
  std::vector<long> cnt(chains, 0);
  detail::for_each_post_burn_leg(cfg, n_trips, seed, home, workers, [&](std::size_t c, const Segment& leg) {
    sum[c] += leg.duration();
    ++cnt[c];
  });
  const double total = std::accumulate(sum.begin(), sum.end(), 0.0);
  const double n = static_cast<double>(std::accumulate(cnt.begin(), cnt.end(), 0L));
  const double m = total / n;
  if (chains < 2) return {m, 0.0};
  // Chains carry (almost) equal trip counts, so a weighted spread of chain means.
  double ss = 0.0;
  for (std::size_t c = 0; c < chains; ++c) {
    const double w = static_cast<double>(cnt[c]);
    const double d = sum[c] / w - m;
    ss += w * w * d * d;
  }
  const double k = static_cast<double>(chains);
  return {m, std::sqrt(ss * k / (k - 1.0)) / n};
}

/// Long-run fraction of time in the region measured by stepping walkers on a
/// fixed time grid after burn-in; the SE comes from the spread over walkers.
template <Region R>
Estimate time_average_occupation(const MobilityConfig& cfg, const R& region, double horizon, int n_walkers,
                                 std::uint64_t seed, double dt, unsigned workers = worker_count()) {
  const std::size_t nw = static_cast<std::size_t>(std::max(n_walkers, 1));
  const double t0 = cfg.burn_in_time();
  const long steps = std::max(1L, static_cast<long>(horizon / dt));
  std::vector<double> frac(nw, 0.0);
  parallel_for(
      nw,
      [&](std::size_t i) {
        RngStream rng(seed, i);
        const Point2 home = sample_uniform(cfg.domain, rng);
        WalkerState state = init_walker(home, cfg, rng);
        WalkerTrajectory traj = start_trajectory(state);
        long in = 0;
        for (long k = 0; k < steps; ++k) {
          const double t = t0 + (static_cast<double>(k) + 0.5) * dt;
          advance_to(traj, state, t, cfg, rng);
          in += region.contains(position_at(traj, t)) ? 1 : 0;
          if (traj.legs.size() > 64) prune_before(traj, t);
        }
        frac[i] = static_cast<double>(in) / static_cast<double>(steps);
      },
      workers);
  return mean_with_se(frac);
}

}  // namespace srw
