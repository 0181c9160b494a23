#pragma once

// Gilbert graphs on point snapshots, clustering and crossing detection,
// critical-intensity estimation and the near-home thinning experiment of the
// interpolation model.

#include <algorithm>
#include <cmath>
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

/// Undirected geometric graph in compressed sparse row form.
struct GilbertGraph {
  std::vector<Point2> points;
  double connect_radius = 0.0;
  RectDomain domain;
  /// neighbors[offsets[i] .. offsets[i+1]) are the neighbors of i, ascending.
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> neighbors;

  std::size_t size() const { return points.size(); }
  std::size_t edge_count() const { return neighbors.size() / 2; }
  std::span<const std::size_t> adjacent(std::size_t i) const {
    return {neighbors.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

/// Exact neighbor lists by bucketing points into a grid of cells at least
/// connect_radius wide and scanning each cell's 3 x 3 block.
inline GilbertGraph build_graph(std::span<const Point2> points, double connect_radius, const RectDomain& dom) {
  GilbertGraph g;
  g.points.assign(points.begin(), points.end());
  g.connect_radius = connect_radius;
  g.domain = dom;
  const std::size_t n = points.size();
  g.offsets.assign(n + 1, 0);
  if (n == 0) return g;

  const int nx = std::max(1, static_cast<int>(std::floor(dom.width / connect_radius)));
  const int ny = std::max(1, static_cast<int>(std::floor(dom.height / connect_radius)));
  const auto cell_of = [&](Point2 p) {
    const int i = std::clamp(static_cast<int>(std::floor((p.x - dom.x0) / dom.width * nx)), 0, nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y - dom.y0) / dom.height * ny)), 0, ny - 1);
    return std::pair{i, j};
  };
  std::vector<std::size_t> start(static_cast<std::size_t>(nx) * ny + 1, 0), order(n);
  std::vector<std::size_t> cell_index(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [i, j] = cell_of(points[k]);
    cell_index[k] = static_cast<std::size_t>(j) * nx + i;
    ++start[cell_index[k] + 1];
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t k = 0; k < n; ++k) order[fill[cell_index[k]]++] = k;
  }

  std::vector<std::vector<std::size_t>> adj(n);
  const bool torus = dom.is_torus();
  const double r2 = connect_radius * connect_radius;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t here = static_cast<std::size_t>(j) * nx + i;
      std::vector<std::size_t> cells;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          int ci = i + di, cj = j + dj;
          if (torus) {
            ci = (ci + nx) % nx;
            cj = (cj + ny) % ny;
          } else if (ci < 0 || cj < 0 || ci >= nx || cj >= ny) {
            continue;
          }
          cells.push_back(static_cast<std::size_t>(cj) * nx + ci);
        }
      }
      std::sort(cells.begin(), cells.end());
      cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
      for (std::size_t a = start[here]; a < start[here + 1]; ++a) {
        const std::size_t p = order[a];
        for (const std::size_t c : cells) {
          for (std::size_t b = start[c]; b < start[c + 1]; ++b) {
            const std::size_t q = order[b];
            if (q <= p) continue;
            const double d2 = torus ? std::pow(distance(points[p], points[q], dom), 2) : norm2(points[p] - points[q]);
            if (d2 <= r2) {
              adj[p].push_back(q);
              adj[q].push_back(p);
            }
          }
        }
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::sort(adj[k].begin(), adj[k].end());
    g.offsets[k + 1] = g.offsets[k] + adj[k].size();
  }
  g.neighbors.reserve(g.offsets[n]);
  for (auto& a : adj) g.neighbors.insert(g.neighbors.end(), a.begin(), a.end());
  return g;
}

struct ClusterReport {
  /// Component id per point, numbered by first appearance.
  std::vector<std::size_t> component;
  std::vector<std::size_t> sizes;
  std::size_t largest = 0;
  bool crossing_lr = false;
  bool crossing_tb = false;
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent, rank;
  explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
  }
};

}  // namespace detail

/// Connected components; a component crosses left-right when it has points in
/// both vertical boundary strips of width connect_radius (top-bottom alike).
inline ClusterReport clusters(const GilbertGraph& g) {
  const std::size_t n = g.size();
  detail::UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const std::size_t j : g.adjacent(i))
      if (j > i) uf.unite(i, j);

  ClusterReport rep;
  rep.component.resize(n);
  std::vector<std::size_t> id_of_root(n, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = uf.find(i);
    if (id_of_root[root] == static_cast<std::size_t>(-1)) {
      id_of_root[root] = rep.sizes.size();
      rep.sizes.push_back(0);
    }
    rep.component[i] = id_of_root[root];
    ++rep.sizes[rep.component[i]];
  }
  if (!rep.sizes.empty()) rep.largest = *std::max_element(rep.sizes.begin(), rep.sizes.end());

  const RectDomain& d = g.domain;
  const double s = g.connect_radius;
  const std::size_t k = rep.sizes.size();
  std::vector<char> left(k, 0), right(k, 0), bottom(k, 0), top(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = g.points[i];
    const std::size_t c = rep.component[i];
    if (p.x <= d.x0 + s) left[c] = 1;
    if (p.x >= d.x1() - s) right[c] = 1;
    if (p.y <= d.y0 + s) bottom[c] = 1;
    if (p.y >= d.y1() - s) top[c] = 1;
  }
  for (std::size_t c = 0; c < k; ++c) {
    rep.crossing_lr = rep.crossing_lr || (left[c] && right[c]);
    rep.crossing_tb = rep.crossing_tb || (bottom[c] && top[c]);
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct CrossingRun {
  std::size_t points = 0;
  std::size_t largest = 0;
  bool crossing_lr = false;
  bool crossing_tb = false;
};

struct CrossingCurve {
  std::vector<double> lambda;
  /// Per-run details, indexed lambda_index * reps + replication.
  std::vector<CrossingRun> runs;
  std::vector<long> crossings;
  long reps = 0;
  std::optional<double> lambda_c;

  double probability(std::size_t i) const { return static_cast<double>(crossings[i]) / static_cast<double>(reps); }
};

/// Linear interpolation of the first upward passage of 1/2.
inline std::optional<double> interpolate_half(std::span<const double> x, std::span<const double> y) {
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (y[i] <= 0.5 && y[i + 1] >= 0.5 && y[i + 1] > y[i])
      return x[i] + (0.5 - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i]);
  }
  return std::nullopt;
}

/// Left-right crossing probability of a Poisson Gilbert graph on [0, a]^2 at
/// each intensity; lambda_c is where a logistic fit passes 1/2.
inline CrossingCurve estimate_lambda_c(double connect_radius, double a, std::span<const double> lambda_grid,
                                       long reps, std::uint64_t seed, unsigned workers = worker_count()) {
  CrossingCurve c;
  c.lambda.assign(lambda_grid.begin(), lambda_grid.end());
  c.reps = reps;
  const std::size_t m = lambda_grid.size();
  const std::size_t total = m * static_cast<std::size_t>(reps);
  c.runs.resize(total);
  const RectDomain dom{a, a};
  parallel_for(
      total,
      [&](std::size_t idx) {
        RngStream rng(seed, idx);
        const auto pts = sample_ppp(dom, lambda_grid[idx / static_cast<std::size_t>(reps)], rng);
        const auto rep = clusters(build_graph(pts, connect_radius, dom));
        c.runs[idx] = {pts.size(), rep.largest, rep.crossing_lr, rep.crossing_tb};
      },
      workers);
  c.crossings.assign(m, 0);
  for (std::size_t idx = 0; idx < total; ++idx)
    c.crossings[idx / static_cast<std::size_t>(reps)] += c.runs[idx].crossing_lr ? 1 : 0;

  std::vector<double> succ(m), trials(m, static_cast<double>(reps)), prob(m);
  for (std::size_t i = 0; i < m; ++i) {
    succ[i] = static_cast<double>(c.crossings[i]);
    prob[i] = c.probability(i);
  }
  c.lambda_c = logistic_midpoint(c.lambda, succ, trials);
  if (!c.lambda_c || *c.lambda_c < c.lambda.front() || *c.lambda_c > c.lambda.back())
    c.lambda_c = interpolate_half(c.lambda, isotonic_increasing(prob));
  return c;
}

// ---------------------------------------------------------------------------

/// Clock for the near-home test.
enum class ThinningClock {
  /// s indexes waypoints: keep iff W_{s-1} and W_s lie within R of home.
  chain_step,
  /// s is physical time: keep iff the positions at s - 1 and s lie within R of home.
  physical_time,
};

/// Position the walker contributes to the thinned process, or nothing.
inline std::optional<Point2> near_home_point(const WalkerTrajectory& traj, double s, double R,
                                             ThinningClock clock = ThinningClock::chain_step) {
  if (clock == ThinningClock::chain_step) {
    const auto n = static_cast<std::size_t>(std::llround(s));
    const Point2 a = waypoint(traj, n - 1), b = waypoint(traj, n);
    if (norm(a - traj.home) <= R && norm(b - traj.home) <= R) return b;
    return std::nullopt;
  }
  const Point2 a = position_at(traj, s - 1.0), b = position_at(traj, s);
  if (norm(a - traj.home) <= R && norm(b - traj.home) <= R) return b;
  return std::nullopt;
}

/// Walkers close to home at s and s - 1, reported at s.
inline std::vector<Point2> near_home_thinning(std::span<const WalkerTrajectory> walkers, double s, double R,
                                              ThinningClock clock = ThinningClock::chain_step) {
  if (clock == ThinningClock::chain_step && s < 1.0)
    throw HorizonExceeded("chain-step thinning needs s >= 1");
  std::vector<Point2> out;
  for (const auto& w : walkers)
    if (const auto p = near_home_point(w, s, R, clock)) out.push_back(*p);
  return out;
}

/// Border and center point intensities with Poisson standard errors.
struct BorderCenter {
  Estimate border;
  Estimate center;
};

/// Border = frame of width `stripe` along all four sides; center = square of
/// half-width core_half about the domain center. Snapshots are pooled.
inline BorderCenter border_center_densities(std::span<const std::vector<Point2>> snapshots, const RectDomain& dom,
                                            double stripe, double core_half) {
  long nb = 0, nc = 0;
  const Point2 mid = dom.center();
  for (const auto& snap : snapshots) {
    for (const Point2 p : snap) {
      if (p.x <= dom.x0 + stripe || p.x >= dom.x1() - stripe || p.y <= dom.y0 + stripe || p.y >= dom.y1() - stripe)
        ++nb;
      if (std::abs(p.x - mid.x) <= core_half && std::abs(p.y - mid.y) <= core_half) ++nc;
    }
  }
  const double k = static_cast<double>(snapshots.size());
  const double inner_w = std::max(0.0, dom.width - 2.0 * stripe), inner_h = std::max(0.0, dom.height - 2.0 * stripe);
  const double border_area = k * (dom.area() - inner_w * inner_h);
  const double center_area = k * 4.0 * core_half * core_half;
  const auto est = [](long n, double area) {
    return Estimate{static_cast<double>(n) / area, std::sqrt(static_cast<double>(std::max(n, 1L))) / area};
  };
  return {est(nb, border_area), est(nc, center_area)};
}

struct PhaseRow {
  long replication = 0;
  double p = 0.0;
  /// Homes generated.
  std::size_t walkers = 0;
  /// Thinned points and their graph; absent when the thinned radius underflows.
  std::size_t thinned_points = 0;
  std::size_t thinned_largest = 0;
  bool thinned_lr = false;
  bool thinned_tb = false;
  /// Full snapshot at burn-in time with connect radius 2r.
  std::size_t full_largest = 0;
  bool full_lr = false;
  bool full_tb = false;
};

struct PhaseResult {
  std::vector<PhaseRow> rows;
  /// Connect radius of the thinned graph, 2(r - R/2); nothing when r <= R/2.
  std::optional<double> thinned_radius;
  /// Full snapshots grouped per p (index of p_grid), pooled over replications.
  std::vector<std::vector<std::vector<Point2>>> snapshots;
  std::vector<double> p_grid;

  /// Retained fraction of walkers in the thinned process at p_grid[i], with SE
  /// from the replication spread.
  Estimate retained_fraction(std::size_t i) const;
  double thinned_crossing(std::size_t i) const;
  double full_crossing(std::size_t i) const;
};

inline Estimate PhaseResult::retained_fraction(std::size_t i) const {
  double kept = 0.0, total = 0.0;
  for (const auto& r : rows)
    if (r.p == p_grid[i]) {
      kept += static_cast<double>(r.thinned_points);
      total += static_cast<double>(r.walkers);
    }
  if (total == 0.0) return {0.0, 0.0};
  const double f = kept / total;
  return {f, std::sqrt(f * (1.0 - f) / total)};
}

inline double PhaseResult::thinned_crossing(std::size_t i) const {
  long hit = 0, n = 0;
  for (const auto& r : rows)
    if (r.p == p_grid[i]) {
      hit += r.thinned_lr ? 1 : 0;
      ++n;
    }
  return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
}

inline double PhaseResult::full_crossing(std::size_t i) const {
  long hit = 0, n = 0;
  for (const auto& r : rows)
    if (r.p == p_grid[i]) {
      hit += r.full_lr ? 1 : 0;
      ++n;
    }
  return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
}

/// For each p and replication: Poisson homes of intensity lambda, the
/// chain-step thinned process at s = 2 joined at radius 2(r - R/2), and the
/// full snapshot at the burn-in time joined at radius 2r.
inline PhaseResult phase_experiment(const MobilityConfig& base, std::span<const double> p_grid, long reps,
                                    std::uint64_t seed, bool keep_snapshots = false,
                                    unsigned workers = worker_count()) {
  if (base.variant.kind != ModelVariant::Kind::interpolation)
    throw ValidationError("variant.kind", "phase experiment needs the interpolation variant");
  PhaseResult res;
  res.p_grid.assign(p_grid.begin(), p_grid.end());
  const double thin_r = 2.0 * (base.r - 0.5 * base.variant.R);
  if (thin_r > 0.0) res.thinned_radius = thin_r;
  const std::size_t total = p_grid.size() * static_cast<std::size_t>(reps);
  res.rows.resize(total);
  std::vector<std::vector<Point2>> snaps(total);
  const double t_snap = base.burn_in_time();

  parallel_for(
      total,
      [&](std::size_t idx) {
        const std::size_t pi = idx / static_cast<std::size_t>(reps);
        MobilityConfig cfg = base;
        cfg.variant.p = p_grid[pi];
        RngStream rng(seed, idx);
        const auto homes = sample_ppp(cfg.domain, cfg.lambda, rng);
        std::vector<Point2> thinned, full;
        full.reserve(homes.size());
        for (std::size_t w = 0; w < homes.size(); ++w) {
          RngStream wr = rng.substream(w);
          // Walk the chain without storing legs: W_1, W_2 for the thinned
          // process, then on to the snapshot time.
          WalkerState s = init_walker(homes[w], cfg, wr);
          const Point2 w1 = s.next_wp;
          s = next_leg(s, cfg, wr);
          const Point2 w2 = s.next_wp;
          if (norm(w1 - homes[w]) <= cfg.variant.R && norm(w2 - homes[w]) <= cfg.variant.R) thinned.push_back(w2);
          long stalled = 0;
          while (s.leg_end() < t_snap) {
            const double before = s.leg_end();
            s = next_leg(s, cfg, wr);
            stalled = s.leg_end() > before ? 0 : stalled + 1;
            if (stalled > 10000) throw StalledChain("waypoint chain makes no progress in time");
          }
          full.push_back(Segment{s.prev_wp, s.next_wp, s.leg_start, s.leg_end(), s.speed}.position(t_snap));
        }
        PhaseRow row;
        row.replication = static_cast<long>(idx % static_cast<std::size_t>(reps));
        row.p = p_grid[pi];
        row.walkers = homes.size();
        row.thinned_points = thinned.size();
        if (res.thinned_radius) {
          const auto rep = clusters(build_graph(thinned, thin_r, cfg.domain));
          row.thinned_largest = rep.largest;
          row.thinned_lr = rep.crossing_lr;
          row.thinned_tb = rep.crossing_tb;
        }
        const auto rep = clusters(build_graph(full, 2.0 * cfg.r, cfg.domain));
        row.full_largest = rep.largest;
        row.full_lr = rep.crossing_lr;
        row.full_tb = rep.crossing_tb;
        res.rows[idx] = row;
        if (keep_snapshots) snaps[idx] = std::move(full);
      },
      workers);

  if (keep_snapshots) {
    res.snapshots.resize(p_grid.size());
    for (std::size_t idx = 0; idx < total; ++idx)
      res.snapshots[idx / static_cast<std::size_t>(reps)].push_back(std::move(snaps[idx]));
  }
  return res;
}

// ---------------------------------------------------------------------------

struct HomogeneityTest {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Chi-square test of cell counts against Poisson(lambda * cell area) on a
/// cells x cells grid.
inline HomogeneityTest poisson_homogeneity(std::span<const Point2> points, const RectDomain& dom, double lambda,
                                           int cells) {
  std::vector<long> counts(static_cast<std::size_t>(cells) * cells, 0);
  for (const Point2 p : points) {
    const int i = std::clamp(static_cast<int>(std::floor((p.x - dom.x0) / dom.width * cells)), 0, cells - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y - dom.y0) / dom.height * cells)), 0, cells - 1);
    ++counts[static_cast<std::size_t>(j) * cells + i];
  }
  const double expected = lambda * dom.area() / (static_cast<double>(cells) * cells);
  HomogeneityTest t;
  for (const long c : counts) t.statistic += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  t.df = static_cast<double>(counts.size());
  t.p_value = chi_square_sf(t.statistic, t.df);
  return t;
}

/// Displaces every home by an independent draw from `displacement` centered at
/// that home (plus a constant shift), wraps onto the torus and tests the
/// result for homogeneity at intensity lambda.
inline HomogeneityTest displaced_homogeneity_check(std::span<const Point2> homes, const WaypointMeasure& displacement,
                                                   const RectDomain& dom, double lambda, int cells, RngStream& rng,
                                                   Point2 shift = {}) {
  if (!dom.is_torus()) throw ValidationError("domain.boundary", "displacement check runs on a torus");
  std::vector<Point2> moved;
  moved.reserve(homes.size());
  const bool redraw_outside = std::holds_alternative<AnnulusUniform>(displacement);
  for (const Point2 h : homes) {
    Point2 p = detail::draw_unclipped(displacement, h, dom, rng);
    for (int i = 0; redraw_outside && !dom.contains(p); ++i) {
      if (i == detail::kMaxRejections) throw SupportOutsideDomain("annulus hole covers the domain");
      p = detail::draw_unclipped(displacement, h, dom, rng);
    }
    moved.push_back(dom.wrap(p + shift));
  }
  return poisson_homogeneity(moved, dom, lambda, cells);
}

}  // namespace srw
