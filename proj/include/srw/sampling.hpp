#pragma once

// Seeded sampling: Poisson point processes, waypoint / velocity / alarm
// measures, independent thinning, and deterministic quadrature of waypoint
// measure mass on balls.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "srw/errors.hpp"
#include "srw/geometry.hpp"
#include "srw/random.hpp"

namespace srw {

// ---------------------------------------------------------------------------
// Waypoint measures. Every kind except UniformDomain and HotspotMixture is
// centered on the walker's home. All are conditioned on the domain by
// rejection.

struct UniformDomain {
  friend bool operator==(const UniformDomain&, const UniformDomain&) = default;
};

/// Uniform on the disk B(home, radius).
struct BallUniform {
  double radius = 1.0;
  friend bool operator==(const BallUniform&, const BallUniform&) = default;
};

/// Uniform on the domain minus the closed disk B(home, radius).
struct AnnulusUniform {
  double radius = 1.0;
  friend bool operator==(const AnnulusUniform&, const AnnulusUniform&) = default;
};

/// Isotropic about home with P(d > s) = (1 + s^2/scale^2)^(-beta/2), a tail
/// of order scale^beta * s^-beta. The planar density is continuous and
/// positive everywhere.
struct CenteredPowerTail {
  double beta = 1.5;
  double scale = 1.0;
  friend bool operator==(const CenteredPowerTail&, const CenteredPowerTail&) = default;
};

/// A disk hotspot; radius 0 is a point mass.
struct Hotspot {
  Point2 center;
  double radius = 0.0;
  double weight = 1.0;
  friend bool operator==(const Hotspot&, const Hotspot&) = default;
};

struct HotspotMixture {
  std::vector<Hotspot> hotspots;
  double background_weight = 0.0;
  friend bool operator==(const HotspotMixture&, const HotspotMixture&) = default;
};

using WaypointMeasure = std::variant<UniformDomain, BallUniform, AnnulusUniform, CenteredPowerTail, HotspotMixture>;

// ---------------------------------------------------------------------------

struct UniformSpeed {
  double v_minus = 1.0;
  double v_plus = 1.0;
  friend bool operator==(const UniformSpeed&, const UniformSpeed&) = default;
};

/// Piecewise-linear density through the knots (v_i, f_i), zero outside.
struct TabulatedSpeed {
  std::vector<std::pair<double, double>> knots;
  friend bool operator==(const TabulatedSpeed&, const TabulatedSpeed&) = default;
};

using VelocityMeasure = std::variant<UniformSpeed, TabulatedSpeed>;

inline double v_minus(const VelocityMeasure& m) {
  if (const auto* u = std::get_if<UniformSpeed>(&m)) return u->v_minus;
  return std::get<TabulatedSpeed>(m).knots.front().first;
}

inline double v_plus(const VelocityMeasure& m) {
  if (const auto* u = std::get_if<UniformSpeed>(&m)) return u->v_plus;
  return std::get<TabulatedSpeed>(m).knots.back().first;
}

// ---------------------------------------------------------------------------

/// Fixed alarm; +infinity means the alarm never rings.
struct DeterministicAlarm {
  double value = 1.0;
  friend bool operator==(const DeterministicAlarm&, const DeterministicAlarm&) = default;
};

struct ExponentialAlarm {
  double rate = 1.0;
  friend bool operator==(const ExponentialAlarm&, const ExponentialAlarm&) = default;
};

struct UniformAlarm {
  double lo = 1.0;
  double hi = 2.0;
  friend bool operator==(const UniformAlarm&, const UniformAlarm&) = default;
};

using AlarmMeasure = std::variant<DeterministicAlarm, ExponentialAlarm, UniformAlarm>;

// ---------------------------------------------------------------------------

inline Point2 sample_uniform(const RectDomain& dom, RngStream& rng) {
  const double x = dom.x0 + dom.width * rng.uniform();
  const double y = dom.y0 + dom.height * rng.uniform();
  return {x, y};
}

inline Point2 sample_disk(Point2 c, double radius, RngStream& rng) {
  const double rr = radius * std::sqrt(rng.uniform());
  const double th = 2.0 * std::numbers::pi * rng.uniform();
  return {c.x + rr * std::cos(th), c.y + rr * std::sin(th)};
}

/// Homogeneous PPP of the given intensity on dom.
inline std::vector<Point2> sample_ppp(const RectDomain& dom, double lambda, RngStream& rng) {
  std::poisson_distribution<long> count(lambda * dom.area());
  const long n = count(rng);
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) pts.push_back(sample_uniform(dom, rng));
  return pts;
}

/// Whether the measure puts positive mass on dom for a walker at home.
inline bool support_intersects(const WaypointMeasure& m, Point2 home, const RectDomain& dom) {
  struct Visitor {
    Point2 home;
    const RectDomain& dom;
    bool operator()(const UniformDomain&) const { return true; }
    bool operator()(const BallUniform& b) const { return dom.distance_to(home) < b.radius; }
    bool operator()(const AnnulusUniform& a) const {
      for (const Point2 c : {Point2{dom.x0, dom.y0}, Point2{dom.x1(), dom.y0}, Point2{dom.x0, dom.y1()},
                             Point2{dom.x1(), dom.y1()}})
        if (norm(c - home) > a.radius) return true;
      return false;
    }
    bool operator()(const CenteredPowerTail&) const { return true; }
    bool operator()(const HotspotMixture& h) const {
      if (h.background_weight > 0.0) return true;
      for (const auto& s : h.hotspots) {
        if (s.weight <= 0.0) continue;
        if (s.radius == 0.0 ? dom.contains(s.center) : dom.distance_to(s.center) < s.radius) return true;
      }
      return false;
    }
  };
  return std::visit(Visitor{home, dom}, m);
}

namespace detail {

constexpr int kMaxRejections = 1'000'000;

inline Point2 draw_unclipped(const WaypointMeasure& m, Point2 home, const RectDomain& dom, RngStream& rng) {
  struct Visitor {
    Point2 home;
    const RectDomain& dom;
    RngStream& rng;
    Point2 operator()(const UniformDomain&) const { return sample_uniform(dom, rng); }
    Point2 operator()(const BallUniform& b) const { return sample_disk(home, b.radius, rng); }
    Point2 operator()(const AnnulusUniform& a) const {
      const Point2 p = sample_uniform(dom, rng);
      // Points inside the hole are mapped outside the domain so the caller rejects them.
      if (distance(p, home, dom) <= a.radius) return {dom.x1() + 1.0, dom.y1() + 1.0};
      return p;
    }
    Point2 operator()(const CenteredPowerTail& c) const {
      const double u = rng.uniform();
      const double d = c.scale * std::sqrt(std::pow(u, -2.0 / c.beta) - 1.0);
      const double th = 2.0 * std::numbers::pi * rng.uniform();
      return {home.x + d * std::cos(th), home.y + d * std::sin(th)};
    }
    Point2 operator()(const HotspotMixture& h) const {
      double total = h.background_weight;
      for (const auto& s : h.hotspots) total += s.weight;
      double pick = total * rng.uniform();
      for (const auto& s : h.hotspots) {
        if (pick < s.weight) return s.radius == 0.0 ? s.center : sample_disk(s.center, s.radius, rng);
        pick -= s.weight;
      }
      return sample_uniform(dom, rng);
    }
  };
  return std::visit(Visitor{home, dom, rng}, m);
}

}  // namespace detail

/// Draws a waypoint from m conditioned on dom.
inline Point2 sample_waypoint(const WaypointMeasure& m, Point2 home, const RectDomain& dom, RngStream& rng) {
  if (!support_intersects(m, home, dom)) throw SupportOutsideDomain("waypoint measure support misses the domain");
  for (int i = 0; i < detail::kMaxRejections; ++i) {
    const Point2 p = detail::draw_unclipped(m, home, dom, rng);
    if (dom.contains(p)) return p;
  }
  throw SupportOutsideDomain("waypoint rejection sampling did not terminate");
}

inline double sample_velocity(const VelocityMeasure& m, RngStream& rng) {
  if (const auto* u = std::get_if<UniformSpeed>(&m)) {
    if (u->v_minus == u->v_plus) return u->v_minus;
    return std::clamp(rng.uniform(u->v_minus, u->v_plus), u->v_minus, u->v_plus);
  }
  const auto& knots = std::get<TabulatedSpeed>(m).knots;
  std::vector<double> cum(knots.size(), 0.0);
  for (std::size_t i = 1; i < knots.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (knots[i].second + knots[i - 1].second) * (knots[i].first - knots[i - 1].first);
  const double target = cum.back() * rng.uniform();
  std::size_t i = 1;
  while (i + 1 < knots.size() && cum[i] < target) ++i;
  const auto [v0, f0] = knots[i - 1];
  const auto [v1, f1] = knots[i];
  const double h = v1 - v0;
  const double rem = target - cum[i - 1];
  // Solve f0*tau + (f1-f0)/(2h)*tau^2 = rem for tau in [0, h].
  const double a = (f1 - f0) / (2.0 * h);
  double tau;
  if (std::abs(a) < 1e-15) {
    tau = f0 > 0.0 ? rem / f0 : 0.0;
  } else {
    const double disc = std::max(0.0, f0 * f0 + 4.0 * a * rem);
    tau = 2.0 * rem / (f0 + std::sqrt(disc));
  }
  return std::clamp(v0 + tau, knots.front().first, knots.back().first);
}

inline double sample_alarm(const AlarmMeasure& m, RngStream& rng) {
  struct Visitor {
    RngStream& rng;
    double operator()(const DeterministicAlarm& d) const { return d.value; }
    double operator()(const ExponentialAlarm& e) const { return rng.exponential(e.rate); }
    double operator()(const UniformAlarm& u) const { return rng.uniform(u.lo, u.hi); }
  };
  return std::visit(Visitor{rng}, m);
}

/// Independent Bernoulli(keep) retention.
inline std::vector<Point2> thin(std::span<const Point2> points, double keep, RngStream& rng) {
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(keep * static_cast<double>(points.size())) + 1);
  for (const Point2 p : points)
    if (rng.uniform() < keep) out.push_back(p);
  return out;
}

/// Independent location-dependent retention with probability keep(p).
inline std::vector<Point2> thin(std::span<const Point2> points, const std::function<double(Point2)>& keep,
                                RngStream& rng) {
  std::vector<Point2> out;
  for (const Point2 p : points)
    if (rng.uniform() < keep(p)) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature of measure mass.

namespace detail {

/// One mixture component of a waypoint measure: either an atom or a density
/// supported inside `box`.
struct MassComponent {
  double weight;
  bool atom;
  Point2 at;
  RectDomain box;
  std::function<double(Point2)> density;
};

inline RectDomain bounding_box(Point2 c, double radius) {
  return RectDomain{2.0 * radius, 2.0 * radius, BoundaryMode::bounded, c.x - radius, c.y - radius};
}

inline std::optional<RectDomain> intersect(const RectDomain& a, const RectDomain& b) {
  const double x0 = std::max(a.x0, b.x0), x1 = std::min(a.x1(), b.x1());
  const double y0 = std::max(a.y0, b.y0), y1 = std::min(a.y1(), b.y1());
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return RectDomain{x1 - x0, y1 - y0, BoundaryMode::bounded, x0, y0};
}

inline std::vector<MassComponent> components(const WaypointMeasure& m, Point2 home, const RectDomain& dom) {
  using std::numbers::pi;
  std::vector<MassComponent> out;
  if (std::holds_alternative<UniformDomain>(m)) {
    const double inv = 1.0 / dom.area();
    out.push_back({1.0, false, {}, dom, [inv](Point2) { return inv; }});
  } else if (const auto* b = std::get_if<BallUniform>(&m)) {
    const double r2 = b->radius * b->radius;
    const double inv = 1.0 / (pi * r2);
    out.push_back({1.0, false, {}, bounding_box(home, b->radius),
                   [=](Point2 p) { return norm2(p - home) <= r2 ? inv : 0.0; }});
  } else if (const auto* a = std::get_if<AnnulusUniform>(&m)) {
    const double r2 = a->radius * a->radius;
    out.push_back({1.0, false, {}, dom, [=](Point2 p) { return norm2(p - home) > r2 ? 1.0 : 0.0; }});
  } else if (const auto* c = std::get_if<CenteredPowerTail>(&m)) {
    const double s2 = c->scale * c->scale;
    const double k = c->beta / (2.0 * pi * s2);
    const double e = -0.5 * c->beta - 1.0;
    out.push_back({1.0, false, {}, dom, [=](Point2 p) { return k * std::pow(1.0 + norm2(p - home) / s2, e); }});
  } else {
    const auto& h = std::get<HotspotMixture>(m);
    double total = h.background_weight;
    for (const auto& s : h.hotspots) total += s.weight;
    if (h.background_weight > 0.0) {
      const double inv = 1.0 / dom.area();
      out.push_back({h.background_weight / total, false, {}, dom, [inv](Point2) { return inv; }});
    }
    for (const auto& s : h.hotspots) {
      if (s.weight <= 0.0) continue;
      if (s.radius == 0.0) {
        out.push_back({s.weight / total, true, s.center, {}, {}});
      } else {
        const double r2 = s.radius * s.radius;
        const double inv = 1.0 / (pi * r2);
        const Point2 cc = s.center;
        out.push_back({s.weight / total, false, {}, bounding_box(cc, s.radius),
                       [=](Point2 p) { return norm2(p - cc) <= r2 ? inv : 0.0; }});
      }
    }
  }
  return out;
}

/// Midpoint rule with n x n cells over box.
template <class F>
double midpoint_2d(const RectDomain& box, int n, F&& f) {
  const double hx = box.width / n, hy = box.height / n;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double y = box.y0 + (j + 0.5) * hy;
    double row = 0.0;
    for (int i = 0; i < n; ++i) row += f(Point2{box.x0 + (i + 0.5) * hx, y});
    sum += row;
  }
  return sum * hx * hy;
}

}  // namespace detail

/// Mass that m (conditioned on dom) assigns to B(center, rho). Midpoint
/// quadrature refined by doubling until successive estimates differ by less
/// than 1e-4.
inline double measure_mass_on_ball(const WaypointMeasure& m, Point2 home, Point2 center, double rho,
                                   const RectDomain& dom) {
  const auto comps = detail::components(m, home, dom);
  const double rho2 = rho * rho;
  const RectDomain query_box = detail::bounding_box(center, rho);

  const auto estimate = [&](int n) {
    double num = 0.0, den = 0.0;
    for (const auto& c : comps) {
      if (c.atom) {
        if (dom.contains(c.at)) {
          den += c.weight;
          if (norm2(c.at - center) <= rho2) num += c.weight;
        }
        continue;
      }
      const auto support = detail::intersect(c.box, dom);
      if (!support) continue;
      den += c.weight * detail::midpoint_2d(*support, n, c.density);
      if (const auto qb = detail::intersect(*support, query_box)) {
        num += c.weight * detail::midpoint_2d(*qb, n, [&](Point2 p) {
          return norm2(p - center) <= rho2 ? c.density(p) : 0.0;
        });
      }
    }
    return den > 0.0 ? num / den : 0.0;
  };

  double prev = estimate(32);
  for (int n = 64; n <= 4096; n *= 2) {
    const double cur = estimate(n);
    if (std::abs(cur - prev) < 1e-4) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace srw
