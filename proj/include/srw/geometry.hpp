#pragma once

// Planar kinematic kernel: points, rectangular domains, moving-point legs and
// closed-form closest-approach / first-contact computations.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "srw/errors.hpp"

namespace srw {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Point2 a) { return dot(a, a); }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

enum class BoundaryMode { bounded, torus };

/// Axis-aligned rectangle [x0, x0+width] x [y0, y0+height].
struct RectDomain {
  double width = 1.0;
  double height = 1.0;
  BoundaryMode mode = BoundaryMode::bounded;
  double x0 = 0.0;
  double y0 = 0.0;

  double x1() const { return x0 + width; }
  double y1() const { return y0 + height; }
  double area() const { return width * height; }
  double diameter() const { return std::hypot(width, height); }
  Point2 center() const { return {x0 + 0.5 * width, y0 + 0.5 * height}; }
  bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1() && p.y >= y0 && p.y <= y1(); }
  bool is_torus() const { return mode == BoundaryMode::torus; }

  /// Euclidean distance from p to the rectangle (0 inside).
  double distance_to(Point2 p) const {
    const double dx = std::max({x0 - p.x, 0.0, p.x - x1()});
    const double dy = std::max({y0 - p.y, 0.0, p.y - y1()});
    return std::hypot(dx, dy);
  }

  /// Maps a point onto the fundamental cell (torus mode only; identity otherwise).
  Point2 wrap(Point2 p) const {
    if (!is_torus()) return p;
    auto w = [](double v, double lo, double len) {
      double r = std::fmod(v - lo, len);
      if (r < 0) r += len;
      return lo + r;
    };
    return {w(p.x, x0, width), w(p.y, y0, height)};
  }

  friend bool operator==(const RectDomain&, const RectDomain&) = default;
};

/// The 9 translation vectors of the periodic images adjacent to the cell.
inline std::array<Point2, 9> periodic_shifts(const RectDomain& dom) {
  std::array<Point2, 9> out{};
  int k = 0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) out[k++] = {i * dom.width, j * dom.height};
  return out;
}

inline double distance(Point2 p, Point2 q, const RectDomain& dom) {
  double dx = std::abs(p.x - q.x);
  double dy = std::abs(p.y - q.y);
  if (dom.is_torus()) {
    dx = std::min(dx, dom.width - dx);
    dy = std::min(dy, dom.height - dy);
  }
  return std::hypot(dx, dy);
}

/// Shrinks dom by margin on every side.
inline RectDomain erode(const RectDomain& dom, double margin) {
  if (!(2.0 * margin < std::min(dom.width, dom.height)) || margin < 0.0)
    throw EmptyErosion("erosion margin leaves no interior");
  RectDomain out = dom;
  out.x0 += margin;
  out.y0 += margin;
  out.width -= 2.0 * margin;
  out.height -= 2.0 * margin;
  return out;
}

/// Centers of an eps-cover: a square grid of spacing at most eps*sqrt(2), one
/// center per cell, so every point of region lies within eps of a center.
/// Degenerate (zero-extent) regions get one center per degenerate axis.
inline std::vector<Point2> cover_with_balls(const RectDomain& region, double eps) {
  const double spacing = eps * std::sqrt(2.0);
  const auto cells = [&](double len) {
    return std::max<long>(1, static_cast<long>(std::ceil(len / spacing - 1e-12)));
  };
  const long nx = cells(region.width);
  const long ny = cells(region.height);
  const double cx = region.width / static_cast<double>(nx);
  const double cy = region.height / static_cast<double>(ny);
  std::vector<Point2> centers;
  centers.reserve(static_cast<std::size_t>(nx * ny));
  for (long j = 0; j < ny; ++j)
    for (long i = 0; i < nx; ++i)
      centers.push_back({region.x0 + (i + 0.5) * cx, region.y0 + (j + 0.5) * cy});
  return centers;
}

/// One straight constant-speed leg of a walker.
struct Segment {
  Point2 start;
  Point2 end;
  double t_start = 0.0;
  double t_end = 0.0;
  double speed = 1.0;

  double duration() const { return t_end - t_start; }
  double length() const { return norm(end - start); }

  /// Displacement per unit time.
  Point2 velocity() const {
    const double d = duration();
    return d > 0.0 ? (1.0 / d) * (end - start) : Point2{};
  }

  Point2 position(double t) const {
    if (t >= t_end) return end;
    if (t <= t_start) return start;
    const double u = (t - t_start) / duration();
    return start + u * (end - start);
  }
};

struct Approach {
  double distance;
  double time;
};

/// Closest approach of the moving point of seg to a fixed point p.
inline Approach min_distance_point_segment(const Segment& seg, Point2 p) {
  const Point2 d = seg.end - seg.start;
  const double len2 = norm2(d);
  double u = 0.0;
  if (len2 > 0.0) u = std::clamp(dot(p - seg.start, d) / len2, 0.0, 1.0);
  const Point2 foot = seg.start + u * d;
  return {norm(p - foot), seg.t_start + u * seg.duration()};
}

/// Torus-aware variant: minimum over the periodic images of p.
inline Approach min_distance_point_segment(const Segment& seg, Point2 p, const RectDomain& dom) {
  if (!dom.is_torus()) return min_distance_point_segment(seg, p);
  Approach best{INFINITY, seg.t_start};
  for (const Point2 s : periodic_shifts(dom)) {
    const Approach a = min_distance_point_segment(seg, p + s);
    if (a.distance < best.distance || (a.distance == best.distance && a.time < best.time)) best = a;
  }
  return best;
}

namespace detail {

/// Earliest tau in [0, span] with |rel0 + vel*tau| <= rho.
inline std::optional<double> first_entry(Point2 rel0, Point2 vel, double rho, double span) {
  const double c = norm2(rel0) - rho * rho;
  if (c <= 0.0) return 0.0;
  const double a = norm2(vel);
  const double b = 2.0 * dot(rel0, vel);
  if (a == 0.0 || b >= 0.0) return std::nullopt;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  // Citardauq form of the smaller root; b < 0 so q > 0 and no cancellation.
  const double q = 0.5 * (-b + std::sqrt(disc));
  const double tau = c / q;
  if (tau > span) return std::nullopt;
  return tau;
}

}  // namespace detail

/// Earliest time in the common window of two legs at which the moving points
/// are within rho of each other.
inline std::optional<double> first_contact_two_moving(const Segment& a, const Segment& b, double rho) {
  const double t0 = std::max(a.t_start, b.t_start);
  const double t1 = std::min(a.t_end, b.t_end);
  if (t0 > t1) return std::nullopt;
  const Point2 rel0 = a.position(t0) - b.position(t0);
  const Point2 vel = a.velocity() - b.velocity();
  const auto tau = detail::first_entry(rel0, vel, rho, t1 - t0);
  if (!tau) return std::nullopt;
  return t0 + *tau;
}

inline std::optional<double> first_contact_two_moving(const Segment& a, const Segment& b, double rho,
                                                      const RectDomain& dom) {
  if (!dom.is_torus()) return first_contact_two_moving(a, b, rho);
  std::optional<double> best;
  for (const Point2 s : periodic_shifts(dom)) {
    Segment shifted = b;
    shifted.start = b.start + s;
    shifted.end = b.end + s;
    const auto t = first_contact_two_moving(a, shifted, rho);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

/// Earliest time the moving point of seg comes within rho of a fixed point.
inline std::optional<double> first_contact_point(const Segment& seg, Point2 p, double rho) {
  const auto tau = detail::first_entry(seg.start - p, seg.velocity(), rho, seg.duration());
  if (!tau) return std::nullopt;
  return seg.t_start + *tau;
}

inline std::optional<double> first_contact_point(const Segment& seg, Point2 p, double rho,
                                                 const RectDomain& dom) {
  if (!dom.is_torus()) return first_contact_point(seg, p, rho);
  std::optional<double> best;
  for (const Point2 s : periodic_shifts(dom)) {
    const auto t = first_contact_point(seg, p + s, rho);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

/// Time the moving point of seg spends inside the closed disk B(c, radius).
inline double time_within_disk(const Segment& seg, Point2 c, double radius) {
  const double dur = seg.duration();
  const Point2 rel0 = seg.start - c;
  const Point2 vel = seg.velocity();
  const double a = norm2(vel);
  const double cc = norm2(rel0) - radius * radius;
  if (a == 0.0) return cc <= 0.0 ? dur : 0.0;
  const double b = 2.0 * dot(rel0, vel);
  const double disc = b * b - 4.0 * a * cc;
  if (disc <= 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  const double lo = (-b - sq) / (2.0 * a);
  const double hi = (-b + sq) / (2.0 * a);
  return std::max(0.0, std::min(hi, dur) - std::max(lo, 0.0));
}

/// Time the moving point of seg spends inside the closed rectangle box.
inline double time_within_rect(const Segment& seg, const RectDomain& box) {
  const double dur = seg.duration();
  double lo = 0.0;
  double hi = dur;
  const Point2 v = seg.velocity();
  const auto clip = [&](double p0, double vel, double a, double b) {
    if (vel == 0.0) {
      if (p0 < a || p0 > b) hi = -1.0;
      return;
    }
    double ta = (a - p0) / vel;
    double tb = (b - p0) / vel;
    if (ta > tb) std::swap(ta, tb);
    lo = std::max(lo, ta);
    hi = std::min(hi, tb);
  };
  clip(seg.start.x, v.x, box.x0, box.x1());
  clip(seg.start.y, v.y, box.y0, box.y1());
  if (dur == 0.0) return 0.0;
  return std::max(0.0, hi - lo);
}

}  // namespace srw
