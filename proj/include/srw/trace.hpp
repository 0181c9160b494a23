#pragma once

// Trajectory export in the native event format and the BonnMotion waypoint
// list, plus re-import of native traces.

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "srw/errors.hpp"
#include "srw/geometry.hpp"
#include "srw/mobility.hpp"

namespace srw {

namespace detail {

inline std::string fmt_coord(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_time(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}

}  // namespace detail

/// Native format: `#srw-trace v1 a_x a_y`, optional `#` comment lines, then
/// `node_id t x y flag` per waypoint event with flag H for home arrivals (and
/// the initial position) and W otherwise.
inline void export_native(std::ostream& os, std::span<const WalkerTrajectory> walkers, const RectDomain& dom,
                          const std::string& comment = {}) {
  if (walkers.empty()) throw IoError("no trajectories to export");
  os << "#srw-trace v1 " << detail::fmt_coord(dom.width) << ' ' << detail::fmt_coord(dom.height) << '\n';
  if (!comment.empty()) os << "# " << comment << '\n';
  for (std::size_t id = 0; id < walkers.size(); ++id) {
    const auto& w = walkers[id];
    const Point2 start = w.legs.empty() ? w.home : w.legs.front().start;
    const double t0 = w.legs.empty() ? 0.0 : w.legs.front().t_start;
    os << id << ' ' << detail::fmt_time(t0) << ' ' << detail::fmt_coord(start.x) << ' '
       << detail::fmt_coord(start.y) << " H\n";
    for (std::size_t k = 0; k < w.legs.size(); ++k) {
      const Point2 p = w.legs[k].end;
      os << id << ' ' << detail::fmt_time(w.legs[k].t_end) << ' ' << detail::fmt_coord(p.x) << ' '
         << detail::fmt_coord(p.y) << (w.home_arrival[k] ? " H" : " W") << '\n';
    }
  }
  if (!os) throw IoError("write failed");
}

/// BonnMotion waypoint list: one line per node of `t x y` triples, starting at
/// t = 0 at the home. Home arrivals are ordinary waypoints here.
inline void export_bonnmotion(std::ostream& os, std::span<const WalkerTrajectory> walkers) {
  if (walkers.empty()) throw IoError("no trajectories to export");
  for (const auto& w : walkers) {
    const Point2 start = w.legs.empty() ? w.home : w.legs.front().start;
    const double t0 = w.legs.empty() ? 0.0 : w.legs.front().t_start;
    os << detail::fmt_time(t0) << ' ' << detail::fmt_coord(start.x) << ' ' << detail::fmt_coord(start.y);
    for (const Segment& leg : w.legs)
      os << ' ' << detail::fmt_time(leg.t_end) << ' ' << detail::fmt_coord(leg.end.x) << ' '
         << detail::fmt_coord(leg.end.y);
    os << '\n';
  }
  if (!os) throw IoError("write failed");
}

struct NativeTrace {
  RectDomain domain;
  std::vector<WalkerTrajectory> walkers;
};

/// Rebuilds trajectories from a native trace. The first event of each node is
/// taken as its home.
inline NativeTrace import_native(std::istream& is) {
  NativeTrace out;
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty trace");
  {
    std::istringstream h(line);
    std::string magic, version;
    h >> magic >> version >> out.domain.width >> out.domain.height;
    if (magic != "#srw-trace" || version != "v1" || !h) throw IoError("not a native srw trace");
  }
  std::map<long, WalkerTrajectory> nodes;
  std::map<long, std::pair<Point2, double>> last;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long id;
    double t, x, y;
    std::string flag;
    if (!(ls >> id >> t >> x >> y >> flag) || (flag != "H" && flag != "W"))
      throw IoError("malformed trace line " + std::to_string(lineno));
    const Point2 p{x, y};
    auto it = last.find(id);
    if (it == last.end()) {
      nodes[id].home = p;
      last[id] = {p, t};
      continue;
    }
    const auto [prev, t_prev] = it->second;
    const double dur = t - t_prev;
    const double speed = dur > 0.0 ? norm(p - prev) / dur : 1.0;
    auto& w = nodes[id];
    w.legs.push_back(Segment{prev, p, t_prev, t, speed});
    w.waypoint_times.push_back(t);
    w.home_arrival.push_back(flag == "H" ? 1 : 0);
    it->second = {p, t};
  }
  for (auto& [id, w] : nodes) out.walkers.push_back(std::move(w));
  return out;
}

}  // namespace srw
