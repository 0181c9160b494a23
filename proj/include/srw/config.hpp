#pragma once

// Experiment description and its flat `key = value` text form.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srw/errors.hpp"
#include "srw/geometry.hpp"
#include "srw/sampling.hpp"

namespace srw {

struct ModelVariant {
  enum class Kind { srw_carryover, srw_reset, interpolation, classical_rwp };
  Kind kind = Kind::srw_carryover;
  /// Long-trip probability (interpolation only).
  double p = 0.5;
  /// Near-home radius (interpolation only).
  double R = 1.0;

  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;
};

struct MobilityConfig {
  RectDomain domain{10.0, 10.0};
  double lambda = 0.5;
  /// Communication radius.
  double r = 0.5;
  /// Static detection radius; 2r when unset.
  std::optional<double> rho_detect;
  double eps = 0.1;
  ModelVariant variant;
  WaypointMeasure waypoint = UniformDomain{};
  VelocityMeasure velocity = UniformSpeed{1.0, 2.0};
  AlarmMeasure alarm = DeterministicAlarm{20.0};

  double t_max = 200.0;
  double t_step = 1.0;
  int reps = 100;
  std::uint64_t seed = 1;
  /// Burn-in time for stationary snapshots; 50 * diam / v_minus when unset.
  std::optional<double> burn_in;
  int mc_reps = 100000;

  std::optional<Point2> target;
  std::optional<RectDomain> region;

  std::vector<double> p_grid{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> lambda_grid;

  int stationary_walkers = 1000;
  int stationary_samples = 1000;
  int bins = 20;

  std::string output_dir = "out";

  double rho() const { return rho_detect.value_or(2.0 * r); }
  double vmin() const { return v_minus(velocity); }
  double diameter() const { return domain.diameter(); }
  double burn_in_time() const { return burn_in.value_or(50.0 * diameter() / vmin()); }
  Point2 target_point() const { return target.value_or(domain.center()); }

  /// Coverage region: the central 2 x 2 square by default.
  RectDomain region_or_default() const {
    if (region) return *region;
    const Point2 c = domain.center();
    return RectDomain{2.0, 2.0, BoundaryMode::bounded, c.x - 1.0, c.y - 1.0};
  }

  friend bool operator==(const MobilityConfig&, const MobilityConfig&) = default;
};

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_double(v[i]);
  return s;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

}  // namespace detail

inline const char* variant_name(ModelVariant::Kind k) {
  switch (k) {
    case ModelVariant::Kind::srw_carryover: return "srw_carryover";
    case ModelVariant::Kind::srw_reset: return "srw_reset";
    case ModelVariant::Kind::interpolation: return "interpolation";
    case ModelVariant::Kind::classical_rwp: return "classical_rwp";
  }
  return "?";
}

/// Canonical text form; parse_config(emit_config(c)) == c.
inline std::string emit_config(const MobilityConfig& c) {
  using detail::fmt_double;
  std::ostringstream o;
  const auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << '\n'; };
  kv("domain.a_x", fmt_double(c.domain.width));
  kv("domain.a_y", fmt_double(c.domain.height));
  kv("domain.boundary", c.domain.is_torus() ? "torus" : "bounded");
  kv("lambda", fmt_double(c.lambda));
  kv("r", fmt_double(c.r));
  if (c.rho_detect) kv("rho_detect", fmt_double(*c.rho_detect));
  kv("eps", fmt_double(c.eps));
  kv("variant.kind", variant_name(c.variant.kind));
  kv("variant.p", fmt_double(c.variant.p));
  kv("variant.R", fmt_double(c.variant.R));

  if (std::holds_alternative<UniformDomain>(c.waypoint)) {
    kv("waypoint.kind", "uniform_domain");
  } else if (const auto* b = std::get_if<BallUniform>(&c.waypoint)) {
    kv("waypoint.kind", "ball_uniform");
    kv("waypoint.radius", fmt_double(b->radius));
  } else if (const auto* a = std::get_if<AnnulusUniform>(&c.waypoint)) {
    kv("waypoint.kind", "annulus_uniform");
    kv("waypoint.radius", fmt_double(a->radius));
  } else if (const auto* t = std::get_if<CenteredPowerTail>(&c.waypoint)) {
    kv("waypoint.kind", "centered_power_tail");
    kv("waypoint.beta", fmt_double(t->beta));
    kv("waypoint.scale", fmt_double(t->scale));
  } else {
    const auto& h = std::get<HotspotMixture>(c.waypoint);
    kv("waypoint.kind", "hotspot_mixture");
    std::string spots;
    for (std::size_t i = 0; i < h.hotspots.size(); ++i) {
      const auto& s = h.hotspots[i];
      spots += (i ? ";" : "") + fmt_double(s.center.x) + ":" + fmt_double(s.center.y) + ":" +
               fmt_double(s.radius) + ":" + fmt_double(s.weight);
    }
    kv("waypoint.hotspots", spots);
    kv("waypoint.background_weight", fmt_double(h.background_weight));
  }

  if (const auto* u = std::get_if<UniformSpeed>(&c.velocity)) {
    kv("velocity.kind", "uniform");
    kv("velocity.v_minus", fmt_double(u->v_minus));
    kv("velocity.v_plus", fmt_double(u->v_plus));
  } else {
    const auto& t = std::get<TabulatedSpeed>(c.velocity);
    kv("velocity.kind", "truncated_density");
    std::string tab;
    for (std::size_t i = 0; i < t.knots.size(); ++i)
      tab += (i ? ";" : "") + fmt_double(t.knots[i].first) + ":" + fmt_double(t.knots[i].second);
    kv("velocity.table", tab);
  }

  if (const auto* d = std::get_if<DeterministicAlarm>(&c.alarm)) {
    kv("alarm.kind", "deterministic");
    kv("alarm.value", fmt_double(d->value));
  } else if (const auto* e = std::get_if<ExponentialAlarm>(&c.alarm)) {
    kv("alarm.kind", "exponential");
    kv("alarm.rate", fmt_double(e->rate));
  } else {
    const auto& u = std::get<UniformAlarm>(c.alarm);
    kv("alarm.kind", "uniform");
    kv("alarm.lo", fmt_double(u.lo));
    kv("alarm.hi", fmt_double(u.hi));
  }

  kv("run.t_max", fmt_double(c.t_max));
  kv("run.t_step", fmt_double(c.t_step));
  kv("run.reps", std::to_string(c.reps));
  kv("run.seed", std::to_string(c.seed));
  if (c.burn_in) kv("run.burn_in", fmt_double(*c.burn_in));
  kv("run.mc_reps", std::to_string(c.mc_reps));
  if (c.target) {
    kv("target.x", fmt_double(c.target->x));
    kv("target.y", fmt_double(c.target->y));
  }
  if (c.region) {
    kv("region.x0", fmt_double(c.region->x0));
    kv("region.y0", fmt_double(c.region->y0));
    kv("region.width", fmt_double(c.region->width));
    kv("region.height", fmt_double(c.region->height));
  }
  kv("percolation.p_grid", detail::fmt_list(c.p_grid));
  kv("percolation.lambda_grid", detail::fmt_list(c.lambda_grid));
  kv("stationary.walkers", std::to_string(c.stationary_walkers));
  kv("stationary.samples", std::to_string(c.stationary_samples));
  kv("stationary.bins", std::to_string(c.bins));
  kv("output.dir", c.output_dir);
  return o.str();
}

/// FNV-1a hash of the canonical text, as 16 hex digits.
inline std::string config_hash(const MobilityConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : emit_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Throws ValidationError on the first violated invariant.
inline void validate(const MobilityConfig& c) {
  const auto need = [](bool ok, const char* field, const char* why) {
    if (!ok) throw ValidationError(field, why);
  };
  need(c.domain.width > 0 && std::isfinite(c.domain.width), "domain.a_x", "must be positive");
  need(c.domain.height > 0 && std::isfinite(c.domain.height), "domain.a_y", "must be positive");
  need(c.lambda > 0 && std::isfinite(c.lambda), "lambda", "must be positive");
  need(c.r > 0 && std::isfinite(c.r), "r", "must be positive");
  if (c.rho_detect) need(*c.rho_detect > 0, "rho_detect", "must be positive");
  need(c.eps > 0, "eps", "must be positive");
  need(c.eps < c.r, "eps", "must be smaller than r");
  need(c.variant.p >= 0 && c.variant.p <= 1, "variant.p", "must lie in [0, 1]");
  need(c.variant.R > 0, "variant.R", "must be positive");
  if (c.domain.is_torus()) {
    const double half = 0.5 * std::min(c.domain.width, c.domain.height);
    need(c.rho() < half && 2.0 * c.r < half, "rho_detect", "torus mode needs radii below half the domain");
  }

  if (const auto* b = std::get_if<BallUniform>(&c.waypoint)) need(b->radius > 0, "waypoint.radius", "must be positive");
  if (const auto* a = std::get_if<AnnulusUniform>(&c.waypoint)) need(a->radius > 0, "waypoint.radius", "must be positive");
  if (const auto* t = std::get_if<CenteredPowerTail>(&c.waypoint)) {
    need(t->beta > 1, "waypoint.beta", "must exceed 1");
    need(t->scale > 0, "waypoint.scale", "must be positive");
  }
  if (const auto* h = std::get_if<HotspotMixture>(&c.waypoint)) {
    double total = h->background_weight;
    need(h->background_weight >= 0, "waypoint.background_weight", "must be non-negative");
    for (const auto& s : h->hotspots) {
      need(s.radius >= 0 && s.weight >= 0, "waypoint.hotspots", "radius and weight must be non-negative");
      total += s.weight;
    }
    need(total > 0, "waypoint.hotspots", "total weight must be positive");
  }

  if (const auto* u = std::get_if<UniformSpeed>(&c.velocity)) {
    need(u->v_minus > 0, "velocity.v_minus", "must be positive");
    need(u->v_plus >= u->v_minus && std::isfinite(u->v_plus), "velocity.v_plus", "must be >= v_minus");
  } else {
    const auto& k = std::get<TabulatedSpeed>(c.velocity).knots;
    need(k.size() >= 2, "velocity.table", "needs at least two knots");
    need(k.front().first > 0, "velocity.table", "speeds must be positive");
    double mass = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      need(k[i].second >= 0, "velocity.table", "densities must be non-negative");
      if (i) {
        need(k[i].first > k[i - 1].first, "velocity.table", "speeds must increase");
        mass += k[i].second + k[i - 1].second;
      }
    }
    need(mass > 0, "velocity.table", "density must have positive mass");
  }

  if (const auto* d = std::get_if<DeterministicAlarm>(&c.alarm)) need(d->value > 0, "alarm.value", "must be positive");
  if (const auto* e = std::get_if<ExponentialAlarm>(&c.alarm))
    need(e->rate > 0 && std::isfinite(e->rate), "alarm.rate", "must be positive");
  if (const auto* u = std::get_if<UniformAlarm>(&c.alarm)) {
    need(u->lo > 0, "alarm.lo", "must be positive");
    need(u->hi >= u->lo && std::isfinite(u->hi), "alarm.hi", "must be >= lo");
  }

  need(c.t_max > 0 && std::isfinite(c.t_max), "run.t_max", "must be positive");
  need(c.t_step > 0, "run.t_step", "must be positive");
  need(c.reps >= 1, "run.reps", "must be at least 1");
  need(c.mc_reps >= 1, "run.mc_reps", "must be at least 1");
  if (c.burn_in) need(*c.burn_in > 0, "run.burn_in", "must be positive");
  if (c.target) need(c.domain.contains(*c.target), "target", "must lie in the domain");
  if (c.region) {
    need(c.region->width >= 0 && c.region->height >= 0, "region", "extent must be non-negative");
    need(c.domain.contains({c.region->x0, c.region->y0}) && c.domain.contains({c.region->x1(), c.region->y1()}),
         "region", "must lie in the domain");
  }
  for (const double p : c.p_grid) need(p >= 0 && p <= 1, "percolation.p_grid", "entries must lie in [0, 1]");
  for (std::size_t i = 0; i < c.lambda_grid.size(); ++i) {
    need(c.lambda_grid[i] >= 0, "percolation.lambda_grid", "entries must be non-negative");
    if (i) need(c.lambda_grid[i] > c.lambda_grid[i - 1], "percolation.lambda_grid", "must be increasing");
  }
  need(c.stationary_walkers >= 0, "stationary.walkers", "must be non-negative");
  need(c.stationary_samples >= 1, "stationary.samples", "must be at least 1");
  need(c.bins >= 1, "stationary.bins", "must be at least 1");
}

/// Parses flat `key = value` text ('#' starts a comment). Keys absent from the
/// text keep their defaults; unknown or repeated keys are parse errors.
inline MobilityConfig parse_config(const std::string& text) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      const std::string s = detail::trim(raw);
      if (s.empty()) continue;
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError(line, "expected key = value");
      const std::string key = detail::trim(s.substr(0, eq));
      if (key.empty()) throw ParseError(line, "empty key");
      if (entries.count(key)) throw ParseError(line, "duplicate key '" + key + "'");
      entries[key] = {detail::trim(s.substr(eq + 1)), line};
    }
  }

  std::map<std::string, bool> used;
  const auto get = [&](const std::string& key) -> const Entry* {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    used[key] = true;
    return &it->second;
  };
  const auto to_double = [](const Entry& e) {
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (e.value.empty() || *end != '\0' || std::isnan(v)) throw ParseError(e.line, "not a number: '" + e.value + "'");
    return v;
  };
  const auto to_int = [&](const Entry& e) {
    const double v = to_double(e);
    if (v != std::floor(v) || std::abs(v) > 2e9) throw ParseError(e.line, "not an integer: '" + e.value + "'");
    return static_cast<int>(v);
  };
  const auto num = [&](const std::string& key, double& out) {
    if (const Entry* e = get(key)) out = to_double(*e);
  };
  const auto integer = [&](const std::string& key, int& out) {
    if (const Entry* e = get(key)) out = to_int(*e);
  };
  const auto opt_num = [&](const std::string& key) -> std::optional<double> {
    if (const Entry* e = get(key)) return to_double(*e);
    return std::nullopt;
  };
  const auto list = [&](const std::string& key, std::vector<double>& out) {
    const Entry* e = get(key);
    if (!e) return;
    out.clear();
    if (e->value.empty()) return;
    for (const auto& tok : detail::split(e->value, ',')) out.push_back(to_double({tok, e->line}));
  };

  MobilityConfig c;
  num("domain.a_x", c.domain.width);
  num("domain.a_y", c.domain.height);
  if (const Entry* e = get("domain.boundary")) {
    if (e->value == "bounded") c.domain.mode = BoundaryMode::bounded;
    else if (e->value == "torus") c.domain.mode = BoundaryMode::torus;
    else throw ParseError(e->line, "boundary must be bounded or torus");
  }
  num("lambda", c.lambda);
  num("r", c.r);
  c.rho_detect = opt_num("rho_detect");
  num("eps", c.eps);

  if (const Entry* e = get("variant.kind")) {
    using K = ModelVariant::Kind;
    if (e->value == "srw_carryover") c.variant.kind = K::srw_carryover;
    else if (e->value == "srw_reset") c.variant.kind = K::srw_reset;
    else if (e->value == "interpolation") c.variant.kind = K::interpolation;
    else if (e->value == "classical_rwp") c.variant.kind = K::classical_rwp;
    else throw ParseError(e->line, "unknown variant '" + e->value + "'");
  }
  num("variant.p", c.variant.p);
  num("variant.R", c.variant.R);

  {
    std::string kind = "uniform_domain";
    int kind_line = 0;
    if (const Entry* e = get("waypoint.kind")) kind = e->value, kind_line = e->line;
    double radius = 1.0, beta = 1.5, scale = 1.0, background = 0.0;
    num("waypoint.radius", radius);
    num("waypoint.beta", beta);
    num("waypoint.scale", scale);
    num("waypoint.background_weight", background);
    std::vector<Hotspot> spots;
    if (const Entry* e = get("waypoint.hotspots"); e && !e->value.empty()) {
      for (const auto& item : detail::split(e->value, ';')) {
        const auto f = detail::split(item, ':');
        if (f.size() != 4) throw ParseError(e->line, "hotspot needs x:y:radius:weight");
        spots.push_back({{to_double({f[0], e->line}), to_double({f[1], e->line})},
                         to_double({f[2], e->line}),
                         to_double({f[3], e->line})});
      }
    }
    if (kind == "uniform_domain") c.waypoint = UniformDomain{};
    else if (kind == "ball_uniform") c.waypoint = BallUniform{radius};
    else if (kind == "annulus_uniform") c.waypoint = AnnulusUniform{radius};
    else if (kind == "centered_power_tail") c.waypoint = CenteredPowerTail{beta, scale};
    else if (kind == "hotspot_mixture") c.waypoint = HotspotMixture{spots, background};
    else throw ParseError(kind_line, "unknown waypoint kind '" + kind + "'");
  }

  {
    std::string kind = "uniform";
    int kind_line = 0;
    if (const Entry* e = get("velocity.kind")) kind = e->value, kind_line = e->line;
    UniformSpeed u{1.0, 2.0};
    num("velocity.v_minus", u.v_minus);
    num("velocity.v_plus", u.v_plus);
    TabulatedSpeed tab;
    if (const Entry* e = get("velocity.table"); e && !e->value.empty()) {
      for (const auto& item : detail::split(e->value, ';')) {
        const auto f = detail::split(item, ':');
        if (f.size() != 2) throw ParseError(e->line, "table entry needs speed:density");
        tab.knots.emplace_back(to_double({f[0], e->line}), to_double({f[1], e->line}));
      }
    }
    if (kind == "uniform") c.velocity = u;
    else if (kind == "truncated_density") c.velocity = tab;
    else throw ParseError(kind_line, "unknown velocity kind '" + kind + "'");
  }

  {
    std::string kind = "deterministic";
    int kind_line = 0;
    if (const Entry* e = get("alarm.kind")) kind = e->value, kind_line = e->line;
    double value = 20.0, rate = 1.0, lo = 1.0, hi = 2.0;
    num("alarm.value", value);
    num("alarm.rate", rate);
    num("alarm.lo", lo);
    num("alarm.hi", hi);
    if (kind == "deterministic") c.alarm = DeterministicAlarm{value};
    else if (kind == "exponential") c.alarm = ExponentialAlarm{rate};
    else if (kind == "uniform") c.alarm = UniformAlarm{lo, hi};
    else throw ParseError(kind_line, "unknown alarm kind '" + kind + "'");
  }

  num("run.t_max", c.t_max);
  num("run.t_step", c.t_step);
  integer("run.reps", c.reps);
  if (const Entry* e = get("run.seed")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(e->value.c_str(), &end, 10);
    if (e->value.empty() || *end != '\0' || e->value[0] == '-') throw ParseError(e->line, "seed must be a non-negative integer");
    c.seed = v;
  }
  c.burn_in = opt_num("run.burn_in");
  integer("run.mc_reps", c.mc_reps);

  {
    const auto tx = opt_num("target.x"), ty = opt_num("target.y");
    if (tx.has_value() != ty.has_value()) throw ValidationError("target", "set both target.x and target.y");
    if (tx) c.target = Point2{*tx, *ty};
  }
  {
    const auto x0 = opt_num("region.x0"), y0 = opt_num("region.y0");
    const auto w = opt_num("region.width"), h = opt_num("region.height");
    const int n = x0.has_value() + y0.has_value() + w.has_value() + h.has_value();
    if (n != 0 && n != 4) throw ValidationError("region", "set all of region.x0, y0, width, height");
    if (n == 4) c.region = RectDomain{*w, *h, BoundaryMode::bounded, *x0, *y0};
  }
  list("percolation.p_grid", c.p_grid);
  list("percolation.lambda_grid", c.lambda_grid);
  integer("stationary.walkers", c.stationary_walkers);
  integer("stationary.samples", c.stationary_samples);
  integer("stationary.bins", c.bins);
  if (const Entry* e = get("output.dir")) c.output_dir = e->value;

  for (const auto& [key, entry] : entries)
    if (!used.count(key)) throw ParseError(entry.line, "unknown key '" + key + "'");

  validate(c);
  return c;
}

}  // namespace srw
