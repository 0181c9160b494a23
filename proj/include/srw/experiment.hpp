#pragma once

// Subcommand drivers: each runs one headline experiment for a config and
// writes its CSV results plus a JSON run-metadata file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "srw/config.hpp"
#include "srw/detection.hpp"
#include "srw/errors.hpp"
#include "srw/mobility.hpp"
#include "srw/parallel.hpp"
#include "srw/percolation.hpp"
#include "srw/random.hpp"
#include "srw/sampling.hpp"
#include "srw/stationary.hpp"
#include "srw/trace.hpp"

namespace srw {

inline constexpr const char* kVersion = "1.0.0";

enum class Subcommand { detect, mobile_detect, cover, stationary, percolate, trace };
enum class TraceFormat { native, bonnmotion, both };

inline std::optional<Subcommand> parse_subcommand(const std::string& s) {
  if (s == "detect") return Subcommand::detect;
  if (s == "mobile-detect") return Subcommand::mobile_detect;
  if (s == "cover") return Subcommand::cover;
  if (s == "stationary") return Subcommand::stationary;
  if (s == "percolate") return Subcommand::percolate;
  if (s == "trace") return Subcommand::trace;
  return std::nullopt;
}

inline const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::detect: return "detect";
    case Subcommand::mobile_detect: return "mobile-detect";
    case Subcommand::cover: return "cover";
    case Subcommand::stationary: return "stationary";
    case Subcommand::percolate: return "percolate";
    case Subcommand::trace: return "trace";
  }
  return "?";
}

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 1;
  long reps = 100;
  TraceFormat format = TraceFormat::native;
  unsigned workers = worker_count();
  /// Diagnostics such as the eroded-domain warning.
  std::ostream* log = &std::cerr;
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  nlohmann::json metadata;
};

namespace detail {

/// Collects output files as temporaries and renames them into place on
/// commit; anything uncommitted is removed on destruction.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& name : names_) std::filesystem::remove(temp_path(name), ec);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(temp_path(name), std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + temp_path(name).string());
    names_.push_back(name);
    f << content;
    f.close();
    if (!f) throw IoError("write failed: " + temp_path(name).string());
  }

  std::vector<std::filesystem::path> commit() {
    std::vector<std::filesystem::path> out;
    for (const auto& name : names_) {
      std::error_code ec;
      std::filesystem::rename(temp_path(name), dir_ / name, ec);
      if (ec) throw IoError("cannot finalize " + (dir_ / name).string() + ": " + ec.message());
      out.push_back(dir_ / name);
    }
    committed_ = true;
    return out;
  }

 private:
  std::filesystem::path temp_path(const std::string& name) const { return dir_ / (name + ".partial"); }
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

inline std::string fmt_fixed(double v, int digits = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string header_comment(const MobilityConfig& cfg, std::uint64_t seed) {
  return "config_hash=" + config_hash(cfg) + " seed=" + std::to_string(seed);
}

inline std::string samples_csv(const MobilityConfig& cfg, std::uint64_t seed,
                               std::span<const std::optional<double>> samples) {
  std::ostringstream o;
  o << "# " << header_comment(cfg, seed) << '\n' << "replication,time\n";
  for (std::size_t i = 0; i < samples.size(); ++i)
    o << i << ',' << (samples[i] ? fmt_double(*samples[i]) : std::string("inf")) << '\n';
  return o.str();
}

inline std::string survival_csv(const MobilityConfig& cfg, std::uint64_t seed, const SurvivalCurve& c) {
  std::ostringstream o;
  o << "# " << header_comment(cfg, seed) << '\n' << "t,survival,ci_lo,ci_hi,bound\n";
  for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
    o << fmt_fixed(c.t_grid[i]) << ',' << fmt_fixed(c.survival[i]) << ',' << fmt_fixed(c.ci_lo[i]) << ','
      << fmt_fixed(c.ci_hi[i]) << ',';
    if (!c.bound.empty()) o << fmt_fixed(c.bound[i], 9);
    o << '\n';
  }
  return o.str();
}

inline nlohmann::json config_json(const MobilityConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  std::istringstream in(emit_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    j[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return j;
}

inline nlohmann::json bounds_json(const BoundConstants& b) {
  return {{"c1", b.c1},         {"c2", b.c2},
          {"q", b.q},           {"q_star", b.q_star},
          {"q_star_se", b.q_star_se}, {"c1_as_printed", b.c1_as_printed},
          {"c_mobile", b.c_mobile}, {"p_home", b.p_home}};
}

/// Poisson homes on the domain, each simulated past t_max.
inline std::vector<WalkerTrajectory> simulate_population(const MobilityConfig& cfg, RngStream& rng,
                                                         double t_max) {
  const auto homes = sample_ppp(cfg.domain, cfg.lambda, rng);
  std::vector<WalkerTrajectory> walkers;
  walkers.reserve(homes.size());
  for (const Point2 h : homes) walkers.push_back(simulate_walker(h, cfg, rng, t_max));
  return walkers;
}

inline std::optional<BoundConstants> try_bounds(const MobilityConfig& cfg, Point2 target, std::uint64_t seed,
                                                unsigned workers, nlohmann::json& meta) {
  try {
    auto b = compute_bound_constants(cfg, target, cfg.mc_reps, seed, workers);
    meta["bound_constants"] = bounds_json(b);
    return b;
  } catch (const DegenerateBound& e) {
    meta["bound_constants"] = nullptr;
    meta["bound_error"] = e.what();
    return std::nullopt;
  }
}

/// Product of the one-dimensional marginals 6/a^3 (a u - u^2) on the domain;
/// equals the square polynomial density when a_x = a_y.
inline double rect_rwp_density(const RectDomain& d, double x, double y) {
  const double u = x - d.x0, v = y - d.y0;
  const double ax = d.width, ay = d.height;
  return 36.0 / (ax * ax * ax * ay * ay * ay) * (u * u - ax * u) * (v * v - ay * v);
}

}  // namespace detail

/// Runs one subcommand and writes its files into opts.out_dir. Outputs depend
/// only on (cfg, seed, reps), not on the worker count.
inline RunResult run_experiment(const MobilityConfig& cfg_in, Subcommand cmd, const RunOptions& opts) {
  using detail::fmt_double;
  MobilityConfig cfg = cfg_in;
  cfg.seed = opts.seed;
  cfg.reps = static_cast<int>(opts.reps);
  validate(cfg);

  detail::OutputSet out(opts.out_dir);
  nlohmann::json meta;
  meta["tool"] = "srw";
  meta["version"] = kVersion;
  meta["subcommand"] = subcommand_name(cmd);
  meta["seed"] = opts.seed;
  meta["reps"] = opts.reps;
  meta["config_hash"] = config_hash(cfg);
  meta["config"] = detail::config_json(cfg);

  const auto grid = make_grid(cfg.t_max, cfg.t_step);
  const Point2 target = cfg.target_point();

  switch (cmd) {
    case Subcommand::detect: {
      const double rho = cfg.rho();
      try {
        check_target(cfg.domain, target, rho);
      } catch (const TargetOutsideErodedDomain& e) {
        if (opts.log) *opts.log << "warning: " << e.what() << '\n';
        meta["warning"] = e.what();
      }
      const auto samples = run_replications(
          [&](RngStream& rng) {
            const auto walkers = detail::simulate_population(cfg, rng, cfg.t_max);
            return detect_static(walkers, target, rho, cfg.t_max, cfg.domain);
          },
          opts.reps, opts.seed, opts.workers);
      SurvivalCurve curve = survival_from_samples(samples, grid);
      if (const auto b = detail::try_bounds(cfg, target, opts.seed, opts.workers, meta))
        curve.bound = exponential_bound(grid, std::max(1.0, b->c1), b->c2);
      meta["rho"] = rho;
      meta["target"] = {target.x, target.y};
      meta["censored_frac"] = curve.censored_frac;
      out.write("detect_samples.csv", detail::samples_csv(cfg, opts.seed, samples));
      out.write("detect_survival.csv", detail::survival_csv(cfg, opts.seed, curve));
      break;
    }
    case Subcommand::mobile_detect: {
      const double rho = cfg.r;
      const auto samples = run_replications(
          [&](RngStream& rng) {
            const auto walkers = detail::simulate_population(cfg, rng, cfg.t_max);
            const auto extra = simulate_walker(target, cfg, rng, cfg.t_max);
            return detect_mobile(walkers, extra, rho, cfg.t_max, cfg.domain);
          },
          opts.reps, opts.seed, opts.workers);
      const SurvivalCurve curve = survival_from_samples(samples, grid);
      detail::try_bounds(cfg, target, opts.seed, opts.workers, meta);
      meta["rho"] = rho;
      meta["extra_home"] = {target.x, target.y};
      meta["censored_frac"] = curve.censored_frac;
      out.write("mobile_samples.csv", detail::samples_csv(cfg, opts.seed, samples));
      out.write("mobile_survival.csv", detail::survival_csv(cfg, opts.seed, curve));
      break;
    }
    case Subcommand::cover: {
      const RectDomain region = cfg.region_or_default();
      std::size_t n_centers = 0;
      const auto samples = run_replications(
          [&](RngStream& rng) {
            const auto walkers = detail::simulate_population(cfg, rng, cfg.t_max);
            const auto res = coverage_time(walkers, region, cfg.r, cfg.eps, cfg.t_max, cfg.domain);
            return res.time;
          },
          opts.reps, opts.seed, opts.workers);
      n_centers = cover_with_balls(region, cfg.eps).size();
      SurvivalCurve curve = survival_from_samples(samples, grid);
      if (const auto b = detail::try_bounds(cfg, target, opts.seed, opts.workers, meta)) {
        // Union bound over the cover centers.
        curve.bound = exponential_bound(grid, static_cast<double>(n_centers) * std::max(1.0, b->c1), b->c2);
      }
      meta["rho"] = cfg.r - cfg.eps;
      meta["cover_centers"] = n_centers;
      meta["region"] = {region.x0, region.y0, region.width, region.height};
      meta["censored_frac"] = curve.censored_frac;
      out.write("cover_samples.csv", detail::samples_csv(cfg, opts.seed, samples));
      out.write("cover_survival.csv", detail::survival_csv(cfg, opts.seed, curve));
      break;
    }
    case Subcommand::stationary: {
      const auto times = default_sample_times(cfg, cfg.stationary_samples);
      const auto snaps =
          stationary_positions(cfg, cfg.stationary_walkers, cfg.burn_in_time(), times, opts.seed, opts.workers);
      SpatialHistogram hist(cfg.domain, cfg.bins, cfg.bins);
      for (const auto& s : snaps) hist.add(s);
      const auto f = [&](double x, double y) { return detail::rect_rwp_density(cfg.domain, x, y); };
      std::ostringstream csv;
      csv << "# " << detail::header_comment(cfg, opts.seed) << '\n';
      write_histogram_csv(csv, hist, f);
      meta["samples"] = hist.total();
      meta["burn_in"] = cfg.burn_in_time();
      if (hist.total() > 0) meta["tv_distance"] = density_distance(hist, f);
      out.write("stationary_histogram.csv", csv.str());
      break;
    }
    case Subcommand::percolate: {
      std::ostringstream csv;
      csv << "# " << detail::header_comment(cfg, opts.seed) << '\n'
          << "replication,lambda,p,points,largest,crossing_lr,crossing_tb\n";
      meta["connect_radius_convention"] = "connect_radius = 2 * radius argument";
      if (cfg.variant.kind == ModelVariant::Kind::interpolation) {
        const auto res = phase_experiment(cfg, cfg.p_grid, opts.reps, opts.seed, false, opts.workers);
        std::ostringstream full;
        full << "# " << detail::header_comment(cfg, opts.seed) << '\n'
             << "replication,lambda,p,points,largest,crossing_lr,crossing_tb\n";
        for (const auto& r : res.rows) {
          csv << r.replication << ',' << fmt_double(cfg.lambda) << ',' << fmt_double(r.p) << ',' << r.thinned_points
              << ',' << r.thinned_largest << ',' << (r.thinned_lr ? 1 : 0) << ',' << (r.thinned_tb ? 1 : 0) << '\n';
          full << r.replication << ',' << fmt_double(cfg.lambda) << ',' << fmt_double(r.p) << ',' << r.walkers << ','
               << r.full_largest << ',' << (r.full_lr ? 1 : 0) << ',' << (r.full_tb ? 1 : 0) << '\n';
        }
        if (res.thinned_radius) meta["thinned_connect_radius"] = *res.thinned_radius;
        else meta["thinned_skipped"] = "RadiusUnderflow: r <= R/2";
        meta["full_connect_radius"] = 2.0 * cfg.r;
        nlohmann::json per_p = nlohmann::json::array();
        for (std::size_t i = 0; i < res.p_grid.size(); ++i) {
          const auto f = res.retained_fraction(i);
          per_p.push_back({{"p", res.p_grid[i]},
                           {"retained_fraction", f.value},
                           {"retained_fraction_se", f.se},
                           {"thinned_crossing", res.thinned_crossing(i)},
                           {"full_crossing", res.full_crossing(i)}});
        }
        meta["phase"] = per_p;
        out.write("percolate_thinned.csv", csv.str());
        out.write("percolate_full.csv", full.str());
      } else {
        std::vector<double> lambdas = cfg.lambda_grid;
        if (lambdas.empty()) lambdas.push_back(cfg.lambda);
        const double radius = 2.0 * cfg.r;
        const auto curve = estimate_lambda_c(radius, cfg.domain.width, lambdas, opts.reps, opts.seed, opts.workers);
        for (std::size_t idx = 0; idx < curve.runs.size(); ++idx) {
          const auto& r = curve.runs[idx];
          csv << idx % static_cast<std::size_t>(opts.reps) << ','
              << fmt_double(lambdas[idx / static_cast<std::size_t>(opts.reps)]) << ",," << r.points << ','
              << r.largest << ',' << (r.crossing_lr ? 1 : 0) << ',' << (r.crossing_tb ? 1 : 0) << '\n';
        }
        meta["connect_radius"] = radius;
        if (curve.lambda_c) meta["lambda_c_hat"] = *curve.lambda_c;
        else meta["lambda_c_hat"] = nullptr;
        out.write("percolate.csv", csv.str());
      }
      break;
    }
    case Subcommand::trace: {
      RngStream rng(opts.seed, 0);
      const auto walkers = detail::simulate_population(cfg, rng, cfg.t_max);
      if (walkers.empty()) throw IoError("no walkers generated; increase lambda or the domain");
      meta["walkers"] = walkers.size();
      if (opts.format != TraceFormat::bonnmotion) {
        std::ostringstream o;
        export_native(o, walkers, cfg.domain, detail::header_comment(cfg, opts.seed));
        out.write("trace.srw", o.str());
      }
      if (opts.format != TraceFormat::native) {
        std::ostringstream o;
        export_bonnmotion(o, walkers);
        out.write("trace.bonnmotion", o.str());
        meta["bonnmotion_dialect"] = "waypoint list: t x y triples per node line";
      }
      break;
    }
  }

  out.write("metadata.json", meta.dump(2) + "\n");
  RunResult res;
  res.files = out.commit();
  res.metadata = std::move(meta);
  return res;
}

}  // namespace srw
