// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../tests/oracles.hpp"
#include "srw/srw.hpp"

using namespace srw;
namespace fs = std::filesystem;

namespace tol {
constexpr double kinematics_dt = 1e-3;
constexpr int kinematics_configs = 100;
constexpr double kinematics_seconds = 60;

constexpr long tail_reps = 2000;
constexpr double tail_t_max = 200.0;
constexpr double tail_t_step = 0.25;
constexpr double slope_factor = 0.5;
constexpr double tail_seconds = 300;
constexpr double cover_seconds = 600;

constexpr double dispersion_lo = 0.9, dispersion_hi = 1.1;
constexpr long dispersion_reps = 10000;
constexpr double ks_min_p = 0.01;
constexpr int homogeneity_runs = 1000;
constexpr double homogeneity_level = 0.01;
constexpr double homogeneity_max_reject = 0.02;
constexpr double poisson_seconds = 120;

constexpr double stationary_tv = 0.05;
constexpr long stationary_walkers = 1000, stationary_samples = 1000;
constexpr int stationary_bins = 20;
constexpr double stationary_seconds = 120;

constexpr double mean_trip_reference = 0.5214;
constexpr double se_sigmas = 3.0;
constexpr double se_scaling_lo = 0.6, se_scaling_hi = 1.6;

constexpr int brute_instances = 40;
constexpr std::size_t brute_max_points = 2000;
constexpr long lambda_c_reps = 200;
constexpr double lambda_c_lo = 1.3, lambda_c_hi = 1.6;
constexpr double percolation_seconds = 600;

constexpr long phase_reps = 40;
constexpr double phase_a = 20.0;
constexpr double crossing_hi = 0.9, crossing_lo = 0.1;
constexpr double phase_seconds = 900;
}  // namespace tol

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail, double secs) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs", secs);
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << what << "  [" << detail << "; " << buf
            << "]" << std::endl;
  if (!ok) ++failures;
}

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

MobilityConfig tail_config() {
  MobilityConfig c;
  c.domain = RectDomain{10, 10};
  c.lambda = 0.5;
  c.r = 0.5;
  c.waypoint = UniformDomain{};
  c.velocity = UniformSpeed{1.0, 2.0};
  c.alarm = DeterministicAlarm{20.0};
  c.t_max = tol::tail_t_max;
  c.t_step = tol::tail_t_step;
  return c;
}

std::vector<WalkerTrajectory> population(const MobilityConfig& cfg, RngStream& rng, double t_max) {
  std::vector<WalkerTrajectory> ws;
  for (const Point2 h : sample_ppp(cfg.domain, cfg.lambda, rng)) ws.push_back(simulate_walker(h, cfg, rng, t_max));
  return ws;
}

void kinematics() {
  const auto t0 = Clock::now();
  int agree = 0, detected = 0;
  for (int k = 0; k < tol::kinematics_configs; ++k) {
    RngStream rng(1001, static_cast<std::uint64_t>(k));
    MobilityConfig cfg;
    cfg.domain = RectDomain{10, 10};
    const double vlo = 0.5 + 1.5 * rng.uniform();
    cfg.velocity = UniformSpeed{vlo, vlo * (1.0 + rng.uniform())};
    switch (k % 4) {
      case 0: cfg.variant.kind = ModelVariant::Kind::srw_carryover; break;
      case 1: cfg.variant.kind = ModelVariant::Kind::srw_reset; break;
      case 2: cfg.variant.kind = ModelVariant::Kind::classical_rwp; break;
      default: cfg.variant = ModelVariant{ModelVariant::Kind::interpolation, rng.uniform(), 1.0 + 2.0 * rng.uniform()};
    }
    if (k % 3 == 0) cfg.alarm = ExponentialAlarm{0.05 + 0.2 * rng.uniform()};
    else cfg.alarm = DeterministicAlarm{5.0 + 20.0 * rng.uniform()};
    const double t_max = 30.0;
    const int n = 1 + static_cast<int>(rng.uniform() * 10.0);
    std::vector<WalkerTrajectory> ws;
    for (int i = 0; i < n; ++i) ws.push_back(simulate_walker(sample_uniform(cfg.domain, rng), cfg, rng, t_max));
    const double rho = 0.2 + 1.3 * rng.uniform();
    const Point2 target = sample_uniform(erode(cfg.domain, rho), rng);

    const auto fast = detect_static(ws, target, rho, t_max);
    const auto slow = oracle::stepped_static(ws, target, rho, t_max, tol::kinematics_dt);
    const bool s_ok = fast.has_value() == slow.has_value() && (!fast || std::abs(*fast - *slow) <= tol::kinematics_dt);

    const auto extra = simulate_walker(sample_uniform(cfg.domain, rng), cfg, rng, t_max);
    const auto mf = detect_mobile(ws, extra, rho, t_max);
    const auto ms = oracle::stepped_mobile(ws, extra, rho, t_max, tol::kinematics_dt);
    const bool m_ok = mf.has_value() == ms.has_value() && (!mf || std::abs(*mf - *ms) <= tol::kinematics_dt);

    agree += (s_ok && m_ok) ? 1 : 0;
    detected += (fast ? 1 : 0) + (mf ? 1 : 0);
  }
  const double secs = seconds_since(t0);
  report(1, agree == tol::kinematics_configs && secs < tol::kinematics_seconds,
         "event-driven detection matches the time-stepping oracle",
         std::to_string(agree) + "/" + std::to_string(tol::kinematics_configs) + " configs agree within dt=1e-3, " +
             std::to_string(detected) + " detections",
         secs);
}

// Criterion 2 and 3 share the bound constants.
BoundConstants tail_bounds(const MobilityConfig& cfg) {
  return compute_bound_constants(cfg, cfg.domain.center(), cfg.mc_reps, 2002);
}

void static_tail(const BoundConstants& b) {
  const auto t0 = Clock::now();
  const auto cfg = tail_config();
  const Point2 w = cfg.domain.center();
  const double rho = cfg.rho();
  const auto grid = make_grid(cfg.t_max, cfg.t_step);
  auto curve = estimate_survival(
      [&](RngStream& rng) {
        const auto ws = population(cfg, rng, cfg.t_max);
        return detect_static(ws, w, rho, cfg.t_max);
      },
      tol::tail_reps, grid, 2002);
  const double c1 = std::max(1.0, b.c1);
  const auto bound = exponential_bound(grid, c1, b.c2);
  const double t_from = cfg.diameter() / cfg.vmin();
  bool below = true;
  double worst_gap = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < t_from) continue;
    worst_gap = std::max(worst_gap, curve.ci_hi[i] - bound[i]);
    if (curve.ci_hi[i] >= bound[i]) below = false;
  }
  const auto slope = fit_log_survival_slope(curve);
  const bool decays = slope && *slope <= -tol::slope_factor * b.c2;
  const double secs = seconds_since(t0);
  report(2, below && decays && secs < tol::tail_seconds, "static detection survival has an exponential tail",
         "c1=" + num(c1) + " c2=" + num(b.c2) + " max(ci_hi - bound)=" + num(worst_gap) +
             " slope=" + (slope ? num(*slope) : std::string("none")) + " S(0)=" + num(curve.survival[0]),
         secs);
}

void coverage_tail(const BoundConstants& b) {
  const auto t0 = Clock::now();
  auto cfg = tail_config();
  cfg.eps = 0.1;
  const RectDomain region = cfg.region_or_default();
  const long reps = tol::tail_reps;
  std::vector<std::optional<double>> samples(static_cast<std::size_t>(reps));
  std::vector<char> structure_ok(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t i) {
    RngStream rng(2003, i);
    const auto ws = population(cfg, rng, cfg.t_max);
    const auto cov = coverage_time(ws, region, cfg.r, cfg.eps, cfg.t_max);
    samples[i] = cov.time;
    bool ok = true;
    std::optional<double> worst = 0.0;
    for (std::size_t k = 0; k < cov.centers.size(); ++k) {
      const auto own = detect_static(ws, cov.centers[k], cfg.r - cfg.eps, cfg.t_max);
      if (own != cov.hits[k]) ok = false;
      if (!own) worst.reset();
      else if (worst) worst = std::max(*worst, *own);
    }
    structure_ok[i] = ok && worst == cov.time;
  });
  const auto grid = make_grid(cfg.t_max, cfg.t_step);
  const auto curve = survival_from_samples(samples, grid);
  const auto slope = fit_log_survival_slope(curve);
  const long good = std::count(structure_ok.begin(), structure_ok.end(), 1);
  const bool decays = slope && *slope <= -tol::slope_factor * b.c2;
  const double secs = seconds_since(t0);
  report(3, decays && good == reps && secs < tol::cover_seconds, "coverage time has an exponential tail",
         "slope=" + (slope ? num(*slope) : std::string("none")) + " vs -0.5*c2=" + num(-tol::slope_factor * b.c2) +
             " max-structure " + std::to_string(good) + "/" + std::to_string(reps) +
             " censored=" + num(curve.censored_frac),
         secs);
}

double nearest_to_center(std::span<const Point2> pts, Point2 c) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point2 p : pts) best = std::min(best, norm(p - c));
  return best;
}

void poisson_machinery() {
  const auto t0 = Clock::now();
  const RectDomain dom{10, 10};
  std::vector<double> counts(tol::dispersion_reps);
  for (long i = 0; i < tol::dispersion_reps; ++i) {
    RngStream rng(4001, static_cast<std::uint64_t>(i));
    counts[static_cast<std::size_t>(i)] = static_cast<double>(sample_ppp(dom, 0.5, rng).size());
  }
  const double ratio = variance(counts) / mean(counts);
  const bool dispersion = ratio >= tol::dispersion_lo && ratio <= tol::dispersion_hi;

  std::vector<double> thinned, direct;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    RngStream a(4002, i), b(4003, i);
    const auto full = sample_ppp(dom, 2.0, a);
    const auto kept = thin(full, 0.3, a);
    thinned.push_back(nearest_to_center(kept, dom.center()));
    direct.push_back(nearest_to_center(sample_ppp(dom, 0.6, b), dom.center()));
  }
  const auto ks = ks_two_sample(thinned, direct);
  const bool ks_ok = ks.p_value > tol::ks_min_p;

  const RectDomain torus{10, 10, BoundaryMode::torus};
  int reject_ball = 0, reject_annulus = 0;
  for (int k = 0; k < tol::homogeneity_runs; ++k) {
    RngStream rng(4004, static_cast<std::uint64_t>(k));
    const auto homes = sample_ppp(torus, 5.0, rng);
    reject_ball += displaced_homogeneity_check(homes, BallUniform{2.0}, torus, 5.0, 5, rng).p_value <
                   tol::homogeneity_level;
    reject_annulus += displaced_homogeneity_check(homes, AnnulusUniform{1.0}, torus, 5.0, 5, rng).p_value <
                      tol::homogeneity_level;
  }
  const double rb = reject_ball / static_cast<double>(tol::homogeneity_runs);
  const double ra = reject_annulus / static_cast<double>(tol::homogeneity_runs);
  const bool homog = rb <= tol::homogeneity_max_reject && ra <= tol::homogeneity_max_reject;
  const double secs = seconds_since(t0);
  report(4, dispersion && ks_ok && homog && secs < tol::poisson_seconds,
         "Poisson sampling, thinning and displacement behave as Poisson processes",
         "var/mean=" + num(ratio) + " ks_p=" + num(ks.p_value) + " reject(ball)=" + num(rb) +
             " reject(annulus)=" + num(ra),
         secs);
}

void stationary_density() {
  const auto t0 = Clock::now();
  MobilityConfig cfg;
  cfg.domain = RectDomain{10, 10};
  cfg.variant.kind = ModelVariant::Kind::classical_rwp;
  cfg.velocity = UniformSpeed{1.0, 1.0};
  const auto times = default_sample_times(cfg, tol::stationary_samples);
  const auto snaps = stationary_positions(cfg, tol::stationary_walkers, cfg.burn_in_time(), times, 5001);
  SpatialHistogram h(cfg.domain, tol::stationary_bins, tol::stationary_bins);
  for (const auto& s : snaps) h.add(s);
  const double tv = density_distance(h, [](double x, double y) { return rwp_density(x, y, 10.0); });
  const double secs = seconds_since(t0);
  report(5, tv < tol::stationary_tv && h.total() == tol::stationary_walkers * tol::stationary_samples &&
                secs < tol::stationary_seconds,
         "classical RWP positions follow the polynomial stationary density",
         "TV=" + num(tv) + " samples=" + std::to_string(h.total()), secs);
}

void mean_trip() {
  const auto t0 = Clock::now();
  MobilityConfig unit;
  unit.domain = RectDomain{1, 1};
  unit.variant.kind = ModelVariant::Kind::classical_rwp;
  unit.velocity = UniformSpeed{1.0, 1.0};
  const Estimate e = mean_leg_duration(unit, 1'000'000, 6001);
  const bool unit_ok = std::abs(e.value - tol::mean_trip_reference) <= tol::se_sigmas * e.se;

  MobilityConfig tail;
  tail.domain = RectDomain{10, 10};
  tail.waypoint = CenteredPowerTail{1.5, 1.0};
  std::vector<double> scaled;
  bool finite = true;
  for (const long n : {10'000L, 100'000L, 1'000'000L}) {
    const Estimate t = mean_leg_duration(tail, n, 6002, tail.domain.center());
    finite = finite && std::isfinite(t.value) && std::isfinite(t.se) && t.se > 0;
    scaled.push_back(t.se * std::sqrt(static_cast<double>(n)));
  }
  bool stable = finite;
  for (const double s : scaled) {
    const double r = s / scaled.back();
    stable = stable && r >= tol::se_scaling_lo && r <= tol::se_scaling_hi;
  }
  const double secs = seconds_since(t0);
  report(6, unit_ok && stable, "mean trip duration is finite and matches the unit-square value",
         "unit square " + num(e.value, 6) + " +- " + num(e.se, 2) + "; power tail SE*sqrt(n) = " + num(scaled[0]) +
             ", " + num(scaled[1]) + ", " + num(scaled[2]),
         secs);
}

double percolation(double& lambda_c_out) {
  const auto t0 = Clock::now();
  int equal = 0;
  for (int k = 0; k < tol::brute_instances; ++k) {
    RngStream rng(7001, static_cast<std::uint64_t>(k));
    const double a = 5.0 + 30.0 * rng.uniform();
    const RectDomain dom{a, a * (0.5 + rng.uniform()), k % 2 ? BoundaryMode::torus : BoundaryMode::bounded};
    const double n_target = 1.0 + static_cast<double>(tol::brute_max_points - 1) * rng.uniform();
    const double radius = 0.1 + 2.0 * rng.uniform();
    auto pts = sample_ppp(dom, n_target / dom.area(), rng);
    if (pts.size() > tol::brute_max_points) pts.resize(tol::brute_max_points);
    const auto g = build_graph(pts, radius, dom);
    const auto brute = oracle::brute_edges(pts, radius, dom);
    equal += oracle::graph_edges(g) == brute &&
             clusters(g).sizes.size() == oracle::bfs_components(pts.size(), brute);
  }

  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(1.0 + 0.1 * i);
  const auto curve = estimate_lambda_c(1.0, 32.0, grid, tol::lambda_c_reps, 7002);
  std::vector<double> p;
  for (std::size_t i = 0; i < grid.size(); ++i) p.push_back(curve.probability(i));
  const double violation = isotonic_violation(p, true);
  const double allowed = 3.0 * 0.5 / std::sqrt(static_cast<double>(tol::lambda_c_reps));
  const auto iso = isotonic_increasing(p);
  const bool monotone = std::is_sorted(iso.begin(), iso.end()) && violation <= allowed;
  const bool in_range = curve.lambda_c && *curve.lambda_c >= tol::lambda_c_lo && *curve.lambda_c <= tol::lambda_c_hi;
  lambda_c_out = curve.lambda_c.value_or(std::numeric_limits<double>::quiet_NaN());
  const double secs = seconds_since(t0);
  report(7, equal == tol::brute_instances && in_range && monotone && secs < tol::percolation_seconds,
         "Gilbert graph, clustering and critical intensity",
         std::to_string(equal) + "/" + std::to_string(tol::brute_instances) + " graphs equal brute force; lambda_c=" +
             (curve.lambda_c ? num(*curve.lambda_c) : std::string("none")) + " isotonic violation=" + num(violation),
         secs);
  return lambda_c_out;
}

void phase_transition(double lambda_c) {
  const auto t0 = Clock::now();
  if (!std::isfinite(lambda_c)) {
    report(8, false, "near-home thinning phase transition in p", "no critical intensity estimate", 0.0);
    return;
  }
  MobilityConfig cfg;
  cfg.domain = RectDomain{tol::phase_a, tol::phase_a};
  cfg.r = 1.0;
  cfg.variant = ModelVariant{ModelVariant::Kind::interpolation, 0.0, 1.0};
  cfg.velocity = UniformSpeed{1.0, 2.0};
  cfg.lambda = 3.0 * lambda_c;
  const std::vector<double> ps{0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0};
  const auto res = phase_experiment(cfg, ps, tol::phase_reps, 8001, true);

  bool fractions = true;
  std::ostringstream fr;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto f = res.retained_fraction(i);
    const double expect = (1.0 - ps[i]) * (1.0 - ps[i]);
    const bool ok = f.se > 0 ? std::abs(f.value - expect) <= tol::se_sigmas * f.se : f.value == expect;
    fractions = fractions && ok;
    fr << num(f.value, 3) << (i + 1 < ps.size() ? "," : "");
  }
  const double cross0 = res.thinned_crossing(0);
  const double cross09 = res.thinned_crossing(5);
  const bool crossing = res.thinned_radius && cross0 >= tol::crossing_hi && cross09 <= tol::crossing_lo;

  const std::size_t last = ps.size() - 1;
  const auto& full_p1 = res.snapshots[last];
  const double sa = std::sqrt(tol::phase_a);
  const auto bc = border_center_densities(full_p1, cfg.domain, sa, sa);
  const double lam = cfg.lambda;
  const double border_cap = 9.0 * lam / sa;
  const double center_floor = 2.25 * lam - 18.0 * lam / tol::phase_a;
  const bool border_ok = bc.border.value <= border_cap + tol::se_sigmas * bc.border.se;
  const bool center_ok = bc.center.value >= center_floor - tol::se_sigmas * bc.center.se;

  // Physical-time thinning, reported only.
  RngStream rng(8002, 0);
  auto cfg_half = cfg;
  cfg_half.variant.p = 0.5;
  std::vector<WalkerTrajectory> ws;
  for (const Point2 h : sample_ppp(cfg.domain, cfg.lambda, rng)) ws.push_back(simulate_walker(h, cfg_half, rng, 3.0));
  const double phys = static_cast<double>(near_home_thinning(ws, 2.0, 1.0, ThinningClock::physical_time).size()) /
                      static_cast<double>(ws.size());

  const double secs = seconds_since(t0);
  report(8, fractions && crossing && border_ok && center_ok && secs < tol::phase_seconds,
         "near-home thinning phase transition in p",
         "lambda=" + num(lam) + " retained=" + fr.str() + " crossing(p=0)=" + num(cross0) +
             " crossing(p=0.9)=" + num(cross09) + " border=" + num(bc.border.value) + "<=" + num(border_cap) +
             " center=" + num(bc.center.value) + ">=" + num(center_floor) +
             " physical-time retained(p=0.5)=" + num(phys),
         secs);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void determinism() {
  const auto t0 = Clock::now();
  const fs::path work = fs::temp_directory_path() / "srw_acceptance_determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  {
    std::ofstream cfg(work / "run.cfg");
    cfg << "domain.a_x = 10\ndomain.a_y = 10\nrun.t_max = 40\nrun.mc_reps = 500\n"
           "stationary.walkers = 40\nstationary.samples = 20\npercolation.lambda_grid = 0.5, 1.0, 1.5\n";
    std::ofstream interp(work / "interp.cfg");
    interp << "domain.a_x = 10\ndomain.a_y = 10\nlambda = 1\nr = 1\nvariant.kind = interpolation\n"
              "variant.R = 1\nrun.burn_in = 100\npercolation.p_grid = 0, 0.5, 1\n";
  }
  struct Run {
    std::string sub, cfg, extra;
  };
  const std::vector<Run> runs{{"detect", "run.cfg", ""},        {"mobile-detect", "run.cfg", ""},
                              {"cover", "run.cfg", ""},         {"stationary", "run.cfg", ""},
                              {"percolate", "run.cfg", ""},     {"percolate", "interp.cfg", ""},
                              {"trace", "run.cfg", " --format both"}};
  int identical = 0;
  std::string bad;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::vector<fs::path> dirs;
    bool ok = true;
    for (const char* workers : {"1", "3"}) {
      const fs::path out = work / (std::to_string(k) + "_w" + workers);
      const std::string cmd = std::string("SRW_WORKERS=") + workers + " '" + SRW_CLI_PATH + "' " + runs[k].sub +
                              " --config '" + (work / runs[k].cfg).string() + "' --seed 99 --reps 12 --out '" +
                              out.string() + "'" + runs[k].extra + " > /dev/null 2>&1";
      ok = ok && std::system(cmd.c_str()) == 0;
      dirs.push_back(out);
    }
    std::vector<std::string> names;
    if (ok)
      for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
    ok = ok && !names.empty();
    for (const auto& n : names) ok = ok && fs::exists(dirs[1] / n) && slurp(dirs[0] / n) == slurp(dirs[1] / n);
    if (ok) ++identical;
    else bad += " " + runs[k].sub;
  }
  fs::remove_all(work);
  const double secs = seconds_since(t0);
  report(9, identical == static_cast<int>(runs.size()), "outputs are byte-identical across worker counts",
         std::to_string(identical) + "/" + std::to_string(runs.size()) + " runs identical" +
             (bad.empty() ? "" : "; differing:" + bad),
         secs);
}

}  // namespace

int main() {
  std::cout << "workers: " << worker_count() << std::endl;
  kinematics();
  const auto b = tail_bounds(tail_config());
  std::cout << "bound constants: c1=" << num(b.c1) << " c1_as_printed=" << num(b.c1_as_printed) << " c2=" << num(b.c2)
            << " q=" << num(b.q) << " q_star=" << num(b.q_star) << std::endl;
  static_tail(b);
  coverage_tail(b);
  poisson_machinery();
  stationary_density();
  mean_trip();
  double lambda_c = 0.0;
  percolation(lambda_c);
  phase_transition(lambda_c);
  determinism();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
