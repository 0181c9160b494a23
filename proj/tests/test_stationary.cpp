#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "srw/stationary.hpp"

using namespace srw;
using Catch::Approx;

namespace {

MobilityConfig rwp(double a) {
  MobilityConfig c;
  c.domain = RectDomain{a, a};
  c.variant.kind = ModelVariant::Kind::classical_rwp;
  c.velocity = UniformSpeed{1.0, 1.0};
  return c;
}

}  // namespace

TEST_CASE("polynomial density: center value, zero boundary, symmetry, unit mass") {
  const double a = 10.0;
  CHECK(rwp_density(5, 5, a) == Approx(9.0 / (4.0 * a * a)).epsilon(1e-14));
  CHECK(rwp_density(0, 3, a) == 0.0);
  CHECK(rwp_density(3, a, a) == 0.0);
  for (const auto& [x, y] : {std::pair{1.3, 7.7}, std::pair{2.0, 9.1}, std::pair{4.4, 0.6}}) {
    CHECK(rwp_density(x, y, a) == Approx(rwp_density(a - x, y, a)).epsilon(1e-13));
    CHECK(rwp_density(x, y, a) == Approx(rwp_density(y, x, a)).epsilon(1e-13));
  }
  SpatialHistogram h(RectDomain{a, a}, 10, 10);
  double total = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) total += integrate_box([&](double x, double y) { return rwp_density(x, y, a); }, h.bin(i, j));
  CHECK(total == Approx(1.0).epsilon(1e-3));
}

TEST_CASE("histogram bookkeeping and total-variation distance") {
  SpatialHistogram h(RectDomain{2, 2}, 2, 2);
  CHECK(h.bin_area() == 1.0);
  for (int k = 0; k < 8; ++k) h.add(Point2{0.5, 0.5});
  const auto uniform = [](double, double) { return 0.25; };
  CHECK(h.total() == 8);
  CHECK(density_distance(h, uniform) == Approx(0.75));

  SpatialHistogram exact(RectDomain{2, 2}, 2, 2);
  for (const Point2 p : {Point2{0.5, 0.5}, Point2{1.5, 0.5}, Point2{0.5, 1.5}, Point2{1.5, 1.5}}) exact.add(p);
  CHECK(density_distance(exact, uniform) == Approx(0.0).margin(1e-15));

  std::ostringstream csv;
  write_histogram_csv(csv, exact, uniform);
  CHECK(csv.str().rfind("bin_x,bin_y,count,expected\n", 0) == 0);
}

TEST_CASE("no walkers means empty snapshots; samples stay in the domain") {
  const auto cfg = rwp(10);
  const std::vector<double> times{0.0, 5.0};
  const auto none = stationary_positions(cfg, 0, 10.0, times, 1);
  REQUIRE(none.size() == 2);
  CHECK(none[0].empty());
  const auto snaps = stationary_positions(cfg, 50, 100.0, times, 1);
  for (const auto& s : snaps) {
    REQUIRE(s.size() == 50);
    for (const Point2 p : s) REQUIRE(cfg.domain.contains(p));
  }
}

TEST_CASE("classical RWP concentrates in the center") {
  const auto cfg = rwp(10);
  const auto times = default_sample_times(cfg, 50);
  const auto snaps = stationary_positions(cfg, 400, cfg.burn_in_time(), times, 2);
  SpatialHistogram h(cfg.domain, 5, 5);
  for (const auto& s : snaps) h.add(s);
  CHECK(h.count(2, 2) > 3 * h.count(0, 0));
  CHECK(h.count(2, 2) > 3 * h.count(4, 4));
}

TEST_CASE("stationary sampling does not depend on the worker count") {
  const auto cfg = rwp(10);
  const std::vector<double> times{0.0, 14.2, 28.4};
  CHECK(stationary_positions(cfg, 30, 50.0, times, 9, 1) == stationary_positions(cfg, 30, 50.0, times, 9, 3));
}

TEST_CASE("Palm ratio of trivial indicators is exactly zero or one") {
  const auto cfg = rwp(10);
  const PredicateRegion all{[](Point2) { return true; }};
  const PredicateRegion none{[](Point2) { return false; }};
  CHECK(palm_ratio_estimate(cfg, all, 2000, 3).value == Approx(1.0).epsilon(1e-12));
  CHECK(palm_ratio_estimate(cfg, none, 2000, 3).value == 0.0);
}

TEST_CASE("Palm ratio of the left half is one half by symmetry") {
  const auto cfg = rwp(10);
  const RectRegion left{RectDomain{5, 10}};
  const Estimate e = palm_ratio_estimate(cfg, left, 200000, 4);
  CHECK(std::abs(e.value - 0.5) < 3.0 * e.se + 1e-3);
  CHECK(e.se < 0.01);
}

TEST_CASE("Palm ratio is additive over disjoint regions") {
  auto cfg = rwp(10);
  cfg.variant.kind = ModelVariant::Kind::srw_carryover;
  cfg.velocity = UniformSpeed{1.0, 2.0};
  const RectRegion a{RectDomain{3, 3, BoundaryMode::bounded, 2, 2}};
  const RectRegion b{RectDomain{3, 3, BoundaryMode::bounded, 5, 2}};
  const RectRegion ab{RectDomain{6, 3, BoundaryMode::bounded, 2, 2}};
  const Estimate ea = palm_ratio_estimate(cfg, a, 100000, 5);
  const Estimate eb = palm_ratio_estimate(cfg, b, 100000, 5);
  const Estimate eab = palm_ratio_estimate(cfg, ab, 100000, 5);
  // Same seed means same trips, so additivity is exact up to rounding.
  CHECK(ea.value + eb.value == Approx(eab.value).epsilon(1e-9));
  const Estimate eb2 = palm_ratio_estimate(cfg, b, 100000, 6);
  const double se = std::sqrt(ea.se * ea.se + eb2.se * eb2.se + eab.se * eab.se);
  CHECK(std::abs(ea.value + eb2.value - eab.value) < 3.0 * se);
}

TEST_CASE("time-average occupation agrees with the Palm ratio") {
  auto cfg = rwp(10);
  cfg.velocity = UniformSpeed{1.0, 2.0};
  const DiskRegion center{{5, 5}, 2.0};
  const Estimate palm = palm_ratio_estimate(cfg, center, 200000, 7);
  const Estimate direct = time_average_occupation(cfg, center, 2000.0, 400, 8, 0.5);
  CHECK(std::abs(palm.value - direct.value) < 3.0 * std::hypot(palm.se, direct.se));
}

TEST_CASE("mean leg duration with degenerate measures is exact") {
  // Carryover with a zero alarm alternates home and a point mass 3 away.
  MobilityConfig cfg;
  cfg.domain = RectDomain{10, 10};
  cfg.velocity = UniformSpeed{1.0, 1.0};
  cfg.alarm = DeterministicAlarm{0.0};
  cfg.waypoint = HotspotMixture{{Hotspot{{4.0, 2.0}, 0.0, 1.0}}, 0.0};
  const Estimate e = mean_leg_duration(cfg, 1000, 1, Point2{1.0, 2.0});
  CHECK(std::abs(e.value - 3.0) < 1e-12);
  CHECK(e.se < 1e-12);
}

TEST_CASE("mean leg duration on the unit square matches the mean-distance integral") {
  const double oracle = oracle::mean_distance_unit_square(1000);
  CHECK(oracle == Approx((2.0 + std::sqrt(2.0) + 5.0 * std::log(1.0 + std::sqrt(2.0))) / 15.0).epsilon(1e-5));
  auto cfg = rwp(1);
  const Estimate e = mean_leg_duration(cfg, 200000, 11);
  CHECK(std::abs(e.value - oracle) < 3.0 * e.se);
}
