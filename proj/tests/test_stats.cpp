#include <catch_amalgamated.hpp>

#include <cmath>

#include "srw/random.hpp"
#include "srw/stats.hpp"

using namespace srw;
using Catch::Approx;

TEST_CASE("Wilson interval brackets the point estimate") {
  const auto [lo, hi] = wilson_interval(30, 100);
  CHECK(lo < 0.3);
  CHECK(hi > 0.3);
  CHECK(lo == Approx(0.2189).margin(1e-3));
  CHECK(hi == Approx(0.3958).margin(1e-3));
  const auto [z0, z1] = wilson_interval(0, 50);
  CHECK(z0 == 0.0);
  CHECK(z1 > 0.0);
}

TEST_CASE("Wilson interval for a single trial is wide") {
  for (const long k : {0L, 1L}) {
    const auto [lo, hi] = wilson_interval(k, 1);
    CHECK(hi - lo > 0.75);
  }
}

TEST_CASE("Kolmogorov tail matches reference values") {
  CHECK(kolmogorov_q(1.0) == Approx(0.2699996).margin(1e-6));
  CHECK(kolmogorov_q(1.36) == Approx(0.0494).margin(5e-4));
  CHECK(kolmogorov_q(0.1) == 1.0);
}

TEST_CASE("two-sample KS separates shifted samples and accepts identical laws") {
  RngStream rng(1, 0);
  std::vector<double> a, b, c;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(rng.uniform());
    b.push_back(rng.uniform());
    c.push_back(rng.uniform() + 0.2);
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("chi-square tail agrees with known quantiles") {
  CHECK(chi_square_sf(3.841458820694124, 1) == Approx(0.05).margin(1e-9));
  CHECK(chi_square_sf(37.56623478662507, 20) == Approx(0.01).margin(1e-9));
  CHECK(chi_square_sf(0.0, 5) == 1.0);
}

TEST_CASE("isotonic regression pools adjacent violators") {
  const std::vector<double> y{1, 3, 2, 4};
  const auto fit = isotonic_increasing(y);
  CHECK(fit == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK(isotonic_violation(y, true) == Approx(0.5));
  CHECK(isotonic_violation(std::vector<double>{4, 3, 3, 1}, false) == 0.0);
}

TEST_CASE("linear fit recovers an exact line") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = linear_fit(x, y);
  REQUIRE(f);
  CHECK(f->slope == Approx(2.0));
  CHECK(f->intercept == Approx(1.0));
  CHECK_FALSE(linear_fit(std::vector<double>{1, 1}, std::vector<double>{0, 1}));
}

TEST_CASE("logistic midpoint recovers the half-probability point") {
  std::vector<double> x, s, n;
  for (int i = 0; i <= 10; ++i) {
    const double xi = 1.0 + 0.1 * i;
    const double p = 1.0 / (1.0 + std::exp(-8.0 * (xi - 1.44)));
    x.push_back(xi);
    n.push_back(1000.0);
    s.push_back(std::round(1000.0 * p));
  }
  const auto mid = logistic_midpoint(x, s, n);
  REQUIRE(mid);
  CHECK(*mid == Approx(1.44).margin(0.005));
}

TEST_CASE("mean_with_se scales as one over root n") {
  RngStream rng(2, 0);
  std::vector<double> v;
  for (int i = 0; i < 10000; ++i) v.push_back(rng.uniform());
  const Estimate e = mean_with_se(v);
  CHECK(e.value == Approx(0.5).margin(0.01));
  CHECK(e.se == Approx(std::sqrt(1.0 / 12.0 / 10000.0)).epsilon(0.05));
}
