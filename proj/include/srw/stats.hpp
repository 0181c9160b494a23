#pragma once

// Small statistical toolkit shared by the experiment modules.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace srw {

/// A Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline Estimate mean_with_se(std::span<const double> v) {
  return {mean(v), v.size() > 1 ? std::sqrt(variance(v) / static_cast<double>(v.size())) : 0.0};
}

/// Wilson score interval for k successes in n trials.
inline std::pair<double, double> wilson_interval(long k, long n, double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {k <= 0 ? 0.0 : std::max(0.0, center - half), k >= n ? 1.0 : std::min(1.0, center + half)};
}

/// Kolmogorov survival function Q(x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2).
inline double kolmogorov_q(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value (Stephens'
/// small-sample correction).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

/// Weighted least-squares isotonic (non-decreasing) fit by pool-adjacent-violators.
inline std::vector<double> isotonic_increasing(std::span<const double> y, std::span<const double> w = {}) {
  struct Block {
    double sum;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    blocks.push_back({y[i] * wi, wi, 1});
    while (blocks.size() > 1) {
      const Block& hi = blocks.back();
      const Block& lo = blocks[blocks.size() - 2];
      if (lo.sum / lo.weight <= hi.sum / hi.weight) break;
      const Block merged{lo.sum + hi.sum, lo.weight + hi.weight, lo.count + hi.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.sum / b.weight);
  return out;
}

inline std::vector<double> isotonic_decreasing(std::span<const double> y) {
  std::vector<double> neg(y.begin(), y.end());
  for (double& v : neg) v = -v;
  auto fit = isotonic_increasing(neg);
  for (double& v : fit) v = -v;
  return fit;
}

/// Largest absolute deviation of y from its isotonic fit.
inline double isotonic_violation(std::span<const double> y, bool increasing) {
  const auto fit = increasing ? isotonic_increasing(y) : isotonic_decreasing(y);
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - fit[i]));
  return worst;
}

struct LinearFit {
  double intercept;
  double slope;
};

inline std::optional<LinearFit> linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || x.size() != y.size()) return std::nullopt;
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  const double b = sxy / sxx;
  return LinearFit{my - b * mx, b};
}

/// Maximum-likelihood logistic curve P(x) = 1 / (1 + exp(-(b0 + b1 x))) for
/// successes[i] out of trials[i] at x[i]. Returns the x where P = 1/2, or
/// nothing if the fit does not converge to an increasing curve.
inline std::optional<double> logistic_midpoint(std::span<const double> x, std::span<const double> successes,
                                               std::span<const double> trials) {
  // Center and scale x for conditioning.
  const double mx = mean(x);
  double sx = 0.0;
  for (const double v : x) sx = std::max(sx, std::abs(v - mx));
  if (sx == 0.0) return std::nullopt;
  double b0 = 0.0, b1 = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = (x[i] - mx) / sx;
      const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * u)));
      const double r = successes[i] - trials[i] * p;
      const double w = trials[i] * p * (1.0 - p) + 1e-12;
      g0 += r;
      g1 += r * u;
      h00 += w;
      h01 += w * u;
      h11 += w * u * u;
    }
    const double det = h00 * h11 - h01 * h01;
    if (det <= 0.0) return std::nullopt;
    const double d0 = (h11 * g0 - h01 * g1) / det;
    const double d1 = (h00 * g1 - h01 * g0) / det;
    b0 += d0;
    b1 += d1;
    if (!std::isfinite(b0) || !std::isfinite(b1) || std::abs(b1) > 1e6) return std::nullopt;
    if (std::abs(d0) < 1e-10 && std::abs(d1) < 1e-10) {
      if (b1 <= 0.0) return std::nullopt;
      return mx - sx * b0 / b1;
    }
  }
  return std::nullopt;
}

}  // namespace srw
