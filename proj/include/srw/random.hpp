#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace srw {

/// Counter-based random stream (Philox4x32-10). The seed is the key and the
/// stream id occupies the upper half of the counter, so streams with distinct
/// ids never overlap and can be created independently by any worker.
///
/// Satisfies UniformRandomBitGenerator, so std distributions accept it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  /// A child stream keyed by (seed, hash of this stream id and sub).
  RngStream substream(std::uint64_t sub) const {
    return RngStream(seed_, splitmix(stream_ ^ splitmix(sub + 0x632BE59BD9B4E019ULL)));
  }

  result_type operator()() {
    if (have_ == 0) refill();
    return buffer_[--have_];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  bool bernoulli(double p) { return uniform() < p; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  void refill() {
    std::uint32_t ctr[4] = {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t key[2] = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr[0] = hi1 ^ ctr[1] ^ key[0];
      ctr[1] = lo1;
      ctr[2] = hi0 ^ ctr[3] ^ key[1];
      ctr[3] = lo0;
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    ++counter_;
    buffer_[0] = (std::uint64_t{ctr[0]} << 32) | ctr[1];
    buffer_[1] = (std::uint64_t{ctr[2]} << 32) | ctr[3];
    have_ = 2;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t buffer_[2] = {0, 0};
  int have_ = 0;
};

}  // namespace srw
