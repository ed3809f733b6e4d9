#pragma once

#include <cstdint>

namespace occupancy {

/// Counter-based pseudo-random generator (splitmix64 output function).
/// Streams derived from (master_seed, stream_id) are statistically
/// independent, so parallel replications can each own one without any
/// coordination. All distributions are implemented on top of the raw
/// 64-bit output, so sequences are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(mix(master_seed) ^ mix(stream_id * 0xbf58476d1ce4e5b9ull + 1));
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1).
  double uniform_pos() {
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return u;
  }

  double exponential() ;
  double normal();
  double gamma(double shape);
  double beta(double a, double b);
  std::uint64_t poisson(double mean);

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double normal_cache_ = 0.0;
  bool has_normal_cache_ = false;
};

}  // namespace occupancy
