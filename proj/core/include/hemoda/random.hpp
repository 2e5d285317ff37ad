#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace hemoda {

// Role tags that keep independent random streams apart.
enum class StreamTag : std::uint64_t {
  kPrior = 1,
  kProcessNoise = 2,
  kParameterNoise = 3,
  kMeasurementNoise = 4,
  kObservationNoise = 5,
  kSensorPlacement = 6,
};

/// SplitMix64: 64-bit state, cheap to seed, full period 2^64.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix(state_ += kGolden); }

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Random stream keyed by an integer tuple. The same key always reproduces the
/// same sequence, so draws depend only on (seed, step, iteration, member, ...)
/// and never on scheduling.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> key);

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t bits() { return engine_(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  SplitMix64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hemoda
