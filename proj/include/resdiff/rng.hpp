#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace resdiff {

/// Purpose tags for independent random substreams.
///
/// A substream is identified by (root seed, purpose, run, a, b). The seed of
/// the substream is obtained by folding each key through the SplitMix64
/// finalizer, so adding or removing draws for one purpose never shifts the
/// values seen by another.
enum class Purpose : std::uint64_t {
  kSignalParams = 1,
  kGroundTruth = 2,
  kMeasurement = 3,  // a = node, b = round
  kFdiAttack = 4,    // a = node, b = round
  kLinkAttack = 5,   // a = sender, b = round
  kAttackSelection = 6,
  kRandomTopology = 7,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(root);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

/// SplitMix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// One independent random stream with the handful of draws the simulator needs.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double normal(double variance = 1.0) {
    if (variance == 0.0) {
      (void)standard_(engine_);
      return 0.0;
    }
    return std::sqrt(variance) * standard_(engine_);
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

  SplitMix64& engine() { return engine_; }

 private:
  SplitMix64 engine_;
  std::normal_distribution<double> standard_{0.0, 1.0};
};

/// Substream factory for one Monte Carlo run.
class RunStreams {
 public:
  RunStreams(std::uint64_t root_seed, std::uint64_t run) : root_(root_seed), run_(run) {}

  RngStream at(Purpose purpose, std::uint64_t a = 0, std::uint64_t b = 0) const {
    return RngStream(derive_seed(root_, {static_cast<std::uint64_t>(purpose), run_, a, b}));
  }

  std::uint64_t root_seed() const { return root_; }
  std::uint64_t run() const { return run_; }

 private:
  std::uint64_t root_;
  std::uint64_t run_;
};

}  // namespace resdiff
