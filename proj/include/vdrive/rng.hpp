#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace vdrive {

/// splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// One stream per concern, so changing how often one component draws does
/// not shift the draws seen by the others.
enum class Stream : std::uint64_t {
  kInit = 1,
  kPolicy = 2,
  kReplay = 3,
  kEpsilon = 4,
  kChunks = 5,
  kSplit = 6,
  kWeights = 7,
  kScene = 8,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream) {
  return mix_seed(master ^ mix_seed(static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ull));
}

// Distribution code is written out here rather than using <random>
// distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {0, …, n-1}; n must be positive.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return static_cast<std::size_t>(r % bound);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vdrive
