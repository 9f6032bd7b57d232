#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <vector>

namespace dynrcm {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// A master seed plus a stream path (experiment -> replica -> sub-stream).
///
/// The stream key is folded from the path with `mix64`; for a fixed prefix
/// the map index -> key is injective, so sibling streams never share a key.
struct RandomSeed {
  std::uint64_t master = 0;
  std::vector<std::uint64_t> path;

  std::uint64_t key() const noexcept;

  friend bool operator==(const RandomSeed&, const RandomSeed&) = default;
};

RandomSeed derive_seed(const RandomSeed& seed, std::uint64_t index);
RandomSeed derive_seed(const RandomSeed& seed, std::initializer_list<std::uint64_t> indices);

/// Counter-based generator: the i-th output is a pure function of (key, i).
/// Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) noexcept : key_(key) {}
  explicit Stream(const RandomSeed& seed) noexcept : key_(seed.key()) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    return mix64(key_ ^ mix64(++counter_ * 0x9E3779B97F4A7C15ULL));
  }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1p-53; }
  /// Uniform on (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1p-53;
  }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double exponential(double rate) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dynrcm
