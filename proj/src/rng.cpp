#include "dynrcm/rng.hpp"

#include <cmath>

namespace dynrcm {

std::uint64_t RandomSeed::key() const noexcept {
  std::uint64_t k = mix64(master ^ 0x243F6A8885A308D3ULL);
  for (std::uint64_t index : path) {
    k = mix64(k + mix64(index ^ 0x13198A2E03707344ULL));
  }
  return k;
}

RandomSeed derive_seed(const RandomSeed& seed, std::uint64_t index) {
  RandomSeed out = seed;
  out.path.push_back(index);
  return out;
}

RandomSeed derive_seed(const RandomSeed& seed, std::initializer_list<std::uint64_t> indices) {
  RandomSeed out = seed;
  out.path.insert(out.path.end(), indices.begin(), indices.end());
  return out;
}

double Stream::exponential(double rate) noexcept { return -std::log(uniform_open()) / rate; }

std::uint64_t Stream::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace dynrcm
