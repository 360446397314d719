#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace stylo {

// SplitMix64 (Steele, Lea & Flood; constants as in Vigna's reference
// splitmix64.c). The only generator used anywhere in the library, so every
// shuffle, bootstrap and initialization is reproducible bit-for-bit from a
// 64-bit seed.
//
// Reference vector: seed 1234567 yields 6457827717110365317,
// 3203168211198807973, 9817491932198370423, 4593380528125082431,
// 16408922859458223821.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound) by rejection sampling; bound > 0.
  constexpr std::uint64_t uniform(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  // Uniform double in [0, 1) from the top 53 bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
  }

  // Standard normal via Box-Muller (one value per call; the pair partner is
  // discarded so the stream position stays a simple function of call count).
  double normal() noexcept;

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

// Fisher-Yates shuffle, iterating i from n-1 down to 1 and swapping with
// uniform(i + 1).
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace stylo
