#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace twostrain {

/// SplitMix64 (Steele, Lea and Flood): a counter-based generator whose n-th
/// output is a fixed bijective mix of seed + n * golden_gamma. Output is
/// identical on every platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr result_type operator()() {
    state_ += kGoldenGamma;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Exponential holding time with the given rate, by CDF inversion.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  constexpr std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Seed of replicate `index` under `master_seed`: the (index+1)-th output of
/// SplitMix64(master_seed). Independent of execution order by construction.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return SplitMix64::mix(master_seed + (index + 1) * SplitMix64::kGoldenGamma);
}

}  // namespace twostrain
