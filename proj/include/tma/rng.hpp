#pragma once

#include <cstdint>
#include <limits>

namespace tma {

/// SplitMix64 (Steele, Lea, Flood 2014). Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent generator for (seed, stream, index); lets Monte-Carlo symbols be
/// drawn in any order or on any worker with identical results.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return SplitMix64(SplitMix64::mix(SplitMix64::mix(seed ^ SplitMix64::mix(stream + 0x632be59bd9b4e019ULL)) + index));
}

}  // namespace tma
