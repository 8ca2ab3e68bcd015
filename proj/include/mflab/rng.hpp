#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mflab {

/// splitmix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t avalanche64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Stream derivation rule: stream(id) is seeded with
/// avalanche64(seed + GOLDEN * (id + 1)). Identical (seed, id) pairs give
/// identical streams within this implementation; that is the only
/// reproducibility contract (no cross-implementation bit-exactness).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  return avalanche64(seed + kGolden * (stream_id + 1));
}

/// Chains mix_seed over several tags, e.g. (experiment, cell, purpose).
inline std::uint64_t mix_tags(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = seed;
  for (std::uint64_t t : tags) s = mix_seed(s, t);
  return s;
}

/// A single random stream. Uniforms are derived from the top 53 bits of the
/// engine output so draws are reproducible independent of libstdc++
/// distribution internals.
class RngStream {
 public:
  explicit RngStream(std::uint64_t mixed_seed) : eng_(mixed_seed) {}

  std::uint64_t u64() { return eng_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (rate > 0).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 eng_;
};

struct RngSpec {
  std::uint64_t seed = 0;
  RngStream stream(std::uint64_t stream_id) const { return RngStream(mix_seed(seed, stream_id)); }
};

}  // namespace mflab
