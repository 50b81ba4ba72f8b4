#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace cogrelay {

namespace detail {

// splitmix64 step: advances the counter and returns the mixed output.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// One-shot finalizer (splitmix64 output function on a fixed input).
inline std::uint64_t mix64(std::uint64_t x) {
  return splitmix64(x);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/**
 * Derives a seed from a base seed and a list of coordinates (grid indices,
 * replication numbers, mode tags). Distinct coordinate tuples give unrelated
 * seeds; the same tuple always gives the same seed.
 */
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = detail::mix64(base ^ 0x8f1bbcdc1d21495dull);
  for (std::uint64_t c : coords) {
    h = detail::mix64(h ^ detail::mix64(c));
  }
  return h;
}

/**
 * Deterministic stream of pseudo-random numbers (xoshiro256++ core, state
 * seeded through splitmix64). Streams are cheap value types; copying one
 * forks the sequence.
 *
 * substream(name) derives an independent child stream from the stored seed
 * and the name only, so the set of draws made on the parent does not affect
 * any child. This keeps per-process draws stable when unrelated code adds
 * or removes draws elsewhere.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = detail::splitmix64(x);
    // xoshiro's one forbidden state; unreachable from splitmix in practice.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t seed() const { return seed_; }

  RngStream substream(std::string_view name) const {
    return RngStream(detail::mix64(seed_ ^ detail::fnv1a64(name)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53 significant bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Modulo bias is below 2^-32 for the small n
  // used here (action counts, tie sets).
  std::uint32_t uniform_int(std::uint32_t n) {
    return static_cast<std::uint32_t>(next_u64() % n);
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

}  // namespace cogrelay
