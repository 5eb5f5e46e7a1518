#pragma once

#include <cstdint>
#include <initializer_list>

namespace qcp {

// SplitMix64 used both as a stand-alone generator and to derive
// independent streams from (seed, tag...) tuples.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [0, 2*pi).
  double uniform_angle() { return uniform() * 6.283185307179586476925286766559; }

private:
  std::uint64_t state_;
};

// Mixes a master seed with stream identifiers so that parallel or
// reordered consumers get independent, scheduling-invariant streams.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> tags) {
  SplitMix64 g(seed ^ 0xd6e8feb86659fd93ULL);
  std::uint64_t s = g.next();
  for (std::uint64_t t : tags) {
    SplitMix64 h(s ^ (t + 0x9e3779b97f4a7c15ULL));
    s = h.next();
  }
  return s;
}

} // namespace qcp
