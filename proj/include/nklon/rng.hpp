#ifndef NKLON_RNG_HPP
#define NKLON_RNG_HPP

#include <cstdint>

namespace nklon {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// The project-wide PRNG. splitmix64 everywhere: cheap, seedable from a
// single 64-bit word, and every instance document records the algorithm
// name so streams stay reproducible across versions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform in [0, bound) by widening multiply; consumes exactly one
  // 64-bit draw so parallel streams never lose alignment. The modulo
  // bias is below bound/2^64.
  std::uint64_t bounded(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  // Uniform double in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Seed for an independent substream. Derivation is a pure function of
// (seed, stream), so generation order is free to change without
// perturbing any stream's contents.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(substream_seed(seed, stream));
}

}  // namespace nklon

#endif
