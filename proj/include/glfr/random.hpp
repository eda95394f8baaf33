#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace glfr {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Independent stream for replicate `index` (and retry `attempt`) of a run
/// seeded with `seed`. Replicates never share state, so results do not depend
/// on the order in which they are executed.
inline Rng substream(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt = 0) {
  std::uint64_t s = detail::splitmix64(seed);
  s = detail::splitmix64(s ^ (index + 0x632be59bd9b4e019ULL));
  s = detail::splitmix64(s ^ (attempt * 0x8cb92ba72f3d8dd7ULL + 1));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

/// Uniform draw on the open interval (0, 1) from 53 random bits. Defined here
/// rather than through std::uniform_real_distribution so streams are identical
/// across standard library implementations.
template <class URBG>
double uniform_open(URBG& rng) {
  static_assert(URBG::max() - URBG::min() >= 0xffffffffffffffffULL - 1, "needs a 64-bit engine");
  const std::uint64_t bits = (rng() - URBG::min()) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace glfr
