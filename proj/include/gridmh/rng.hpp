#pragma once

#include <cstdint>
#include <random>

namespace gridmh {

using Rng = std::mt19937_64;

/// Mixes (seed, id) into a new 64-bit seed. Used to derive independent streams
/// for grid points, replicates and chains without depending on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                    0x9e3779b9u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t id) { return Rng(derive_seed(seed, id)); }

/// Uniform on [0, 1) with 53 random bits; never returns 1.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> normal;
  return normal(rng);
}

}  // namespace gridmh
