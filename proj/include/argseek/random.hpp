#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace argseek {

using Rng = std::mt19937_64;

// Independent stream for one (seed, episode, purpose) triple, so episodes can
// be replayed or run in any order.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag)};
  return Rng(seq);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace argseek
