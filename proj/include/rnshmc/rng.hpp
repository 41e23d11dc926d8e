#pragma once

#include <cstdint>
#include <random>

namespace rnshmc {

using Rng = std::mt19937_64;

/// Independent random sub-streams derived from one root seed. Each component
/// draws from its own stream so that enabling one feature (jittered step
/// counts, say) leaves the draws of every other component unchanged.
enum class Stream : std::uint32_t {
  data = 1,
  nodes = 2,
  momentum = 3,
  acceptance = 4,
  jitter = 5,
  adaptation = 6,
  subsample = 7,
};

inline Rng make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace rnshmc
