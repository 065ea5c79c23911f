#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace camp {

using Engine = std::mt19937_64;

// Purpose-tagged seed derivation. stream_seed(master, "episode_noise", 7)
// always names the same stream, independent of how work is scheduled across
// threads, so parallel runs reproduce serial ones bit for bit.
std::uint64_t stream_seed(std::uint64_t master, std::string_view purpose, std::uint64_t index = 0);

inline Engine make_stream(std::uint64_t master, std::string_view purpose, std::uint64_t index = 0) {
  return Engine(stream_seed(master, purpose, index));
}

// Uniform integer in [0, n). Avoids std::uniform_int_distribution so the
// sequence does not depend on the standard library implementation.
std::uint64_t uniform_index(Engine& rng, std::uint64_t n);

// Uniform double in [0, 1) built from the top 53 bits.
double uniform_unit(Engine& rng);

// Standard normal deviate (Marsaglia polar method, no cached state).
double standard_normal(Engine& rng);

}  // namespace camp
