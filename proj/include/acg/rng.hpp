#pragma once

#include <cstdint>
#include <random>

namespace acg {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive decorrelated seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Seed of the independent stream for sample `index` under a run seed. Stream
// i of seed s is always the same generator, regardless of how samples are
// scheduled across threads.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(stream_seed(seed, index));
}

// Uniform integer in [0, n). n must be positive.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Uniform double in [0, 1).
double uniform_unit(Rng& rng);

}  // namespace acg
