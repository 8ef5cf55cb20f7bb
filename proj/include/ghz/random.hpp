// Portable random streams for the Monte Carlo engine. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// distributions below are written out so results do not depend on the
// standard library's distribution implementations.
#pragma once

#include <cstdint>
#include <random>

namespace ghz {

using RandomEngine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream for point `index` of a run seeded with `seed`.
RandomEngine make_stream(std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(RandomEngine& engine);

/// Poisson variate. Inversion for small means, Hörmann's PTRS otherwise.
std::uint64_t sample_poisson(RandomEngine& engine, double mean);

}  // namespace ghz
