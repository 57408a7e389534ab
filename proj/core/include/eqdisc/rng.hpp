#pragma once

#include <cstdint>
#include <random>

namespace eqdisc {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of the sub-stream identified by (seed, epoch, index).
///
/// Genetic operators draw from `stream_rng(seed, epoch, i)` for individual i,
/// so the sequence of draws never depends on thread scheduling.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t index) noexcept;

inline Rng stream_rng(std::uint64_t seed, std::uint64_t epoch, std::uint64_t index) {
    return Rng{stream_seed(seed, epoch, index)};
}

} // namespace eqdisc
