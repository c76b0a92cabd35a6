#pragma once

#include <cstdint>

namespace lhomog {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so a lattice site's coefficient does not depend on
// the window size or on the order in which trials execute.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    return splitmix64(h ^ counter);
}

/// Uniform on [0, 1) with 53 random bits.
inline constexpr double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept
{
    return static_cast<double>(counter_hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Seed of the trial-th independent replicate.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial) noexcept
{
    return counter_hash(seed, 0x747269616cULL, trial);
}

/// Maps a signed lattice index to a counter.
inline constexpr std::uint64_t site_counter(std::int64_t j) noexcept
{
    return static_cast<std::uint64_t>(j);
}

} // namespace lhomog
