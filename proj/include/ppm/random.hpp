#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ppm {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed splitting: every stochastic stage draws from its own stream, keyed by
// the master seed and a path of integers (stage tag, repeat, fold, ...).
// Streams are independent of execution order, so parallel runs reproduce
// sequential ones exactly.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path)
{
    std::uint64_t s = splitmix64(master);
    for (auto p : path)
        s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

// Stage tags used with derive_seed.
namespace stream {
inline constexpr std::uint64_t holdout = 1;
inline constexpr std::uint64_t kfold = 2;
inline constexpr std::uint64_t grid = 3;
inline constexpr std::uint64_t tuning = 4;
inline constexpr std::uint64_t bootstrap = 5;
inline constexpr std::uint64_t point_split = 6;
inline constexpr std::uint64_t predictors = 7;
inline constexpr std::uint64_t outcome = 8;
} // namespace stream

} // namespace ppm
