#pragma once

#include <cstdint>

namespace smallgain::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic per-stream seed so ensemble runs are independent of
/// execution order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= 0x2545F4914F6CDD1DULL * (a + 1);
    h ^= splitmix64(s);
    s ^= 0xD6E8FEB86659FD93ULL * (b + 1);
    h ^= splitmix64(s);
    return h;
}

}  // namespace smallgain::detail
