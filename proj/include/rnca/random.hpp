#pragma once

#include <cstdint>
#include <random>

namespace rnca {

using Engine = std::mt19937_64;

/// splitmix64 finalizer; maps (seed, stream) to a well-mixed sub-seed so that
/// independent tasks (trials, per-attribute fits) draw from unrelated engines.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    return Engine(derive_seed(seed, stream));
}

}  // namespace rnca
