#pragma once

#include <cstdint>
#include <random>

namespace sgdinf {

// One stream per replication; never shared across threads.
using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent stream seeds from (base, index).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(mix64(base) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t index) { return Rng(derive_seed(base, index)); }

}  // namespace sgdinf
