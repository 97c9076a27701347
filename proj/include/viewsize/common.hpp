#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace viewsize {

// A fact-table row: one attribute value per dimension, opaque strings.
using Row = std::vector<std::string>;

// SplitMix64 step, used to derive independent sub-seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    std::uint64_t state = master ^ (salt * 0xd6e8feb86659fd93ULL);
    return splitmix64(state);
}

// Deterministic PRNG wrapper. All randomness in the project flows through
// this class so that runs replay bit-identically across platforms; the
// standard <random> distributions are avoided on purpose (their output is
// implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound); bound > 0.
    std::uint64_t next_below(std::uint64_t bound) { return engine_() % bound; }

private:
    std::mt19937_64 engine_;
};

}  // namespace viewsize
