#pragma once

// Deterministic, platform-independent PRNG. std::mt19937_64 is specified by
// the standard, but the distributions are not; all mappings to doubles are
// done explicitly here so that identical seeds give identical bytes
// everywhere.

#include <cstdint>
#include <complex>

#include "dyadic_tb/grid.hpp"

namespace dytb {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [-1, 1)
    double next_symmetric() { return 2.0 * next_unit() - 1.0; }

    // uniform over {-1, +1}
    double next_sign() { return (next_u64() & 1) ? 1.0 : -1.0; }

    std::complex<double> next_complex_symmetric() {
        const double re = next_symmetric();
        const double im = next_symmetric();
        return {re, im};
    }

private:
    std::uint64_t state_;
};

// Stable per-cube stream: mixes the cube coordinates into the seed so each
// cube's draw is independent of traversal order.
inline Rng cube_rng(std::uint64_t seed, const DyadicCube& q) {
    std::uint64_t s = seed;
    s ^= splitmix64(s) + static_cast<std::uint64_t>(q.gen);
    s ^= splitmix64(s) + static_cast<std::uint64_t>(q.idx[0] + 0x10000);
    s ^= splitmix64(s) + static_cast<std::uint64_t>(q.idx[1] + 0x10000);
    return Rng(s);
}

}  // namespace dytb
