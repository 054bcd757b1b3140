#pragma once

#include <array>
#include <cstdint>

namespace semalloc {

struct RandomSeed {
    std::uint64_t value = 0;
};

// splitmix64 finaliser. Used to expand seeds and to derive sub-streams.
std::uint64_t splitmix64(std::uint64_t& state);

// Seed for an independent sub-stream, e.g. one per worker or per stream.
RandomSeed derive_seed(RandomSeed parent, std::uint64_t index);

// xoshiro256** (Blackman & Vigna 2018), state expanded from the seed with
// splitmix64. All distributions below are implemented here rather than via
// <random> distributions, whose output is implementation-defined, so sample
// sequences are bit-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(RandomSeed seed);

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Standard normal via Box-Muller (both variates are used).
    double normal();

    // Unit-mean exponential.
    double exponential();

    // Single fair bit.
    int bit();

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
    std::uint64_t bit_buffer_ = 0;
    int bits_left_ = 0;
};

} // namespace semalloc
