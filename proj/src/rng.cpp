#include "semalloc/rng.hpp"

#include "semalloc/numerics.hpp"

#include <cmath>

namespace semalloc {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RandomSeed derive_seed(RandomSeed parent, std::uint64_t index)
{
    std::uint64_t state = parent.value;
    const std::uint64_t a = splitmix64(state);
    state = a ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
    return RandomSeed{splitmix64(state)};
}

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k)
{
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(RandomSeed seed)
{
    std::uint64_t state = seed.value;
    for (auto& word : s_) {
        word = splitmix64(state);
    }
}

std::uint64_t Rng::next_u64()
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    // 1 - u lies in (0, 1], so the log is finite.
    const double radius = std::sqrt(-2.0 * std::log(1.0 - uniform()));
    const double angle = 2.0 * numerics::kPi * uniform();
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double Rng::exponential()
{
    return -std::log(1.0 - uniform());
}

int Rng::bit()
{
    if (bits_left_ == 0) {
        bit_buffer_ = next_u64();
        bits_left_ = 64;
    }
    const int b = static_cast<int>(bit_buffer_ & 1U);
    bit_buffer_ >>= 1;
    --bits_left_;
    return b;
}

} // namespace semalloc
