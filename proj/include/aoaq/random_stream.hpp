#pragma once

// Seedable random streams and the substream derivation used by every
// Monte Carlo and fleet driver. A trial's stream depends only on
// (base_seed, index), so any partition of trials across threads draws
// exactly the same numbers.

#include <concepts>
#include <cstdint>
#include <limits>

namespace aoaq {

// SplitMix64 output function. Used to expand seeds and to mix
// (base, index) pairs into substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// substream_seed(base, i) = splitmix64(splitmix64(base) ^ splitmix64(i + 1)).
// The +1 keeps index 0 from collapsing onto the base seed.
constexpr std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(base) ^ splitmix64(index + 1));
}

// xoshiro256** with the state expanded from a single 64-bit seed by
// SplitMix64. Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& s : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            s = z ^ (z >> 31);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // 53 random mantissa bits; uniform on [0, 1).
    double uniform01() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
};

// Anything that can hand out uniform reals on [0, 1) and also works as a
// standard bit generator (for <random> distributions).
template <typename G>
concept UniformSource = std::uniform_random_bit_generator<G> && requires(G& g) {
    { g.uniform01() } -> std::convertible_to<double>;
};

static_assert(UniformSource<RandomStream>);

}  // namespace aoaq
