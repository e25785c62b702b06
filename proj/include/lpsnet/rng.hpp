#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace lpsnet
{
    // SplitMix64 step; used to expand seeds and derive stream keys.
    constexpr std::uint64_t splitmix64(std::uint64_t &state) noexcept
    {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    constexpr std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) noexcept
    {
        std::uint64_t s = a ^ (b * 0xD1B54A32D192ED03ULL);
        return splitmix64(s);
    }

    // xoshiro256** with SplitMix64 seeding. Streams are identified by a
    // (seed, key...) path so every consumer can own an independent generator.
    class Rng
    {
    public:
        using result_type = std::uint64_t;

        static constexpr std::string_view algorithm = "xoshiro256**/splitmix64";

        explicit Rng(std::uint64_t seed = 0) noexcept { reseed(seed); }

        // Independent substream of a root seed: stream(seed, {replication, purpose, node}).
        static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) noexcept
        {
            return Rng(mix_key(mix_key(mix_key(seed, a + 1), b + 1), c + 1));
        }

        void reseed(std::uint64_t seed) noexcept
        {
            std::uint64_t sm = seed;
            for (auto &w : s_)
                w = splitmix64(sm);
        }

        static constexpr result_type min() noexcept { return 0; }
        static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

        result_type operator()() noexcept
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

        // Uniform on [0, 1) with 53 random bits.
        double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

        // Exponential with the given rate, by inversion on (0, 1].
        double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

    private:
        static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

        std::uint64_t s_[4]{};
    };
} // namespace lpsnet
