#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace rs3 {

/// SplitMix64 finalizer. Used to derive independent stream seeds from
/// structured keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Identifies one random stream. Keys are hierarchical: a child key is
/// derived from its parent and a list of integer coordinates, e.g.
/// (mpc_step, iteration, policy, sample). Two streams with equal keys produce
/// identical sequences, whichever thread consumes them.
class StreamKey {
public:
    constexpr StreamKey() = default;
    constexpr explicit StreamKey(std::uint64_t root) : value_(mix64(root)) {}

    constexpr StreamKey child(std::uint64_t coordinate) const noexcept
    {
        StreamKey k;
        k.value_ = mix64(value_ ^ mix64(coordinate + 0x632BE59BD9B4E019ULL));
        return k;
    }

    constexpr StreamKey child(std::initializer_list<std::uint64_t> coordinates) const noexcept
    {
        StreamKey k = *this;
        for (auto c : coordinates)
            k = k.child(c);
        return k;
    }

    constexpr std::uint64_t value() const noexcept { return value_; }

    friend constexpr bool operator==(StreamKey, StreamKey) = default;

private:
    std::uint64_t value_ = 0x2545F4914F6CDD1DULL;
};

/// xoshiro256++ engine satisfying UniformRandomBitGenerator. Cheap to seed,
/// which matters because every (policy, sample) rollout owns a stream.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(StreamKey key) noexcept
    {
        std::uint64_t s = key.value();
        for (auto& word : state_) {
            s += 0x9E3779B97F4A7C15ULL;
            word = mix64(s);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in the open interval (0, 1).
    double uniform01() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
};

using Rng = Xoshiro256;

} // namespace rs3
