#pragma once

// Counter-based random streams.
//
// Every draw in a simulation comes from a stream keyed by
// (run seed, day, phase, agent id). Two runs that share a seed therefore
// consume identical numbers for the same agent, day and phase no matter
// what other agents or phases did, which is what makes paired-seed
// scenario comparisons meaningful.

#include <concepts>
#include <cstdint>

namespace flusim {

/// Draw phases, in the order they are consumed within a simulated day.
enum class Phase : std::uint64_t {
    Population = 0,
    Movement = 1,
    Control = 2,
    Contact = 3,
    Infection = 4,
    State = 5,
    Seeding = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t day, Phase phase,
                                   std::uint64_t agent) noexcept
{
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ day);
    k = splitmix64(k ^ static_cast<std::uint64_t>(phase));
    return splitmix64(k ^ agent);
}

class RandomStream {
public:
    explicit constexpr RandomStream(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t next_u64() noexcept { return splitmix64(key_ + 0x632BE59BD9B4E019ULL * ++counter_); }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n); n must be positive. Unbiased (rejection on the low product word).
    constexpr std::uint64_t below(std::uint64_t n) noexcept
    {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
            if (static_cast<std::uint64_t>(m) >= threshold) {
                return static_cast<std::uint64_t>(m >> 64);
            }
        }
    }

    constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

    constexpr std::uint64_t draws_consumed() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

template <class D>
concept UniformSource = requires(D& d) {
    { d.uniform() } -> std::convertible_to<double>;
};

} // namespace flusim
