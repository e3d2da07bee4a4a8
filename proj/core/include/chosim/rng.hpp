#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <utility>

namespace chosim::rng {

/// Independent random streams derived from one run seed. Each subsystem draws
/// from its own stream so that, e.g., fading draws never shift UE placement.
enum class Stream : std::uint64_t
{
    Placement = 0x706c6163,
    Mobility = 0x6d6f6269,
    Shadowing = 0x73686164,
    Fading = 0x66616465,
    Contention = 0x636f6e74,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Order-sensitive hash of a key tuple.
constexpr std::uint64_t hash_key(std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto p : parts)
    {
        h = splitmix64(h ^ splitmix64(p));
    }
    return h;
}

/// Maps 64 random bits to a double in the open interval (0, 1).
constexpr double to_unit_open(std::uint64_t bits) noexcept
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Two independent standard normals from a single key (Box-Muller).
std::pair<double, double> gaussian_pair(std::uint64_t key) noexcept;

/// Sequential generator for one substream. Satisfies UniformRandomBitGenerator,
/// but the helpers below are preferred because they are bit-reproducible
/// across standard library implementations.
class Substream
{
  public:
    using result_type = std::uint64_t;

    Substream(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept
        : state_(hash_key({seed, static_cast<std::uint64_t>(stream), index}))
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64(state_);
    }

    double uniform() noexcept { return to_unit_open((*this)()); }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

    double gaussian() noexcept;

  private:
    std::uint64_t state_;
};

} // namespace chosim::rng
