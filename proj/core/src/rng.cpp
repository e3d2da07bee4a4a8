#include "chosim/rng.hpp"

#include <cmath>
#include <numbers>

namespace chosim::rng {

std::pair<double, double> gaussian_pair(std::uint64_t key) noexcept
{
    const double u1 = to_unit_open(splitmix64(key));
    const double u2 = to_unit_open(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

std::uint64_t Substream::below(std::uint64_t n) noexcept
{
    // Rejection sampling keeps the result exactly uniform.
    const std::uint64_t limit = max() - max() % n;
    for (;;)
    {
        const std::uint64_t x = (*this)();
        if (x < limit)
        {
            return x % n;
        }
    }
}

double Substream::gaussian() noexcept
{
    return gaussian_pair((*this)()).first;
}

} // namespace chosim::rng
