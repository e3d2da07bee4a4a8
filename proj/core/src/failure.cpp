#include "chosim/failure.hpp"

#include "chosim/errors.hpp"

#include <algorithm>

namespace chosim {

std::string_view to_string(FailureCause cause) noexcept
{
    return cause == FailureCause::Rlf ? "RLF" : "HOF";
}

void validate(const RlfConfig& c)
{
    if (!(c.gamma_in_db > c.gamma_out_db))
    {
        throw ConfigError("gamma_in must be above gamma_out");
    }
    if (!(c.t310_ms > 0.0))
    {
        throw ConfigError("T310 must be positive");
    }
    if (c.reestablishment_ms < 0.0)
    {
        throw ConfigError("re-establishment delay must be non-negative");
    }
}

RlfEvent RlfMonitor::step(double serving_sinr_db, std::int64_t step) noexcept
{
    if (!running_)
    {
        if (serving_sinr_db < gamma_out_)
        {
            running_ = true;
            started_ = step;
            return RlfEvent::Started;
        }
        return RlfEvent::None;
    }
    if (serving_sinr_db > gamma_in_)
    {
        running_ = false;
        return RlfEvent::Recovered;
    }
    if (step - started_ >= t310_)
    {
        running_ = false;
        return RlfEvent::Failure;
    }
    return RlfEvent::None;
}

int reestablishment_cell(std::span<const double> l3_cell_dbm) noexcept
{
    return static_cast<int>(std::max_element(l3_cell_dbm.begin(), l3_cell_dbm.end()) -
                            l3_cell_dbm.begin());
}

} // namespace chosim
