#include "chosim/kpi.hpp"

#include <cmath>
#include <stdexcept>

namespace chosim {

KpiCounters& KpiCounters::merge(const KpiCounters& other)
{
    const bool self_empty = ue_count == 0;
    const bool other_empty = other.ue_count == 0;
    if (!self_empty && !other_empty && std::abs(minutes - other.minutes) > 1e-12)
    {
        throw std::invalid_argument("merging counters that cover different time windows");
    }
    cbra += other.cbra;
    cfra += other.cfra;
    hof += other.hof;
    rlf += other.rlf;
    ue_count += other.ue_count;
    if (self_empty)
    {
        minutes = other.minutes;
    }
    return *this;
}

std::optional<double> r_cbra_percent(const KpiCounters& c) noexcept
{
    const std::int64_t accesses = c.cbra + c.cfra;
    if (accesses <= 0)
    {
        return std::nullopt;
    }
    return 100.0 * static_cast<double>(c.cbra) / static_cast<double>(accesses);
}

FailureRates normalized_failures(const KpiCounters& c)
{
    if (c.ue_count <= 0 || !(c.minutes > 0.0))
    {
        throw std::invalid_argument("failure normalisation needs UEs and a positive duration");
    }
    const double ue_min = c.ue_count * c.minutes;
    FailureRates r;
    r.hof_per_ue_min = static_cast<double>(c.hof) / ue_min;
    r.rlf_per_ue_min = static_cast<double>(c.rlf) / ue_min;
    r.total_per_ue_min = r.hof_per_ue_min + r.rlf_per_ue_min;
    return r;
}

} // namespace chosim
