#pragma once

#include <cstdint>
#include <optional>

namespace chosim {

struct KpiConfig
{
    double warmup_s = 5.0; ///< events before this instant are not counted
};

struct KpiCounters
{
    std::int64_t cbra = 0;
    std::int64_t cfra = 0;
    std::int64_t hof = 0;
    std::int64_t rlf = 0;
    int ue_count = 0;
    double minutes = 0.0; ///< counted simulation time

    /// Combines shards of the same run (disjoint UE subsets over one time
    /// window). Associative and commutative; both sides must cover the same
    /// window unless one is empty.
    KpiCounters& merge(const KpiCounters& other);
    friend bool operator==(const KpiCounters&, const KpiCounters&) = default;
};

/// 100 * N_CBRA / (N_CBRA + N_CFRA); empty when no access was counted.
std::optional<double> r_cbra_percent(const KpiCounters& counters) noexcept;

struct FailureRates
{
    double hof_per_ue_min = 0.0;
    double rlf_per_ue_min = 0.0;
    double total_per_ue_min = 0.0;
};

/// Failure counts per UE and minute. Throws std::invalid_argument if the UE
/// count or duration is not positive.
FailureRates normalized_failures(const KpiCounters& counters);

} // namespace chosim
