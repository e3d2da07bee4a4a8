#include "chosim/rach.hpp"

#include "chosim/errors.hpp"
#include "chosim/handover.hpp"
#include "chosim/rng.hpp"

#include <cmath>

namespace chosim {

std::string_view to_string(RachProcedure procedure) noexcept
{
    return procedure == RachProcedure::ThreeGpp ? "THREE_GPP" : "PROPOSED";
}

std::string_view to_string(PreambleKind kind) noexcept
{
    return kind == PreambleKind::Cfra ? "CFRA" : "CBRA";
}

void validate(const RachConfig& c, double step_ms)
{
    if (!(c.t304_ms > 0.0))
    {
        throw ConfigError("T304 must be positive");
    }
    if (c.retry_period_ms < step_ms)
    {
        throw ConfigError("RACH retry period must be at least one time step");
    }
    if (c.cbra_collision_probability < 0.0 || c.cbra_collision_probability > 1.0)
    {
        throw ConfigError("CBRA collision probability must lie in [0, 1]");
    }
    if (std::isnan(c.access_threshold_dbm))
    {
        throw ConfigError("access threshold must not be NaN");
    }
}

AccessBeam select_access_beam(std::span<const double> target_l1_dbm, const PreparedTarget& target,
                              double access_threshold_dbm)
{
    int best_prepared = -1;
    for (const PreparedBeam& p : target.beams)
    {
        if (best_prepared < 0 || target_l1_dbm[p.beam] > target_l1_dbm[best_prepared] ||
            (target_l1_dbm[p.beam] == target_l1_dbm[best_prepared] && p.beam < best_prepared))
        {
            best_prepared = p.beam;
        }
    }
    if (best_prepared >= 0 && target_l1_dbm[best_prepared] > access_threshold_dbm)
    {
        return {best_prepared, true, true};
    }

    int best = 0;
    for (std::size_t b = 1; b < target_l1_dbm.size(); ++b)
    {
        if (target_l1_dbm[b] > target_l1_dbm[best])
        {
            best = static_cast<int>(b);
        }
    }
    return {best, target.contains(best), false};
}

PreambleKind select_preamble(const AccessBeam& choice, RachProcedure procedure) noexcept
{
    const bool cfra =
        procedure == RachProcedure::ThreeGpp ? choice.above_threshold : choice.prepared;
    return cfra ? PreambleKind::Cfra : PreambleKind::Cbra;
}

bool rach_attempt_succeeds(double target_sinr_db, double gamma_out_db, PreambleKind kind,
                           double collision_probability, std::uint64_t collision_key) noexcept
{
    if (!(target_sinr_db > gamma_out_db))
    {
        return false;
    }
    if (kind == PreambleKind::Cbra && collision_probability > 0.0)
    {
        return rng::to_unit_open(rng::splitmix64(collision_key)) >= collision_probability;
    }
    return true;
}

} // namespace chosim
