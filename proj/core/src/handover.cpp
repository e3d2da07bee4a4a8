#include "chosim/handover.hpp"

#include "chosim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chosim {

std::string_view to_string(HandoverMode mode) noexcept
{
    return mode == HandoverMode::Baseline ? "BHO" : "CHO";
}

std::int64_t duration_steps(double duration_ms, double step_ms)
{
    // Tolerates representation error such as 20.000000001 / 10.
    return static_cast<std::int64_t>(std::ceil(duration_ms / step_ms - 1e-9));
}

void validate(const HandoverConfig& c, double step_ms)
{
    if (c.mode == HandoverMode::Conditional && !(c.add_offset_db < c.exec_offset_db))
    {
        throw ConfigError("CHO requires add offset < execute offset");
    }
    const double ratio = c.preparation_ms / step_ms;
    if (c.preparation_ms < 0.0 || std::abs(ratio - std::round(ratio)) > 1e-9)
    {
        throw ConfigError("preparation time must be a non-negative multiple of the time step");
    }
    if (c.ttt_a3_ms < 0.0 || c.ttt_add_ms < 0.0 || c.ttt_exec_ms < 0.0)
    {
        throw ConfigError("time-to-trigger values must be non-negative");
    }
    if (c.prepared_beams < 1 || c.max_prepared_cells < 1 || c.cfra_preambles_per_beam < 0)
    {
        throw ConfigError("N_B and the preparation limit must be >= 1");
    }
}

bool TttTracker::update(bool condition, std::int64_t step) noexcept
{
    if (!condition)
    {
        entry_.reset();
        return false;
    }
    if (!entry_)
    {
        entry_ = step;
    }
    return step - *entry_ >= window_;
}

bool a3_event(double serving_l3_dbm, double neighbor_l3_dbm, double offset_db,
              TttTracker& tracker, std::int64_t step)
{
    return tracker.update(neighbor_better(serving_l3_dbm, neighbor_l3_dbm, offset_db), step);
}

bool add_event(double serving_l3_dbm, double neighbor_l3_dbm, double offset_db,
               TttTracker& tracker, std::int64_t step)
{
    return tracker.update(neighbor_better(serving_l3_dbm, neighbor_l3_dbm, offset_db), step);
}

bool exec_event(double serving_l3_dbm, double neighbor_l3_dbm, double offset_db, bool prepared,
                TttTracker& tracker, std::int64_t step)
{
    if (!prepared)
    {
        throw std::logic_error("exec_event queried for a cell that is not prepared");
    }
    return tracker.update(neighbor_better(serving_l3_dbm, neighbor_l3_dbm, offset_db), step);
}

bool PreparedTarget::contains(int beam) const noexcept
{
    return std::any_of(beams.begin(), beams.end(),
                       [beam](const PreparedBeam& p) { return p.beam == beam; });
}

std::vector<int> PreparedTarget::beam_ids() const
{
    std::vector<int> ids;
    ids.reserve(beams.size());
    for (const PreparedBeam& p : beams)
    {
        ids.push_back(p.beam);
    }
    return ids;
}

PreamblePool::PreamblePool(int cells, int beams, int preambles_per_beam)
    : beams_(beams),
      per_beam_(preambles_per_beam),
      used_(static_cast<std::size_t>(cells) * beams,
            std::vector<bool>(static_cast<std::size_t>(preambles_per_beam), false))
{
}

std::optional<int> PreamblePool::reserve(int cell, int beam)
{
    auto& slots = used_[static_cast<std::size_t>(cell) * beams_ + beam];
    const auto it = std::find(slots.begin(), slots.end(), false);
    if (it == slots.end())
    {
        return std::nullopt;
    }
    *it = true;
    return static_cast<int>(it - slots.begin());
}

void PreamblePool::release(int cell, int beam, int preamble)
{
    auto& slots = used_[static_cast<std::size_t>(cell) * beams_ + beam];
    if (preamble < 0 || preamble >= per_beam_ || !slots[preamble])
    {
        throw std::logic_error("releasing a preamble that is not reserved");
    }
    slots[preamble] = false;
}

int PreamblePool::in_use(int cell, int beam) const noexcept
{
    const auto& slots = used_[static_cast<std::size_t>(cell) * beams_ + beam];
    return static_cast<int>(std::count(slots.begin(), slots.end(), true));
}

std::vector<int> select_prepared_beams(std::span<const double> reported_l3_dbm, int prepared_beams)
{
    std::vector<int> order;
    for (std::size_t b = 0; b < reported_l3_dbm.size(); ++b)
    {
        if (std::isfinite(reported_l3_dbm[b]))
        {
            order.push_back(static_cast<int>(b));
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return reported_l3_dbm[a] > reported_l3_dbm[b]; });
    if (order.size() > static_cast<std::size_t>(prepared_beams))
    {
        order.resize(static_cast<std::size_t>(prepared_beams));
    }
    return order;
}

PreparedTarget prepare_target(int cell, std::span<const double> reported_l3_dbm,
                              int prepared_beams, PreamblePool& pool, std::int64_t ready_step)
{
    PreparedTarget target{cell, {}, ready_step};
    for (int beam : select_prepared_beams(reported_l3_dbm, prepared_beams))
    {
        const auto preamble = pool.reserve(cell, beam);
        if (!preamble)
        {
            release_target(target, pool);
            target.beams.clear();
            return target;
        }
        target.beams.push_back({beam, *preamble});
    }
    return target;
}

void release_target(const PreparedTarget& target, PreamblePool& pool)
{
    for (const PreparedBeam& p : target.beams)
    {
        pool.release(target.cell, p.beam, p.preamble);
    }
}

} // namespace chosim
