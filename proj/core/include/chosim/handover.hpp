#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace chosim {

enum class HandoverMode
{
    Baseline,    ///< BHO: A3 report, preparation, immediate execution
    Conditional, ///< CHO: Add report, preparation, execution on a separate condition
};

std::string_view to_string(HandoverMode mode) noexcept;

struct HandoverConfig
{
    HandoverMode mode = HandoverMode::Baseline;
    double a3_offset_db = 3.0;
    double add_offset_db = -3.0;
    double exec_offset_db = 3.0;
    double ttt_a3_ms = 160.0;
    double ttt_add_ms = 160.0;
    double ttt_exec_ms = 80.0;
    double preparation_ms = 20.0; ///< T_p
    int prepared_beams = 1;       ///< N_B
    int max_prepared_cells = 3;   ///< CHO multi-preparation limit
    int cfra_preambles_per_beam = 64;
};

void validate(const HandoverConfig& config, double step_ms);

/// Converts a duration to whole time steps, rounding up.
std::int64_t duration_steps(double duration_ms, double step_ms);

/// Time-to-trigger window. Fires at the first step where the condition has
/// held at every step since it became true and for at least the window.
class TttTracker
{
  public:
    TttTracker() = default;
    explicit TttTracker(std::int64_t window_steps) noexcept : window_(window_steps) {}

    /// Feeds the instantaneous condition at `step`. Returns true when the
    /// event fires; a false condition resets the tracker.
    bool update(bool condition, std::int64_t step) noexcept;
    void reset() noexcept { entry_.reset(); }

    std::optional<std::int64_t> entry_step() const noexcept { return entry_; }
    std::int64_t window_steps() const noexcept { return window_; }

  private:
    std::int64_t window_ = 0;
    std::optional<std::int64_t> entry_;
};

/// Shared entering condition of A3, Add and Execute:
/// P_serving + offset < P_neighbor.
constexpr bool neighbor_better(double serving_dbm, double neighbor_dbm, double offset_db) noexcept
{
    return serving_dbm + offset_db < neighbor_dbm;
}

/// Instantaneous predicate plus tracker update; true when the event fires.
bool a3_event(double serving_l3_dbm, double neighbor_l3_dbm, double offset_db,
              TttTracker& tracker, std::int64_t step);
bool add_event(double serving_l3_dbm, double neighbor_l3_dbm, double offset_db,
               TttTracker& tracker, std::int64_t step);
/// Throws std::logic_error when the neighbor is not prepared.
bool exec_event(double serving_l3_dbm, double neighbor_l3_dbm, double offset_db, bool prepared,
                TttTracker& tracker, std::int64_t step);

/// Measurement report and handover command go over the serving link; they
/// are received only if its SINR is above gamma_out.
constexpr bool serving_link_delivers(double serving_sinr_db, double gamma_out_db) noexcept
{
    return serving_sinr_db > gamma_out_db;
}

struct PreparedBeam
{
    int beam = 0;
    int preamble = 0;
};

struct PreparedTarget
{
    int cell = -1;
    std::vector<PreparedBeam> beams; ///< B_prep, strongest reported first
    std::int64_t ready_step = 0;

    bool contains(int beam) const noexcept;
    std::vector<int> beam_ids() const;
};

/// Per-(cell, beam) pool of dedicated CFRA preambles. A preamble id is held
/// by at most one UE at any time.
class PreamblePool
{
  public:
    PreamblePool(int cells, int beams, int preambles_per_beam);

    std::optional<int> reserve(int cell, int beam);
    void release(int cell, int beam, int preamble);
    int in_use(int cell, int beam) const noexcept;
    int capacity() const noexcept { return per_beam_; }

  private:
    int beams_;
    int per_beam_;
    std::vector<std::vector<bool>> used_;
};

/// The N_B reported beams with the highest L3 values, strongest first,
/// lowest index on ties. Non-finite entries are treated as not reported.
std::vector<int> select_prepared_beams(std::span<const double> reported_l3_dbm, int prepared_beams);

/// Reserves one preamble per selected beam. If the pool cannot serve every
/// selected beam, nothing is held and B_prep is empty (CBRA-only target).
PreparedTarget prepare_target(int cell, std::span<const double> reported_l3_dbm,
                              int prepared_beams, PreamblePool& pool, std::int64_t ready_step);

void release_target(const PreparedTarget& target, PreamblePool& pool);

} // namespace chosim
