#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace chosim {

enum class AveragingDomain
{
    Db,
    Linear,
};

struct MeasurementConfig
{
    int l1_samples = 4;        ///< N_L1, raw samples averaged by the L1 filter
    int period_steps = 2;      ///< omega, time steps per L1 measurement period
    double beam_threshold_dbm = -110.0; ///< P_thr for beam consolidation
    int strongest_beams = 4;   ///< N_str
    double cell_filter_k = 4.0;  ///< k, L3 cell-quality filter coefficient
    double beam_filter_k = 4.0;  ///< k', L3 beam filter coefficient
    AveragingDomain l1_domain = AveragingDomain::Db;
};

void validate(const MeasurementConfig& config);

/// Moving average of the given raw samples (all of them; the caller passes
/// at most N_L1). Throws std::invalid_argument on an empty window.
double l1_beam_filter(std::span<const double> samples_dbm, AveragingDomain domain);

/// Indices b with l1[b] strictly above the threshold.
std::vector<int> strongest_beam_set(std::span<const double> l1_dbm, double threshold_dbm);

/// Beam consolidation into one cell quality value: the mean of the N_str
/// strongest beams above threshold, all of them if fewer qualify, or the
/// single best beam when none does. Averaging is in the dB domain.
double l1_cell_quality(std::span<const double> l1_dbm, double threshold_dbm, int strongest);

/// alpha = (1/2)^(k/4).
double forgetting_factor(double k);

/// One IIR step; the first update (no previous output) returns the input.
double l3_update(std::optional<double> previous_dbm, double input_dbm, double alpha);

/// UE-side filter state for every (cell, beam): ring buffers of raw RSRP,
/// L1 beam outputs, consolidated L1 cell quality and both L3 filters.
class MeasurementState
{
  public:
    MeasurementState(int cells, int beams, const MeasurementConfig& config);

    /// Feeds the raw RSRP of all links at step n ([cell * beams + beam]).
    /// Returns true when n is a measurement instant and the outputs changed.
    bool push(std::span<const double> raw_rsrp_dbm, std::int64_t step);

    int cells() const noexcept { return cells_; }
    int beams() const noexcept { return beams_; }
    bool ready() const noexcept { return last_update_ >= 0; }
    std::int64_t last_update_step() const noexcept { return last_update_; }

    std::span<const double> l1_beams(int cell) const noexcept
    {
        return {l1_beam_.data() + static_cast<std::size_t>(cell) * beams_,
                static_cast<std::size_t>(beams_)};
    }
    std::span<const double> l3_beams(int cell) const noexcept
    {
        return {l3_beam_.data() + static_cast<std::size_t>(cell) * beams_,
                static_cast<std::size_t>(beams_)};
    }
    std::span<const double> l1_cells() const noexcept { return l1_cell_; }
    std::span<const double> l3_cells() const noexcept { return l3_cell_; }

    /// Beam with the highest current L1 value (lowest index on ties).
    int best_l1_beam(int cell) const noexcept;

  private:
    MeasurementConfig config_;
    int cells_;
    int beams_;
    double alpha_cell_;
    double alpha_beam_;
    std::vector<double> ring_; ///< [link * l1_samples + slot]
    int filled_ = 0;
    int head_ = 0;
    std::vector<double> l1_beam_;
    std::vector<double> l1_cell_;
    std::vector<double> l3_beam_;
    std::vector<double> l3_cell_;
    std::int64_t last_update_ = -1;
    std::vector<double> window_;
};

} // namespace chosim
