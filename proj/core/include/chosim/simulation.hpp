#pragma once

#include "chosim/failure.hpp"
#include "chosim/handover.hpp"
#include "chosim/kpi.hpp"
#include "chosim/measurements.hpp"
#include "chosim/rach.hpp"
#include "chosim/scenario.hpp"
#include "chosim/ue_protocol.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace chosim {

/// Everything a run needs besides the seed and the protocol variant.
struct SimulationConfig
{
    ScenarioConfig scenario;
    MeasurementConfig measurement;
    HandoverConfig handover;
    RachConfig rach;
    RlfConfig rlf;
    KpiConfig kpi;
};

void validate(const SimulationConfig& config);

/// The swept protocol parameters. Everything else comes from the config.
struct ProtocolVariant
{
    HandoverMode mode = HandoverMode::Baseline;
    RachProcedure procedure = RachProcedure::ThreeGpp;
    double access_threshold_dbm = -100.0;
    int prepared_beams = 1;

    friend bool operator==(const ProtocolVariant&, const ProtocolVariant&) = default;
};

ProtocolConfig protocol_config(const SimulationConfig& config, const ProtocolVariant& variant,
                               std::uint64_t seed);

enum class TraceLevel
{
    Off,
    Events, ///< handover, RACH and failure logs
    Links,  ///< events plus per-step link RSRP/SINR rows
};

struct LinkTraceRow
{
    std::int64_t step;
    int ue;
    int cell;
    int beam;
    double rsrp_dbm;
    double sinr_db;
};

struct SimulationOptions
{
    TraceLevel trace = TraceLevel::Off;
    /// Receives link rows when trace == Links, once per seed.
    std::function<void(const LinkTraceRow&)> link_sink;
};

struct RunResult
{
    ProtocolVariant variant;
    std::uint64_t seed = 0;
    KpiCounters counters;
    std::int64_t handovers = 0; ///< successful handovers after warm-up
    std::int64_t declared_failures = 0;
    std::int64_t reestablishments = 0;
    std::uint64_t trajectory_hash = 0;
    std::vector<HandoverRecord> handover_log;
    std::vector<RachRecord> rach_log;
    std::vector<FailureRecord> failure_log;
    std::vector<std::int64_t> cho_waiting_steps;
};

std::int64_t total_steps(const ScenarioConfig& scenario);

/// Runs every variant over one seed. The world, mobility, fading and
/// measurements are computed once and shared, so all variants see the same
/// channel (common random numbers). Results are in variant order.
std::vector<RunResult> simulate(const SimulationConfig& config,
                                std::span<const ProtocolVariant> variants, std::uint64_t seed,
                                const SimulationOptions& options = {});

/// FNV-1a over the UE positions of every step.
class TrajectoryHasher
{
  public:
    void add(double value) noexcept;
    std::uint64_t value() const noexcept { return hash_; }

  private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

} // namespace chosim
