#pragma once

#include "chosim/failure.hpp"
#include "chosim/handover.hpp"
#include "chosim/kpi.hpp"
#include "chosim/rach.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace chosim {

/// Everything the UE-side mobility logic reads at one time step.
class LinkObservation
{
  public:
    virtual ~LinkObservation() = default;

    virtual std::span<const double> l3_cells() const = 0;
    virtual std::span<const double> l1_beams(int cell) const = 0;
    virtual std::span<const double> l3_beams(int cell) const = 0;
    /// Beam currently serving the UE within `cell`.
    virtual int serving_beam(int cell) const = 0;
    virtual double sinr_db(int cell, int beam) const = 0;
};

struct ProtocolConfig
{
    HandoverConfig handover;
    RachConfig rach;
    RlfConfig rlf;
    double step_ms = 10.0;
    std::int64_t warmup_steps = 0;
    std::uint64_t contention_seed = 0;
};

void validate(const ProtocolConfig& config);

enum class HandoverEventType
{
    A3,
    Add,
    ReportLost,
    Exec,
    PrepDone,
    CmdDelivered,
    CmdLost,
    HoSuccess,
};

std::string_view to_string(HandoverEventType type) noexcept;

struct HandoverRecord
{
    std::int64_t step = 0;
    int ue = 0;
    HandoverEventType type = HandoverEventType::A3;
    int serving = -1;
    int target = -1;
};

struct RachRecord
{
    std::int64_t step = 0;
    int ue = 0;
    int target = -1;
    int beam = 0;
    PreambleKind kind = PreambleKind::Cbra;
    bool success = false;
    bool beam_prepared = false;
    std::int64_t elapsed_steps = 0;
};

struct FailureRecord
{
    std::int64_t step = 0;
    int ue = 0;
    FailureCause cause = FailureCause::Rlf;
    int old_serving = -1;
    int new_cell = -1; ///< -1 until re-establishment completes
    std::int64_t reestablished_step = -1;
};

/// Collects counters and, optionally, the per-event logs of one run.
class ProtocolRecorder
{
  public:
    explicit ProtocolRecorder(std::int64_t warmup_steps = 0, bool keep_logs = false)
        : warmup_(warmup_steps), keep_logs_(keep_logs)
    {
    }

    bool counted(std::int64_t step) const noexcept { return step >= warmup_; }
    bool keeping_logs() const noexcept { return keep_logs_; }

    void handover_event(const HandoverRecord& r);
    void rach_attempt(const RachRecord& r);
    void access_completed(PreambleKind kind, std::int64_t step);
    /// Returns an index usable with failure_resolved().
    std::size_t failure_declared(const FailureRecord& r);
    void failure_resolved(std::size_t index, int new_cell, std::int64_t step);
    void cho_waiting_time(std::int64_t steps, std::int64_t step);

    const KpiCounters& counters() const noexcept { return counters_; }
    KpiCounters& counters() noexcept { return counters_; }
    std::int64_t successful_handovers() const noexcept { return handovers_; }
    std::int64_t declared_failures() const noexcept { return failures_declared_; }
    std::int64_t reestablishments() const noexcept { return reestablishments_; }

    std::span<const HandoverRecord> handover_log() const noexcept { return handover_log_; }
    std::span<const RachRecord> rach_log() const noexcept { return rach_log_; }
    std::span<const FailureRecord> failure_log() const noexcept { return failure_log_; }
    std::span<const std::int64_t> cho_waiting_steps() const noexcept { return waiting_; }

  private:
    std::int64_t warmup_;
    bool keep_logs_;
    KpiCounters counters_;
    std::int64_t handovers_ = 0;
    std::int64_t failures_declared_ = 0;
    std::int64_t reestablishments_ = 0;
    std::vector<HandoverRecord> handover_log_;
    std::vector<RachRecord> rach_log_;
    std::vector<FailureRecord> failure_log_;
    std::vector<std::int64_t> waiting_;
};

enum class UePhase
{
    Detached, ///< before the initial attach
    Connected,
    Executing,
    Reestablishing,
};

/// Mobility state machine of one UE: measurement reporting with TTT,
/// preparation, BHO or CHO execution, random access under T304, serving
/// link supervision under T310, and re-establishment after a failure.
class UeProtocol
{
  public:
    UeProtocol(int ue, int cells, const ProtocolConfig& config);

    void attach(int cell) noexcept;
    void step(const LinkObservation& obs, std::int64_t step, PreamblePool& pool,
              ProtocolRecorder& recorder);

    int ue() const noexcept { return ue_; }
    UePhase phase() const noexcept { return phase_; }
    int serving_cell() const noexcept { return serving_; }
    std::span<const PreparedTarget> prepared() const noexcept { return prepared_; }
    std::size_t pending_preparations() const noexcept { return pending_.size(); }
    const RlfMonitor& rlf_monitor() const noexcept { return rlf_; }

  private:
    struct PendingPreparation
    {
        int cell;
        std::int64_t report_step;
        std::int64_t ready_step;
        std::vector<double> reported_l3;
    };

    void step_connected(const LinkObservation& obs, std::int64_t n, PreamblePool& pool,
                        ProtocolRecorder& rec);
    void step_baseline(const LinkObservation& obs, std::int64_t n, double serving_sinr,
                       PreamblePool& pool, ProtocolRecorder& rec);
    void step_conditional(const LinkObservation& obs, std::int64_t n, double serving_sinr,
                          PreamblePool& pool, ProtocolRecorder& rec);
    /// Prepares every due pending target and delivers its command. Returns
    /// the index into prepared_ of a BHO target whose command arrived.
    int complete_preparations(std::int64_t n, double serving_sinr, PreamblePool& pool,
                              ProtocolRecorder& rec);
    void send_report(const LinkObservation& obs, int cell, std::int64_t n, double serving_sinr,
                     ProtocolRecorder& rec);
    void start_access(const LinkObservation& obs, std::size_t target, std::int64_t n,
                      PreamblePool& pool, ProtocolRecorder& rec);
    void step_access(const LinkObservation& obs, std::int64_t n, PreamblePool& pool,
                     ProtocolRecorder& rec);
    void declare_failure(FailureCause cause, const LinkObservation& obs, std::int64_t n,
                         PreamblePool& pool, ProtocolRecorder& rec);
    void finish_reestablishment(const LinkObservation& obs, std::int64_t n,
                                ProtocolRecorder& rec);
    void release_all(PreamblePool& pool);
    void reset_trackers() noexcept;
    bool is_prepared_or_pending(int cell) const noexcept;

    int ue_;
    int cells_;
    ProtocolConfig config_;
    std::int64_t prep_steps_;
    std::int64_t reestablish_steps_;

    UePhase phase_ = UePhase::Detached;
    int serving_ = -1;
    std::vector<TttTracker> report_ttt_; ///< A3 (BHO) or Add (CHO), per neighbor
    std::vector<TttTracker> exec_ttt_;   ///< Execute, per prepared neighbor
    std::vector<PendingPreparation> pending_;
    std::vector<PreparedTarget> prepared_;
    std::size_t access_index_ = 0;
    T304Timer t304_;
    RlfMonitor rlf_;
    std::int64_t reestablish_at_ = 0;
    std::size_t failure_record_ = 0;
};

} // namespace chosim
