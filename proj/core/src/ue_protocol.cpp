#include "chosim/ue_protocol.hpp"

#include "chosim/errors.hpp"
#include "chosim/rng.hpp"

#include <algorithm>

namespace chosim {

void validate(const ProtocolConfig& c)
{
    if (!(c.step_ms > 0.0))
    {
        throw ConfigError("time step must be positive");
    }
    validate(c.handover, c.step_ms);
    validate(c.rach, c.step_ms);
    validate(c.rlf);
}

std::string_view to_string(HandoverEventType type) noexcept
{
    switch (type)
    {
    case HandoverEventType::A3:
        return "A3";
    case HandoverEventType::Add:
        return "ADD";
    case HandoverEventType::ReportLost:
        return "REPORT_LOST";
    case HandoverEventType::Exec:
        return "EXEC";
    case HandoverEventType::PrepDone:
        return "PREP_DONE";
    case HandoverEventType::CmdDelivered:
        return "CMD_DELIVERED";
    case HandoverEventType::CmdLost:
        return "CMD_LOST";
    case HandoverEventType::HoSuccess:
        return "HO_SUCCESS";
    }
    return "?";
}

// ---------------------------------------------------------------------------

void ProtocolRecorder::handover_event(const HandoverRecord& r)
{
    if (r.type == HandoverEventType::HoSuccess && counted(r.step))
    {
        ++handovers_;
    }
    if (keep_logs_)
    {
        handover_log_.push_back(r);
    }
}

void ProtocolRecorder::rach_attempt(const RachRecord& r)
{
    if (keep_logs_)
    {
        rach_log_.push_back(r);
    }
}

void ProtocolRecorder::access_completed(PreambleKind kind, std::int64_t step)
{
    if (!counted(step))
    {
        return;
    }
    if (kind == PreambleKind::Cfra)
    {
        ++counters_.cfra;
    }
    else
    {
        ++counters_.cbra;
    }
}

std::size_t ProtocolRecorder::failure_declared(const FailureRecord& r)
{
    ++failures_declared_;
    if (counted(r.step))
    {
        if (r.cause == FailureCause::Hof)
        {
            ++counters_.hof;
        }
        else
        {
            ++counters_.rlf;
        }
    }
    if (!keep_logs_)
    {
        return 0;
    }
    failure_log_.push_back(r);
    return failure_log_.size() - 1;
}

void ProtocolRecorder::failure_resolved(std::size_t index, int new_cell, std::int64_t step)
{
    ++reestablishments_;
    if (keep_logs_)
    {
        failure_log_[index].new_cell = new_cell;
        failure_log_[index].reestablished_step = step;
    }
}

void ProtocolRecorder::cho_waiting_time(std::int64_t steps, std::int64_t step)
{
    if (counted(step))
    {
        waiting_.push_back(steps);
    }
}

// ---------------------------------------------------------------------------

UeProtocol::UeProtocol(int ue, int cells, const ProtocolConfig& config)
    : ue_(ue),
      cells_(cells),
      config_(config),
      prep_steps_(duration_steps(config.handover.preparation_ms, config.step_ms)),
      reestablish_steps_(duration_steps(config.rlf.reestablishment_ms, config.step_ms)),
      report_ttt_(static_cast<std::size_t>(cells),
                  TttTracker(duration_steps(config.handover.mode == HandoverMode::Baseline
                                                ? config.handover.ttt_a3_ms
                                                : config.handover.ttt_add_ms,
                                            config.step_ms))),
      exec_ttt_(static_cast<std::size_t>(cells),
                TttTracker(duration_steps(config.handover.ttt_exec_ms, config.step_ms))),
      t304_(duration_steps(config.rach.t304_ms, config.step_ms),
            duration_steps(config.rach.retry_period_ms, config.step_ms)),
      rlf_(config.rlf.gamma_out_db, config.rlf.gamma_in_db,
           duration_steps(config.rlf.t310_ms, config.step_ms))
{
}

void UeProtocol::attach(int cell) noexcept
{
    serving_ = cell;
    phase_ = UePhase::Connected;
    reset_trackers();
    rlf_.reset();
}

void UeProtocol::reset_trackers() noexcept
{
    for (auto& t : report_ttt_)
    {
        t.reset();
    }
    for (auto& t : exec_ttt_)
    {
        t.reset();
    }
}

bool UeProtocol::is_prepared_or_pending(int cell) const noexcept
{
    return std::any_of(prepared_.begin(), prepared_.end(),
                       [cell](const PreparedTarget& t) { return t.cell == cell; }) ||
           std::any_of(pending_.begin(), pending_.end(),
                       [cell](const PendingPreparation& p) { return p.cell == cell; });
}

void UeProtocol::release_all(PreamblePool& pool)
{
    for (const PreparedTarget& t : prepared_)
    {
        release_target(t, pool);
    }
    prepared_.clear();
    pending_.clear();
}

void UeProtocol::step(const LinkObservation& obs, std::int64_t n, PreamblePool& pool,
                      ProtocolRecorder& rec)
{
    switch (phase_)
    {
    case UePhase::Detached:
        return;
    case UePhase::Reestablishing:
        if (n >= reestablish_at_)
        {
            finish_reestablishment(obs, n, rec);
        }
        return;
    case UePhase::Executing:
        step_access(obs, n, pool, rec);
        return;
    case UePhase::Connected:
        step_connected(obs, n, pool, rec);
        return;
    }
}

void UeProtocol::step_connected(const LinkObservation& obs, std::int64_t n, PreamblePool& pool,
                                ProtocolRecorder& rec)
{
    const double serving_sinr = obs.sinr_db(serving_, obs.serving_beam(serving_));
    if (rlf_.step(serving_sinr, n) == RlfEvent::Failure)
    {
        declare_failure(FailureCause::Rlf, obs, n, pool, rec);
        return;
    }
    if (config_.handover.mode == HandoverMode::Baseline)
    {
        step_baseline(obs, n, serving_sinr, pool, rec);
    }
    else
    {
        step_conditional(obs, n, serving_sinr, pool, rec);
    }
}

void UeProtocol::send_report(const LinkObservation& obs, int cell, std::int64_t n,
                             double serving_sinr, ProtocolRecorder& rec)
{
    const bool baseline = config_.handover.mode == HandoverMode::Baseline;
    rec.handover_event({n, ue_, baseline ? HandoverEventType::A3 : HandoverEventType::Add,
                        serving_, cell});
    if (!serving_link_delivers(serving_sinr, config_.rlf.gamma_out_db))
    {
        rec.handover_event({n, ue_, HandoverEventType::ReportLost, serving_, cell});
        report_ttt_[cell].reset();
        return;
    }
    const auto beams = obs.l3_beams(cell);
    pending_.push_back({cell, n, n + prep_steps_, {beams.begin(), beams.end()}});
    report_ttt_[cell].reset();
}

int UeProtocol::complete_preparations(std::int64_t n, double serving_sinr, PreamblePool& pool,
                                      ProtocolRecorder& rec)
{
    int delivered = -1;
    auto it = pending_.begin();
    while (it != pending_.end())
    {
        if (it->ready_step > n)
        {
            ++it;
            continue;
        }
        PreparedTarget target = prepare_target(it->cell, it->reported_l3,
                                               config_.handover.prepared_beams, pool, n);
        rec.handover_event({n, ue_, HandoverEventType::PrepDone, serving_, it->cell});
        if (serving_link_delivers(serving_sinr, config_.rlf.gamma_out_db))
        {
            rec.handover_event({n, ue_, HandoverEventType::CmdDelivered, serving_, it->cell});
            exec_ttt_[it->cell].reset();
            prepared_.push_back(std::move(target));
            delivered = static_cast<int>(prepared_.size() - 1);
        }
        else
        {
            rec.handover_event({n, ue_, HandoverEventType::CmdLost, serving_, it->cell});
            release_target(target, pool);
            report_ttt_[it->cell].reset();
        }
        it = pending_.erase(it);
    }
    return delivered;
}

void UeProtocol::step_baseline(const LinkObservation& obs, std::int64_t n, double serving_sinr,
                               PreamblePool& pool, ProtocolRecorder& rec)
{
    if (pending_.empty())
    {
        const auto l3 = obs.l3_cells();
        int best = -1;
        for (int c = 0; c < cells_; ++c)
        {
            if (c == serving_)
            {
                continue;
            }
            if (a3_event(l3[serving_], l3[c], config_.handover.a3_offset_db, report_ttt_[c], n) &&
                (best < 0 || l3[c] > l3[best]))
            {
                best = c;
            }
        }
        if (best < 0)
        {
            return;
        }
        send_report(obs, best, n, serving_sinr, rec);
        if (pending_.empty())
        {
            return;
        }
        // Reporting is suspended until this preparation resolves.
        reset_trackers();
    }
    const int delivered = complete_preparations(n, serving_sinr, pool, rec);
    if (delivered >= 0)
    {
        start_access(obs, static_cast<std::size_t>(delivered), n, pool, rec);
    }
}

void UeProtocol::step_conditional(const LinkObservation& obs, std::int64_t n,
                                  double serving_sinr, PreamblePool& pool, ProtocolRecorder& rec)
{
    const auto l3 = obs.l3_cells();
    complete_preparations(n, serving_sinr, pool, rec);

    int chosen = -1;
    for (std::size_t i = 0; i < prepared_.size(); ++i)
    {
        const int c = prepared_[i].cell;
        if (exec_event(l3[serving_], l3[c], config_.handover.exec_offset_db, true, exec_ttt_[c],
                       n) &&
            (chosen < 0 || l3[c] > l3[prepared_[chosen].cell]))
        {
            chosen = static_cast<int>(i);
        }
    }
    if (chosen >= 0)
    {
        const PreparedTarget& t = prepared_[chosen];
        rec.handover_event({n, ue_, HandoverEventType::Exec, serving_, t.cell});
        rec.cho_waiting_time(n - t.ready_step, n);
        start_access(obs, static_cast<std::size_t>(chosen), n, pool, rec);
        return;
    }

    std::vector<int> fired;
    for (int c = 0; c < cells_; ++c)
    {
        if (c == serving_ || is_prepared_or_pending(c))
        {
            continue;
        }
        if (add_event(l3[serving_], l3[c], config_.handover.add_offset_db, report_ttt_[c], n))
        {
            fired.push_back(c);
        }
    }
    std::stable_sort(fired.begin(), fired.end(), [&](int a, int b) { return l3[a] > l3[b]; });
    for (int c : fired)
    {
        if (static_cast<int>(prepared_.size() + pending_.size()) >=
            config_.handover.max_prepared_cells)
        {
            break;
        }
        send_report(obs, c, n, serving_sinr, rec);
    }
    if (!fired.empty() && prep_steps_ == 0)
    {
        complete_preparations(n, serving_sinr, pool, rec);
    }
}

void UeProtocol::start_access(const LinkObservation& obs, std::size_t target, std::int64_t n,
                              PreamblePool& pool, ProtocolRecorder& rec)
{
    phase_ = UePhase::Executing;
    access_index_ = target;
    pending_.clear();
    rlf_.reset();
    t304_.start(n);
    step_access(obs, n, pool, rec);
}

void UeProtocol::step_access(const LinkObservation& obs, std::int64_t n, PreamblePool& pool,
                             ProtocolRecorder& rec)
{
    const PreparedTarget& target = prepared_[access_index_];
    if (t304_.attempt_due(n))
    {
        const AccessBeam choice =
            select_access_beam(obs.l1_beams(target.cell), target, config_.rach.access_threshold_dbm);
        const PreambleKind kind = select_preamble(choice, config_.rach.procedure);
        const double sinr = obs.sinr_db(target.cell, choice.beam);
        const std::uint64_t key =
            rng::hash_key({config_.contention_seed, static_cast<std::uint64_t>(rng::Stream::Contention),
                           static_cast<std::uint64_t>(ue_), static_cast<std::uint64_t>(n)});
        const bool ok = rach_attempt_succeeds(sinr, config_.rlf.gamma_out_db, kind,
                                              config_.rach.cbra_collision_probability, key);
        rec.rach_attempt({n, ue_, target.cell, choice.beam, kind, ok, choice.prepared,
                          n - t304_.start_step()});
        if (ok)
        {
            const int old = serving_;
            serving_ = target.cell;
            rec.access_completed(kind, n);
            rec.handover_event({n, ue_, HandoverEventType::HoSuccess, old, serving_});
            t304_.stop();
            release_all(pool);
            phase_ = UePhase::Connected;
            reset_trackers();
            rlf_.reset();
            return;
        }
    }
    if (t304_.expired(n))
    {
        declare_failure(FailureCause::Hof, obs, n, pool, rec);
    }
}

void UeProtocol::declare_failure(FailureCause cause, const LinkObservation& obs, std::int64_t n,
                                 PreamblePool& pool, ProtocolRecorder& rec)
{
    failure_record_ = rec.failure_declared({n, ue_, cause, serving_, -1, -1});
    t304_.stop();
    rlf_.reset();
    release_all(pool);
    reset_trackers();
    phase_ = UePhase::Reestablishing;
    reestablish_at_ = n + reestablish_steps_;
    if (reestablish_steps_ == 0)
    {
        finish_reestablishment(obs, n, rec);
    }
}

void UeProtocol::finish_reestablishment(const LinkObservation& obs, std::int64_t n,
                                        ProtocolRecorder& rec)
{
    serving_ = reestablishment_cell(obs.l3_cells());
    rec.failure_resolved(failure_record_, serving_, n);
    phase_ = UePhase::Connected;
    reset_trackers();
    rlf_.reset();
}

} // namespace chosim
