#pragma once

#include "chosim/rng.hpp"
#include "chosim/ue_protocol.hpp"

#include "scripted_link.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace chosim::testing {

inline constexpr const char* kTttProperty = "ttt-reset";
inline constexpr const char* kPrepareProperty = "prepare-before-execute";
inline constexpr const char* kCfraProperty = "cfra-implies-prepared";
inline constexpr const char* kExclusionProperty = "hof-rlf-exclusive";
inline constexpr const char* kReestablishProperty = "single-reestablishment";

/// Counts of what the randomized traces exercised and which properties broke.
struct PropertyTally
{
    std::int64_t traces = 0;
    std::int64_t steps = 0;
    std::int64_t reports = 0;
    std::int64_t lost_reports = 0;
    std::int64_t executions = 0;
    std::int64_t handovers = 0;
    std::int64_t cfra = 0;
    std::int64_t cbra = 0;
    std::int64_t hof = 0;
    std::int64_t rlf = 0;
    std::int64_t reestablishments = 0;
    std::map<std::string, std::int64_t> violations;
    std::map<std::string, std::string> first_violation;

    void fail(const std::string& property, const std::string& what)
    {
        if (violations[property]++ == 0)
        {
            first_violation[property] = what;
        }
    }
    std::int64_t violated(const std::string& property) const
    {
        const auto it = violations.find(property);
        return it == violations.end() ? 0 : it->second;
    }
};

/// Random walk over cell levels, beam offsets and SINR with occasional
/// jumps and deep fades, so reports, losses, HOFs and RLFs all occur.
class RandomScript
{
  public:
    RandomScript(int cells, int beams, rng::Substream& gen)
        : gen_(gen), link_(cells, beams), level_(cells), sinr_(cells), fade_(cells),
          offset_(static_cast<std::size_t>(cells * beams))
    {
        for (int c = 0; c < cells; ++c)
        {
            level_[c] = gen_.uniform(-110.0, -75.0);
            sinr_[c] = gen_.uniform(-5.0, 15.0);
        }
        for (double& o : offset_)
        {
            o = gen_.uniform(-8.0, 3.0);
        }
        advance();
    }

    const ScriptedLink& link() const noexcept { return link_; }

    void advance()
    {
        const int cells = link_.cells();
        const int beams = link_.beams();
        for (int c = 0; c < cells; ++c)
        {
            level_[c] = std::clamp(level_[c] + gen_.gaussian(), -125.0, -65.0);
            if (gen_.uniform() < 0.01)
            {
                level_[c] = std::clamp(level_[c] + gen_.uniform(-15.0, 15.0), -125.0, -65.0);
            }
            sinr_[c] = std::clamp(sinr_[c] + gen_.gaussian(), -15.0, 20.0);
            if (gen_.uniform() < 0.01)
            {
                fade_[c] = !fade_[c];
            }
            link_.set_cell(c, level_[c]);
            for (int b = 0; b < beams; ++b)
            {
                double& o = offset_[c * beams + b];
                o = std::clamp(o + 0.5 * gen_.gaussian(), -10.0, 5.0);
                link_.set_l3(c, b, level_[c] + o);
                link_.set_l1(c, b, level_[c] + o + 2.0 * gen_.gaussian());
                const double base = fade_[c] ? -12.0 + gen_.gaussian() : sinr_[c];
                link_.set_sinr(c, b, base + 0.5 * o + gen_.gaussian());
            }
        }
    }

  private:
    rng::Substream& gen_;
    ScriptedLink link_;
    std::vector<double> level_;
    std::vector<double> sinr_;
    std::vector<bool> fade_;
    std::vector<double> offset_;
};

/// Drives one UE through a randomized scripted trace and checks the
/// state-machine properties against the script, independently of the
/// protocol's own bookkeeping.
inline void check_protocol_trace(std::uint64_t seed, std::uint64_t index, PropertyTally& tally,
                                 int steps = 300)
{
    rng::Substream gen(seed, rng::Stream::Mobility, index);
    const int cells = 2 + static_cast<int>(gen.below(3));
    const int beams = 1 + static_cast<int>(gen.below(4));

    ProtocolConfig cfg;
    cfg.step_ms = 10.0;
    cfg.handover.mode = gen.below(2) == 0 ? HandoverMode::Baseline : HandoverMode::Conditional;
    cfg.handover.a3_offset_db = gen.uniform(0.0, 4.0);
    cfg.handover.add_offset_db = gen.uniform(-4.0, 0.0);
    cfg.handover.exec_offset_db = gen.uniform(0.0, 4.0);
    cfg.handover.ttt_a3_ms = 10.0 * static_cast<double>(gen.below(6));
    cfg.handover.ttt_add_ms = 10.0 * static_cast<double>(gen.below(6));
    cfg.handover.ttt_exec_ms = 10.0 * static_cast<double>(gen.below(4));
    cfg.handover.preparation_ms = 10.0 * static_cast<double>(gen.below(4));
    cfg.handover.prepared_beams = 1 + static_cast<int>(gen.below(static_cast<std::uint64_t>(beams)));
    cfg.handover.max_prepared_cells = 1 + static_cast<int>(gen.below(3));
    cfg.rach.procedure = gen.below(2) == 0 ? RachProcedure::ThreeGpp : RachProcedure::Proposed;
    const double thresholds[] = {-std::numeric_limits<double>::infinity(), -105.0, -95.0,
                                 gen.uniform(-110.0, -80.0),
                                 std::numeric_limits<double>::infinity()};
    cfg.rach.access_threshold_dbm = thresholds[gen.below(5)];
    cfg.rach.t304_ms = 10.0 * static_cast<double>(2 + gen.below(10));
    cfg.rach.retry_period_ms = 10.0 * static_cast<double>(1 + gen.below(2));
    cfg.rach.cbra_collision_probability = gen.below(2) == 0 ? 0.0 : 0.3;
    cfg.rlf.t310_ms = 10.0 * static_cast<double>(2 + gen.below(10));
    cfg.rlf.reestablishment_ms = 10.0 * static_cast<double>(gen.below(4));
    cfg.contention_seed = index;

    const std::int64_t ttt_report = duration_steps(
        cfg.handover.mode == HandoverMode::Baseline ? cfg.handover.ttt_a3_ms
                                                    : cfg.handover.ttt_add_ms,
        cfg.step_ms);
    const std::int64_t ttt_exec = duration_steps(cfg.handover.ttt_exec_ms, cfg.step_ms);
    const std::int64_t prep = duration_steps(cfg.handover.preparation_ms, cfg.step_ms);
    const std::int64_t t304 = duration_steps(cfg.rach.t304_ms, cfg.step_ms);
    const std::int64_t retry = duration_steps(cfg.rach.retry_period_ms, cfg.step_ms);
    const std::int64_t t310 = duration_steps(cfg.rlf.t310_ms, cfg.step_ms);
    const std::int64_t reest = duration_steps(cfg.rlf.reestablishment_ms, cfg.step_ms);
    const double report_offset = cfg.handover.mode == HandoverMode::Baseline
                                     ? cfg.handover.a3_offset_db
                                     : cfg.handover.add_offset_db;

    RandomScript script(cells, beams, gen);
    PreamblePool pool(cells, beams, 64);
    ProtocolRecorder rec(0, true);
    UeProtocol ue(0, cells, cfg);
    ue.attach(0);

    struct Snapshot
    {
        UePhase phase;
        int serving;
        ScriptedLink link;
    };
    std::vector<Snapshot> history;

    const auto where = [&](std::int64_t n) {
        std::ostringstream s;
        s << "trace " << index << " step " << n;
        return s.str();
    };
    const auto serving_sinr = [](const Snapshot& s) {
        return s.link.sinr_db(s.serving, s.link.serving_beam(s.serving));
    };
    // Strongest N_B finite L3 beams of a cell, ties by lower index.
    const auto oracle_bprep = [&](const ScriptedLink& link, int cell) {
        std::vector<int> ids;
        const auto l3 = link.l3_beams(cell);
        for (int b = 0; b < beams; ++b)
        {
            if (std::isfinite(l3[b]))
            {
                ids.push_back(b);
            }
        }
        std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return l3[a] > l3[b]; });
        ids.resize(std::min<std::size_t>(ids.size(), cfg.handover.prepared_beams));
        return std::set<int>(ids.begin(), ids.end());
    };

    std::map<int, std::int64_t> last_report;       // cell -> step of last report event
    std::map<int, std::int64_t> report_sent;       // cell -> step of delivered report
    std::map<int, std::set<int>> reported_beams;   // cell -> oracle B_prep at report time
    std::map<int, std::int64_t> delivered;         // cell -> command delivery step
    std::map<int, std::set<int>> prepared_beams;   // cell -> oracle B_prep of delivered target
    std::map<int, std::int64_t> executed;          // cell -> Exec step (CHO)
    std::int64_t episode_attempts = 0;
    bool episode_success = false;
    std::int64_t awaiting_reestablishment = -1; // due step, -1 when none
    std::size_t seen_ho = 0;
    std::size_t seen_rach = 0;
    std::size_t seen_fail = 0;
    std::int64_t resolved_seen = 0;

    const auto clear_episode = [&] {
        report_sent.clear();
        reported_beams.clear();
        delivered.clear();
        prepared_beams.clear();
        executed.clear();
        episode_attempts = 0;
        episode_success = false;
    };

    const auto window_holds = [&](std::int64_t from, std::int64_t to, int serving, int target,
                                  double offset) {
        if (from < 0)
        {
            return false;
        }
        for (std::int64_t k = from; k <= to; ++k)
        {
            const Snapshot& s = history[k];
            const auto l3 = s.link.l3_cells();
            if (s.phase != UePhase::Connected || s.serving != serving ||
                !(l3[target] > l3[serving] + offset))
            {
                return false;
            }
        }
        return true;
    };

    for (std::int64_t n = 0; n < steps; ++n)
    {
        history.push_back({ue.phase(), ue.serving_cell(), script.link()});
        const Snapshot& now = history.back();
        ue.step(script.link(), n, pool, rec);
        ++tally.steps;

        int failures_this_step = 0;
        const auto ho = rec.handover_log();
        for (; seen_ho < ho.size(); ++seen_ho)
        {
            const HandoverRecord& r = ho[seen_ho];
            if (awaiting_reestablishment >= 0 || now.phase == UePhase::Reestablishing)
            {
                tally.fail(kReestablishProperty, where(n) + ": handover event while re-establishing");
            }
            switch (r.type)
            {
            case HandoverEventType::A3:
            case HandoverEventType::Add:
            {
                ++tally.reports;
                if (!window_holds(n - ttt_report, n, r.serving, r.target, report_offset))
                {
                    tally.fail(kTttProperty, where(n) + ": report without a full TTT window");
                }
                if (const auto it = last_report.find(r.target);
                    it != last_report.end() && n - ttt_report <= it->second)
                {
                    tally.fail(kTttProperty, where(n) + ": report TTT not restarted");
                }
                last_report[r.target] = n;
                report_sent[r.target] = n;
                reported_beams[r.target] = oracle_bprep(now.link, r.target);
                break;
            }
            case HandoverEventType::ReportLost:
                ++tally.lost_reports;
                report_sent.erase(r.target);
                if (serving_sinr(now) > cfg.rlf.gamma_out_db)
                {
                    tally.fail(kPrepareProperty, where(n) + ": report lost on a good link");
                }
                break;
            case HandoverEventType::PrepDone:
            {
                const auto it = report_sent.find(r.target);
                if (it == report_sent.end() || n - it->second != prep)
                {
                    tally.fail(kPrepareProperty, where(n) + ": preparation without report + T_p");
                }
                break;
            }
            case HandoverEventType::CmdDelivered:
                delivered[r.target] = n;
                prepared_beams[r.target] = reported_beams[r.target];
                report_sent.erase(r.target);
                break;
            case HandoverEventType::CmdLost:
                report_sent.erase(r.target);
                break;
            case HandoverEventType::Exec:
            {
                ++tally.executions;
                const auto it = delivered.find(r.target);
                if (it == delivered.end())
                {
                    tally.fail(kPrepareProperty, where(n) + ": execution of unprepared target");
                    break;
                }
                if (!window_holds(n - ttt_exec, n, r.serving, r.target,
                                  cfg.handover.exec_offset_db))
                {
                    tally.fail(kTttProperty, where(n) + ": execution without a full TTT window");
                }
                if (n - ttt_exec < it->second)
                {
                    tally.fail(kTttProperty, where(n) + ": execution TTT predates preparation");
                }
                executed[r.target] = n;
                break;
            }
            case HandoverEventType::HoSuccess:
            {
                ++tally.handovers;
                if (!delivered.contains(r.target))
                {
                    tally.fail(kPrepareProperty, where(n) + ": handover to unprepared target");
                }
                if (cfg.handover.mode == HandoverMode::Conditional && !executed.contains(r.target))
                {
                    tally.fail(kPrepareProperty, where(n) + ": CHO access without execution");
                }
                episode_success = true;
                break;
            }
            }
        }

        const auto rach = rec.rach_log();
        for (; seen_rach < rach.size(); ++seen_rach)
        {
            const RachRecord& r = rach[seen_rach];
            ++episode_attempts;
            if (r.kind == PreambleKind::Cfra)
            {
                ++tally.cfra;
            }
            else
            {
                ++tally.cbra;
            }
            const auto it = prepared_beams.find(r.target);
            if (it == prepared_beams.end())
            {
                tally.fail(kPrepareProperty, where(n) + ": access to a target never delivered");
                continue;
            }
            const bool in_bprep = it->second.contains(r.beam);
            if (r.beam_prepared != in_bprep)
            {
                tally.fail(kCfraProperty, where(n) + ": prepared flag disagrees with B_prep");
            }
            if (r.kind == PreambleKind::Cfra && !in_bprep)
            {
                tally.fail(kCfraProperty, where(n) + ": CFRA on a beam outside B_prep");
            }
            const double l1 = now.link.l1_beams(r.target)[r.beam];
            const bool expect_cfra = cfg.rach.procedure == RachProcedure::Proposed
                                         ? in_bprep
                                         : in_bprep && l1 > cfg.rach.access_threshold_dbm;
            if ((r.kind == PreambleKind::Cfra) != expect_cfra)
            {
                tally.fail(kCfraProperty, where(n) + ": preamble kind disagrees with procedure");
            }
            if (r.success && !(now.link.sinr_db(r.target, r.beam) > cfg.rlf.gamma_out_db))
            {
                tally.fail(kExclusionProperty, where(n) + ": access succeeded below gamma_out");
            }
        }

        const auto fails = rec.failure_log();
        for (; seen_fail < fails.size(); ++seen_fail)
        {
            const FailureRecord& f = fails[seen_fail];
            ++failures_this_step;
            if (awaiting_reestablishment >= 0)
            {
                tally.fail(kReestablishProperty, where(n) + ": failure while re-establishing");
            }
            if (f.cause == FailureCause::Hof)
            {
                ++tally.hof;
                const std::int64_t expected_attempts = (t304 + retry - 1) / retry;
                if (now.phase != UePhase::Executing || episode_success ||
                    episode_attempts != expected_attempts)
                {
                    tally.fail(kExclusionProperty, where(n) + ": HOF outside an expired access");
                }
            }
            else
            {
                ++tally.rlf;
                bool ok = now.phase == UePhase::Connected && n - t310 >= 0;
                if (ok)
                {
                    const Snapshot& start = history[n - t310];
                    ok = start.phase == UePhase::Connected && start.serving == f.old_serving &&
                         serving_sinr(start) < cfg.rlf.gamma_out_db;
                    for (std::int64_t k = n - t310 + 1; ok && k <= n; ++k)
                    {
                        ok = history[k].phase == UePhase::Connected &&
                             history[k].serving == f.old_serving &&
                             serving_sinr(history[k]) <= cfg.rlf.gamma_in_db;
                    }
                }
                if (!ok)
                {
                    tally.fail(kExclusionProperty, where(n) + ": RLF without T310 expiry");
                }
            }
            awaiting_reestablishment = n + reest;
            clear_episode();
            last_report.clear();
        }
        if (failures_this_step > 1)
        {
            tally.fail(kExclusionProperty, where(n) + ": two failures in one step");
        }
        if (episode_success)
        {
            clear_episode();
            last_report.clear();
        }

        if (rec.reestablishments() != resolved_seen)
        {
            ++tally.reestablishments;
            if (rec.reestablishments() - resolved_seen != 1 || awaiting_reestablishment != n)
            {
                tally.fail(kReestablishProperty, where(n) + ": re-establishment off schedule");
            }
            else
            {
                const FailureRecord& f = rec.failure_log().back();
                const auto l3 = script.link().l3_cells();
                const int best = static_cast<int>(std::max_element(l3.begin(), l3.end()) -
                                                  l3.begin());
                if (f.reestablished_step != n || f.new_cell != best ||
                    ue.serving_cell() != best || ue.phase() != UePhase::Connected)
                {
                    tally.fail(kReestablishProperty, where(n) + ": wrong re-establishment");
                }
            }
            resolved_seen = rec.reestablishments();
            awaiting_reestablishment = -1;
        }
        else if (awaiting_reestablishment >= 0 && awaiting_reestablishment < n)
        {
            tally.fail(kReestablishProperty, where(n) + ": re-establishment missed");
            awaiting_reestablishment = -1;
        }
        script.advance();
    }

    const std::int64_t open = awaiting_reestablishment >= 0 ? 1 : 0;
    if (rec.declared_failures() != rec.reestablishments() + open)
    {
        tally.fail(kReestablishProperty, where(steps) + ": failures and re-establishments differ");
    }
    if (ue.phase() != UePhase::Executing && ue.phase() != UePhase::Connected)
    {
        if (ue.phase() != UePhase::Reestablishing || open == 0)
        {
            tally.fail(kReestablishProperty, where(steps) + ": unexpected final phase");
        }
    }
    ++tally.traces;
}

} // namespace chosim::testing
