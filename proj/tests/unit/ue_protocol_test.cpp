#include "chosim/ue_protocol.hpp"

#include "protocol_properties.hpp"
#include "scripted_link.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <optional>
#include <vector>

namespace chosim {
namespace {

using testing::ScriptedLink;

constexpr int kCells = 2;
constexpr int kBeams = 4;

ProtocolConfig make_config(HandoverMode mode)
{
    ProtocolConfig c;
    c.handover.mode = mode;
    c.handover.prepared_beams = 2;
    c.rach.access_threshold_dbm = -100.0;
    return c;
}

struct Harness
{
    explicit Harness(HandoverMode mode) : Harness(make_config(mode)) {}
    explicit Harness(const ProtocolConfig& config)
        : link(kCells, kBeams), pool(kCells, kBeams, 4), recorder(0, true), ue(0, kCells, config)
    {
        link.set_cell(0, -90.0);
        link.set_cell(1, -95.0);
        ue.attach(0);
    }

    void run(std::int64_t from, std::int64_t to)
    {
        for (std::int64_t n = from; n < to; ++n)
        {
            ue.step(link, n, pool, recorder);
        }
    }

    std::optional<std::int64_t> first(HandoverEventType type) const
    {
        for (const HandoverRecord& r : recorder.handover_log())
        {
            if (r.type == type)
            {
                return r.step;
            }
        }
        return std::nullopt;
    }

    int held() const
    {
        int n = 0;
        for (int c = 0; c < kCells; ++c)
        {
            for (int b = 0; b < kBeams; ++b)
            {
                n += pool.in_use(c, b);
            }
        }
        return n;
    }

    ScriptedLink link;
    PreamblePool pool;
    ProtocolRecorder recorder;
    UeProtocol ue;
};

TEST(BaselineHandover, A3AfterTttThenPreparationThenAccess)
{
    Harness h(HandoverMode::Baseline);
    h.link.set_cell(1, -80.0);
    h.run(0, 40);
    EXPECT_EQ(h.first(HandoverEventType::A3), 16);
    EXPECT_EQ(h.first(HandoverEventType::PrepDone), 18);
    EXPECT_EQ(h.first(HandoverEventType::CmdDelivered), 18);
    EXPECT_EQ(h.first(HandoverEventType::HoSuccess), 18);
    EXPECT_EQ(h.ue.serving_cell(), 1);
    EXPECT_EQ(h.ue.phase(), UePhase::Connected);
    EXPECT_EQ(h.recorder.successful_handovers(), 1);
    EXPECT_EQ(h.held(), 0);
}

TEST(BaselineHandover, LostReportRearmsAfterFreshTtt)
{
    Harness h(HandoverMode::Baseline);
    h.link.set_cell(1, -80.0);
    h.link.set_cell_sinr(0, -9.0);
    h.run(0, 17);
    EXPECT_EQ(h.first(HandoverEventType::ReportLost), 16);
    EXPECT_FALSE(h.first(HandoverEventType::PrepDone).has_value());
    h.link.set_cell_sinr(0, 10.0);
    h.run(17, 40);
    const auto& log = h.recorder.handover_log();
    const auto second_a3 = std::find_if(log.begin(), log.end(), [](const HandoverRecord& r) {
        return r.type == HandoverEventType::A3 && r.step > 16;
    });
    ASSERT_NE(second_a3, log.end());
    EXPECT_EQ(second_a3->step, 33);
    EXPECT_EQ(h.first(HandoverEventType::HoSuccess), 35);
}

TEST(BaselineHandover, CommandLostWhenServingFadesDuringPreparation)
{
    Harness h(HandoverMode::Baseline);
    h.link.set_cell(1, -80.0);
    h.run(0, 17);
    h.link.set_cell_sinr(0, -9.0);
    h.run(17, 19);
    EXPECT_EQ(h.first(HandoverEventType::CmdLost), 18);
    EXPECT_FALSE(h.first(HandoverEventType::HoSuccess).has_value());
    EXPECT_EQ(h.ue.serving_cell(), 0);
    EXPECT_EQ(h.held(), 0);
}

TEST(ConditionalHandover, PreparesBeforeExecuting)
{
    Harness h(HandoverMode::Conditional);
    h.link.set_cell(1, -91.0); // inside the Add window, below the Exec window
    h.run(0, 30);
    EXPECT_EQ(h.first(HandoverEventType::Add), 16);
    EXPECT_EQ(h.first(HandoverEventType::PrepDone), 18);
    ASSERT_EQ(h.ue.prepared().size(), 1U);
    EXPECT_EQ(h.ue.prepared()[0].beams.size(), 2U);
    EXPECT_EQ(h.held(), 2);
    EXPECT_FALSE(h.first(HandoverEventType::Exec).has_value());

    h.link.set_cell(1, -80.0);
    h.run(30, 50);
    EXPECT_EQ(h.first(HandoverEventType::Exec), 38);
    EXPECT_EQ(h.first(HandoverEventType::HoSuccess), 38);
    ASSERT_EQ(h.recorder.cho_waiting_steps().size(), 1U);
    EXPECT_EQ(h.recorder.cho_waiting_steps()[0], 20);
    EXPECT_EQ(h.held(), 0);
    EXPECT_TRUE(h.ue.prepared().empty());
}

TEST(ConditionalHandover, ExecTttStartsOnlyOncePrepared)
{
    Harness h(HandoverMode::Conditional);
    h.link.set_cell(1, -80.0);
    h.run(0, 40);
    EXPECT_EQ(h.first(HandoverEventType::PrepDone), 18);
    EXPECT_EQ(h.first(HandoverEventType::Exec), 26);
}

TEST(RandomAccess, CfraOnPreparedBeamAboveThreshold)
{
    Harness h(HandoverMode::Baseline);
    h.link.set_cell(1, -80.0);
    h.link.set_l3(1, 2, -70.0);
    h.link.set_l1(1, 2, -70.0);
    h.run(0, 20);
    ASSERT_EQ(h.recorder.rach_log().size(), 1U);
    const RachRecord& r = h.recorder.rach_log()[0];
    EXPECT_EQ(r.beam, 2);
    EXPECT_TRUE(r.beam_prepared);
    EXPECT_EQ(r.kind, PreambleKind::Cfra);
    EXPECT_EQ(h.recorder.counters().cfra, 1);
}

TEST(RandomAccess, HofAfterT304)
{
    Harness h(HandoverMode::Baseline);
    h.link.set_cell(1, -80.0);
    h.link.set_cell_sinr(1, -20.0);
    h.run(0, 100);
    EXPECT_EQ(h.recorder.rach_log().size(), 50U);
    EXPECT_EQ(h.recorder.counters().hof, 1);
    EXPECT_EQ(h.recorder.counters().rlf, 0);
    ASSERT_EQ(h.recorder.failure_log().size(), 1U);
    const FailureRecord& f = h.recorder.failure_log()[0];
    EXPECT_EQ(f.cause, FailureCause::Hof);
    EXPECT_EQ(f.step, 68);
    EXPECT_EQ(f.reestablished_step, 78);
    EXPECT_EQ(f.new_cell, 1);
    EXPECT_EQ(h.recorder.reestablishments(), 1);
    EXPECT_EQ(h.held(), 0);
}

TEST(LinkSupervision, RlfThenReestablishment)
{
    Harness h(HandoverMode::Conditional);
    h.link.set_cell(1, -120.0);
    h.run(0, 5);
    h.link.set_cell_sinr(0, -10.0);
    h.run(5, 70);
    EXPECT_EQ(h.ue.phase(), UePhase::Reestablishing);
    h.link.set_cell_sinr(0, 10.0);
    h.run(70, 90);
    ASSERT_EQ(h.recorder.failure_log().size(), 1U);
    const FailureRecord& f = h.recorder.failure_log()[0];
    EXPECT_EQ(f.cause, FailureCause::Rlf);
    EXPECT_EQ(f.step, 65);
    EXPECT_EQ(f.reestablished_step, 75);
    EXPECT_EQ(f.new_cell, 0);
    EXPECT_EQ(h.ue.phase(), UePhase::Connected);
}

TEST(LinkSupervision, RecoveryAboveGammaInStopsT310)
{
    Harness h(HandoverMode::Baseline);
    h.link.set_cell(1, -120.0);
    h.link.set_cell_sinr(0, -10.0);
    h.run(0, 50);
    EXPECT_TRUE(h.ue.rlf_monitor().running());
    h.link.set_cell_sinr(0, -5.0);
    h.run(50, 200);
    EXPECT_FALSE(h.ue.rlf_monitor().running());
    EXPECT_TRUE(h.recorder.failure_log().empty());
}

TEST(LinkSupervision, FailureReleasesPreparedTargets)
{
    Harness h(HandoverMode::Conditional);
    h.link.set_cell(1, -91.0);
    h.run(0, 20);
    ASSERT_EQ(h.held(), 2);
    h.link.set_cell_sinr(0, -10.0);
    h.run(20, 90);
    EXPECT_EQ(h.recorder.counters().rlf, 1);
    EXPECT_EQ(h.held(), 0);
}

TEST(Recorder, WarmupExcludesEarlyEvents)
{
    ProtocolConfig config = make_config(HandoverMode::Baseline);
    config.warmup_steps = 20;
    Harness h(config);
    h.recorder = ProtocolRecorder(20, true);
    h.link.set_cell(1, -80.0);
    h.run(0, 40);
    EXPECT_EQ(h.first(HandoverEventType::HoSuccess), 18);
    EXPECT_EQ(h.recorder.successful_handovers(), 0);
    EXPECT_EQ(h.recorder.counters().cfra + h.recorder.counters().cbra, 0);
}

TEST(ProtocolProperties, RandomTracesKeepInvariants)
{
    testing::PropertyTally tally;
    for (std::uint64_t i = 0; i < 500; ++i)
    {
        testing::check_protocol_trace(11, i, tally);
    }
    for (const auto& [property, count] : tally.violations)
    {
        ADD_FAILURE() << property << ": " << count << " violations, first "
                      << tally.first_violation[property];
    }
    EXPECT_GT(tally.reports, 0);
    EXPECT_GT(tally.lost_reports, 0);
    EXPECT_GT(tally.executions, 0);
    EXPECT_GT(tally.handovers, 0);
    EXPECT_GT(tally.cfra, 0);
    EXPECT_GT(tally.cbra, 0);
    EXPECT_GT(tally.hof, 0);
    EXPECT_GT(tally.rlf, 0);
    EXPECT_GT(tally.reestablishments, 0);
}

} // namespace
} // namespace chosim
