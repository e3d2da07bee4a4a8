#include "chosim/errors.hpp"
#include "chosim/handover.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <stdexcept>
#include <vector>

namespace chosim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(DurationSteps, RoundsUp)
{
    EXPECT_EQ(duration_steps(160.0, 10.0), 16);
    EXPECT_EQ(duration_steps(20.0, 10.0), 2);
    EXPECT_EQ(duration_steps(25.0, 10.0), 3);
    EXPECT_EQ(duration_steps(0.0, 10.0), 0);
    EXPECT_EQ(duration_steps(0.3 * 1000.0, 10.0), 30);
}

TEST(Ttt, FiresAfterWindowOfContinuousCondition)
{
    TttTracker t(16);
    for (std::int64_t n = 0; n < 16; ++n)
    {
        EXPECT_FALSE(t.update(true, n)) << n;
    }
    EXPECT_TRUE(t.update(true, 16));
}

TEST(Ttt, FalseStepResets)
{
    TttTracker t(4);
    EXPECT_FALSE(t.update(true, 0));
    EXPECT_FALSE(t.update(true, 3));
    EXPECT_FALSE(t.update(false, 4));
    EXPECT_FALSE(t.entry_step().has_value());
    EXPECT_FALSE(t.update(true, 5));
    EXPECT_FALSE(t.update(true, 8));
    EXPECT_TRUE(t.update(true, 9));
}

TEST(Ttt, ZeroWindowFiresImmediately)
{
    TttTracker t(0);
    EXPECT_TRUE(t.update(true, 7));
}

TEST(Events, A3NeedsNeighborAboveServingPlusOffset)
{
    TttTracker t(0);
    EXPECT_FALSE(a3_event(-90.0, -87.0, 3.0, t, 0)); // equal is not enough
    EXPECT_TRUE(a3_event(-90.0, -86.9, 3.0, t, 1));
}

TEST(Events, AddWithNegativeOffsetFiresBeforeNeighborIsStronger)
{
    TttTracker t(0);
    EXPECT_TRUE(add_event(-90.0, -92.0, -3.0, t, 0));
    EXPECT_FALSE(add_event(-90.0, -93.5, -3.0, t, 1));
}

TEST(Events, ExecRequiresPreparation)
{
    TttTracker t(0);
    EXPECT_THROW(exec_event(-90.0, -80.0, 3.0, false, t, 0), std::logic_error);
    EXPECT_TRUE(exec_event(-90.0, -80.0, 3.0, true, t, 0));
}

TEST(Delivery, StrictlyAboveGammaOut)
{
    EXPECT_FALSE(serving_link_delivers(-8.0, -8.0));
    EXPECT_TRUE(serving_link_delivers(-7.99, -8.0));
}

TEST(PreparedBeams, StrongestFirstTiesByIndex)
{
    const std::vector<double> l3{-100.0, -90.0, -95.0, -90.0, -120.0};
    EXPECT_EQ(select_prepared_beams(l3, 1), std::vector<int>{1});
    EXPECT_EQ(select_prepared_beams(l3, 3), (std::vector<int>{1, 3, 2}));
    EXPECT_EQ(select_prepared_beams(l3, 10), (std::vector<int>{1, 3, 2, 0, 4}));
}

TEST(PreparedBeams, NonFiniteReportsAreSkipped)
{
    const std::vector<double> l3{-kInf, -90.0, std::numeric_limits<double>::quiet_NaN()};
    EXPECT_EQ(select_prepared_beams(l3, 4), std::vector<int>{1});
}

TEST(PreamblePool, UniqueOwnershipAndRelease)
{
    PreamblePool pool(2, 3, 2);
    const auto a = pool.reserve(0, 1);
    const auto b = pool.reserve(0, 1);
    ASSERT_TRUE(a && b);
    EXPECT_NE(*a, *b);
    EXPECT_FALSE(pool.reserve(0, 1).has_value());
    EXPECT_EQ(pool.in_use(0, 1), 2);
    pool.release(0, 1, *a);
    EXPECT_EQ(pool.in_use(0, 1), 1);
    EXPECT_EQ(pool.reserve(0, 1), a);
    EXPECT_THROW(pool.release(1, 1, 0), std::logic_error);
}

TEST(Preparation, ReservesOnePreamblePerSelectedBeam)
{
    PreamblePool pool(1, 4, 8);
    const std::vector<double> l3{-100.0, -90.0, -95.0, -99.0};
    const PreparedTarget t = prepare_target(0, l3, 2, pool, 5);
    EXPECT_EQ(t.cell, 0);
    EXPECT_EQ(t.ready_step, 5);
    EXPECT_EQ(t.beam_ids(), (std::vector<int>{1, 2}));
    EXPECT_TRUE(t.contains(2));
    EXPECT_FALSE(t.contains(0));
    EXPECT_EQ(pool.in_use(0, 1), 1);
    release_target(t, pool);
    EXPECT_EQ(pool.in_use(0, 1), 0);
    EXPECT_EQ(pool.in_use(0, 2), 0);
}

TEST(Preparation, ExhaustedPoolGivesEmptyBeamSet)
{
    PreamblePool pool(1, 2, 1);
    const std::vector<double> l3{-90.0, -95.0};
    const PreparedTarget first = prepare_target(0, l3, 2, pool, 0);
    ASSERT_EQ(first.beams.size(), 2U);
    const PreparedTarget second = prepare_target(0, l3, 2, pool, 0);
    EXPECT_TRUE(second.beams.empty());
    // Nothing left half-held.
    EXPECT_EQ(pool.in_use(0, 0), 1);
    EXPECT_EQ(pool.in_use(0, 1), 1);
}

TEST(HandoverConfig, Validation)
{
    HandoverConfig c;
    EXPECT_NO_THROW(validate(c, 10.0));
    c.prepared_beams = 0;
    EXPECT_THROW(validate(c, 10.0), ConfigError);
    c = {};
    c.ttt_a3_ms = -1.0;
    EXPECT_THROW(validate(c, 10.0), ConfigError);
}

} // namespace
} // namespace chosim
