#include "chosim/errors.hpp"
#include "chosim/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace chosim {
namespace {

ScenarioConfig small_grid(std::uint64_t seed = 1)
{
    ScenarioConfig c;
    BlockGridLayout g;
    g.blocks_x = 3;
    g.blocks_y = 2;
    g.square_block = std::pair{2, 0};
    g.pedestrian_row = 1;
    g.pedestrian_from = 0;
    g.pedestrian_to = 1;
    apply_block_grid(g, c);
    const Rect b = g.block(0, 0);
    c.sites.push_back({0, {0.5 * (b.min.x + b.max.x), 0.5 * (b.min.y + b.max.y)}, 10.0, 3, 30.0});
    c.groups = {{"cars", 10, 30.0, MovementDomain::Streets, DirectionPolicy::Bidirectional},
                {"square", 5, 3.0, MovementDomain::OpenSquare, DirectionPolicy::RandomWaypoint},
                {"walk", 5, 3.0, MovementDomain::PedestrianArea, DirectionPolicy::RandomWaypoint}};
    c.seed = seed;
    return c;
}

TEST(DefaultScenario, CellAndUserCounts)
{
    const ScenarioConfig c = default_scenario_config();
    EXPECT_EQ(c.total_cells(), 33);
    EXPECT_EQ(c.total_ues(), 320);
    EXPECT_NO_THROW(validate(c));
}

TEST(BlockGrid, LayoutPieces)
{
    const ScenarioConfig c = small_grid();
    // 6 blocks, one square and two strip blocks removed.
    EXPECT_EQ(c.buildings.size(), 3U);
    EXPECT_EQ(c.open_squares.size(), 1U);
    EXPECT_EQ(c.pedestrian_areas.size(), 1U);
    EXPECT_EQ(c.streets.size(), 4U + 3U);
    EXPECT_DOUBLE_EQ(c.bounds.max.x, 3 * 75.0 + 15.0);
    EXPECT_DOUBLE_EQ(c.bounds.max.y, 2 * 65.0 + 15.0);
}

TEST(StreetNetwork, SplitsAtCrossings)
{
    const std::vector<Polyline> streets{{{{0.0, 5.0}, {10.0, 5.0}}}, {{{5.0, 0.0}, {5.0, 10.0}}}};
    const StreetNetwork net(streets);
    EXPECT_EQ(net.nodes().size(), 5U);
    EXPECT_EQ(net.edges().size(), 4U);
    EXPECT_NEAR(net.total_length(), 20.0, 1e-12);
    EXPECT_NEAR(net.distance_to_network({5.0, 8.0}), 0.0, 1e-12);
    EXPECT_NEAR(net.distance_to_network({8.0, 8.0}), 3.0, 1e-12);
}

TEST(StreetNetwork, ShortestPathOnGrid)
{
    const ScenarioConfig c = small_grid();
    const StreetNetwork net(c.streets);
    // A 4 x 3 lattice of crossings.
    EXPECT_EQ(net.nodes().size(), 12U);
    const auto path = net.shortest_path(0, static_cast<int>(net.nodes().size()) - 1);
    ASSERT_GE(path.size(), 2U);
    double length = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i)
    {
        length += distance(net.nodes()[path[i - 1]], net.nodes()[path[i]]);
    }
    const Point a = net.nodes()[path.front()];
    const Point b = net.nodes()[path.back()];
    EXPECT_NEAR(length, std::abs(a.x - b.x) + std::abs(a.y - b.y), 1e-9);
}

TEST(Validation, RejectsBrokenConfigs)
{
    ScenarioConfig c = small_grid();
    c.sites.push_back(c.sites.front());
    EXPECT_THROW(validate(c), ConfigError);

    c = small_grid();
    for (UserGroup& g : c.groups)
    {
        g.count = 0;
    }
    EXPECT_THROW(validate(c), ConfigError);

    c = small_grid();
    c.sites.clear();
    EXPECT_THROW(validate(c), ConfigError);

    c = small_grid();
    c.step_ms = 0.0;
    EXPECT_THROW(validate(c), ConfigError);

    c = small_grid();
    c.open_squares.clear();
    EXPECT_THROW(validate(c), ConfigError);

    c = small_grid();
    c.buildings.push_back({{1.0, 1.0}, {1.0, 5.0}});
    EXPECT_THROW(validate(c), ConfigError);

    c = small_grid();
    c.schema_version = 2;
    EXPECT_THROW(validate(c), ConfigError);
}

TEST(Placement, AllUsersStartInDomain)
{
    const World w = build_scenario(small_grid());
    ASSERT_EQ(w.initial_ues.size(), 20U);
    EXPECT_EQ(w.cells.size(), 3U);
    for (const UeMobility& ue : w.initial_ues)
    {
        EXPECT_TRUE(in_domain(w, ue)) << ue.id;
    }
}

TEST(Mobility, PerStepDisplacementMatchesSpeed)
{
    const World w = build_scenario(small_grid());
    std::vector<UeMobility> ues = w.initial_ues;
    for (int step = 0; step < 2000; ++step)
    {
        std::vector<Point> before;
        for (const UeMobility& ue : ues)
        {
            before.push_back(ue.position);
        }
        step_positions(w, ues);
        for (std::size_t i = 0; i < ues.size(); ++i)
        {
            if (ues[i].turned)
            {
                continue;
            }
            const double expected = ues[i].speed_mps * 0.01;
            EXPECT_NEAR(distance(before[i], ues[i].position), expected, 1e-9);
        }
    }
    EXPECT_NEAR(30.0 / 3.6 * 0.01, 0.0833333333, 1e-9);
    EXPECT_NEAR(ues.front().speed_mps * 0.01, 0.0833333333, 1e-9);
    EXPECT_NEAR(ues.back().speed_mps * 0.01, 0.0083333333, 1e-9);
}

TEST(Mobility, DeterministicForSeed)
{
    const auto run = [](std::uint64_t seed) {
        const World w = build_scenario(small_grid(seed));
        std::vector<UeMobility> ues = w.initial_ues;
        std::vector<Point> trace;
        for (int step = 0; step < 500; ++step)
        {
            step_positions(w, ues);
            for (const UeMobility& ue : ues)
            {
                trace.push_back(ue.position);
            }
        }
        return trace;
    };
    EXPECT_EQ(run(3), run(3));
    EXPECT_NE(run(3), run(4));
}

TEST(Mobility, StaysInDomainOnRandomGrids)
{
    rng::Substream gen(77, rng::Stream::Placement);
    for (int trial = 0; trial < 20; ++trial)
    {
        ScenarioConfig c;
        BlockGridLayout g;
        g.blocks_x = 2 + static_cast<int>(gen.below(4));
        g.blocks_y = 2 + static_cast<int>(gen.below(3));
        g.block_width_m = gen.uniform(20.0, 80.0);
        g.block_depth_m = gen.uniform(20.0, 80.0);
        g.street_width_m = gen.uniform(5.0, 20.0);
        g.square_block = std::pair{static_cast<int>(gen.below(g.blocks_x)), 0};
        g.pedestrian_row = g.blocks_y - 1;
        g.pedestrian_from = 0;
        g.pedestrian_to = static_cast<int>(gen.below(g.blocks_x));
        apply_block_grid(g, c);
        const Rect b = g.block(0, 0);
        c.sites.push_back({0, b.min + 0.5 * (b.max - b.min), 10.0, 1, 0.0});
        c.groups = {
            {"cars", 8, gen.uniform(5.0, 80.0), MovementDomain::Streets,
             DirectionPolicy::Bidirectional},
            {"square", 4, gen.uniform(1.0, 10.0), MovementDomain::OpenSquare,
             DirectionPolicy::RandomWaypoint},
            {"walk", 4, gen.uniform(1.0, 10.0), MovementDomain::PedestrianArea,
             DirectionPolicy::RandomWaypoint}};
        c.seed = trial;
        const World w = build_scenario(c);
        std::vector<UeMobility> ues = w.initial_ues;
        for (int step = 0; step < 1500; ++step)
        {
            step_positions(w, ues);
            for (const UeMobility& ue : ues)
            {
                ASSERT_TRUE(in_domain(w, ue)) << "trial " << trial << " ue " << ue.id;
            }
        }
    }
}

TEST(Mobility, DeadEndReversesOnStreet)
{
    ScenarioConfig c;
    c.bounds = {{0.0, 0.0}, {20.0, 20.0}};
    c.streets = {{{{0.0, 10.0}, {20.0, 10.0}}}};
    c.sites.push_back({0, {10.0, 0.0}, 10.0, 1, 90.0});
    c.groups = {{"cars", 3, 36.0, MovementDomain::Streets, DirectionPolicy::Bidirectional}};
    const World w = build_scenario(c);
    std::vector<UeMobility> ues = w.initial_ues;
    for (int step = 0; step < 1000; ++step)
    {
        step_positions(w, ues);
        for (const UeMobility& ue : ues)
        {
            ASSERT_GE(ue.position.x, -1e-9);
            ASSERT_LE(ue.position.x, 20.0 + 1e-9);
            ASSERT_NEAR(ue.position.y, 10.0, 1e-9);
        }
    }
}

} // namespace
} // namespace chosim
