#include "chosim/config_io.hpp"
#include "chosim/measurements.hpp"
#include "chosim/rng.hpp"
#include "chosim/scenario.hpp"
#include "chosim/simulation.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <vector>

namespace {

using namespace chosim;

const std::filesystem::path kScenarios = std::filesystem::path(CHOSIM_SOURCE_DIR) / "scenarios";

// All-link RSRP for one UE position in the full-size deployment.
void BM_LinkEvaluate(benchmark::State& state)
{
    const World world = build_scenario(default_scenario_config());
    const LinkModel& model = world.link_model;
    std::vector<double> fading(static_cast<std::size_t>(model.num_links()), 0.0);
    std::vector<double> rsrp(fading.size());
    rng::Substream gen(1, rng::Stream::Placement);
    const Rect area = world.config.bounds;
    for (auto _ : state)
    {
        const Point p{gen.uniform(area.min.x, area.max.x), gen.uniform(area.min.y, area.max.y)};
        model.evaluate(p, fading, rsrp);
        benchmark::DoNotOptimize(rsrp.data());
    }
    state.counters["links"] = static_cast<double>(model.num_links());
}
BENCHMARK(BM_LinkEvaluate);

// One measurement step for one UE: L1 window, consolidation and L3 filtering.
void BM_MeasurementPush(benchmark::State& state)
{
    const int cells = static_cast<int>(state.range(0));
    const int beams = 12;
    MeasurementConfig config;
    config.period_steps = 1;
    MeasurementState m(cells, beams, config);
    rng::Substream gen(2, rng::Stream::Fading);
    std::vector<double> raw(static_cast<std::size_t>(cells * beams));
    for (double& r : raw)
    {
        r = gen.uniform(-130.0, -70.0);
    }
    std::int64_t n = 0;
    for (auto _ : state)
    {
        raw[static_cast<std::size_t>(n) % raw.size()] += 0.1;
        benchmark::DoNotOptimize(m.push(raw, n++));
    }
}
BENCHMARK(BM_MeasurementPush)->Arg(7)->Arg(33);

// Whole scaled scenario, all four protocol variants in lockstep, per step.
void BM_SimulateScaled(benchmark::State& state)
{
    SimulationConfig config = load_simulation_config(kScenarios / "acceptance.yaml");
    config.scenario.duration_s = 5.0;
    config.kpi.warmup_s = 0.0;
    const std::vector<ProtocolVariant> variants{
        {HandoverMode::Conditional, RachProcedure::ThreeGpp, -100.0, 1},
        {HandoverMode::Conditional, RachProcedure::Proposed, -100.0, 1},
        {HandoverMode::Conditional, RachProcedure::ThreeGpp, -100.0, 4},
        {HandoverMode::Conditional, RachProcedure::Proposed, -100.0, 4}};
    std::uint64_t seed = 1;
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(simulate(config, variants, seed++));
    }
    state.SetItemsProcessed(state.iterations() * total_steps(config.scenario));
    state.counters["ues"] = config.scenario.total_ues();
}
BENCHMARK(BM_SimulateScaled)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
