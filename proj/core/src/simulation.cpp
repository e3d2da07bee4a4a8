#include "chosim/simulation.hpp"

#include "chosim/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace chosim {

void validate(const SimulationConfig& c)
{
    validate(c.scenario);
    validate(c.measurement);
    validate(c.handover, c.scenario.step_ms);
    validate(c.rach, c.scenario.step_ms);
    validate(c.rlf);
    if (!(c.kpi.warmup_s >= 0.0) || !(c.kpi.warmup_s < c.scenario.duration_s))
    {
        throw ConfigError("warm-up must be non-negative and shorter than the simulated duration");
    }
}

ProtocolConfig protocol_config(const SimulationConfig& c, const ProtocolVariant& v,
                               std::uint64_t seed)
{
    ProtocolConfig p;
    p.handover = c.handover;
    p.handover.mode = v.mode;
    p.handover.prepared_beams = v.prepared_beams;
    p.rach = c.rach;
    p.rach.procedure = v.procedure;
    p.rach.access_threshold_dbm = v.access_threshold_dbm;
    p.rlf = c.rlf;
    p.step_ms = c.scenario.step_ms;
    p.warmup_steps = duration_steps(c.kpi.warmup_s * 1000.0, c.scenario.step_ms);
    p.contention_seed = seed;
    return p;
}

std::int64_t total_steps(const ScenarioConfig& s)
{
    return static_cast<std::int64_t>(std::llround(s.duration_s * 1000.0 / s.step_ms));
}

void TrajectoryHasher::add(double value) noexcept
{
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (int i = 0; i < 8; ++i)
    {
        hash_ ^= (bits >> (8 * i)) & 0xffU;
        hash_ *= 0x100000001b3ULL;
    }
}

namespace {

/// Radio-side state of one UE: channel, filters and the current SINR view.
struct UeRadio
{
    FadingProcess fading;
    MeasurementState measurements;
    std::vector<double> rsrp;
    InterferenceSnapshot interference;
};

class Observation final : public LinkObservation
{
  public:
    explicit Observation(const UeRadio& r) : r_(r) {}

    std::span<const double> l3_cells() const override { return r_.measurements.l3_cells(); }
    std::span<const double> l1_beams(int cell) const override
    {
        return r_.measurements.l1_beams(cell);
    }
    std::span<const double> l3_beams(int cell) const override
    {
        return r_.measurements.l3_beams(cell);
    }
    int serving_beam(int cell) const override { return r_.measurements.best_l1_beam(cell); }
    double sinr_db(int cell, int beam) const override
    {
        return r_.interference.sinr_db(cell, beam);
    }

  private:
    const UeRadio& r_;
};

struct VariantState
{
    std::vector<UeProtocol> ues;
    PreamblePool pool;
    ProtocolRecorder recorder;
};

} // namespace

std::vector<RunResult> simulate(const SimulationConfig& config,
                                std::span<const ProtocolVariant> variants, std::uint64_t seed,
                                const SimulationOptions& options)
{
    SimulationConfig run_config = config;
    run_config.scenario.seed = seed;
    validate(run_config);

    const World world = build_scenario(run_config.scenario);
    const LinkModel& link = world.link_model;
    const int cells = link.num_cells();
    const int beams = link.num_beams();
    const int links = link.num_links();
    const std::int64_t steps = total_steps(run_config.scenario);
    const bool keep_logs = options.trace != TraceLevel::Off;

    std::vector<UeMobility> ues = world.initial_ues;
    const int n_ues = static_cast<int>(ues.size());
    std::vector<UeRadio> radio;
    radio.reserve(ues.size());
    for (const UeMobility& ue : ues)
    {
        radio.push_back({FadingProcess(run_config.scenario.link, links, run_config.scenario.step_ms,
                                       seed, ue.id),
                         MeasurementState(cells, beams, run_config.measurement),
                         std::vector<double>(static_cast<std::size_t>(links)),
                         {}});
    }

    std::vector<VariantState> states;
    states.reserve(variants.size());
    for (const ProtocolVariant& v : variants)
    {
        const ProtocolConfig pc = protocol_config(run_config, v, seed);
        validate(pc);
        VariantState s{{},
                       PreamblePool(cells, beams, run_config.handover.cfra_preambles_per_beam),
                       ProtocolRecorder(pc.warmup_steps, keep_logs)};
        s.ues.reserve(ues.size());
        for (const UeMobility& ue : ues)
        {
            s.ues.emplace_back(ue.id, cells, pc);
        }
        states.push_back(std::move(s));
    }

    TrajectoryHasher hasher;
    for (std::int64_t n = 0; n < steps; ++n)
    {
        if (n > 0)
        {
            step_positions(world, ues);
        }
        for (int u = 0; u < n_ues; ++u)
        {
            const UeMobility& ue = ues[u];
            hasher.add(ue.position.x);
            hasher.add(ue.position.y);

            UeRadio& r = radio[u];
            r.fading.advance(n);
            link.evaluate(ue.position, r.fading.values(), r.rsrp);
            r.measurements.push(r.rsrp, n);
            r.interference.assign(r.rsrp, beams, run_config.scenario.link.scheduled_beams,
                                  run_config.scenario.link.noise_dbm);
            if (options.trace == TraceLevel::Links && options.link_sink)
            {
                for (int c = 0; c < cells; ++c)
                {
                    for (int b = 0; b < beams; ++b)
                    {
                        options.link_sink({n, ue.id, c, b, r.rsrp[c * beams + b],
                                           r.interference.sinr_db(c, b)});
                    }
                }
            }
        }
        for (VariantState& s : states)
        {
            for (int u = 0; u < n_ues; ++u)
            {
                const UeRadio& r = radio[u];
                if (!r.measurements.ready())
                {
                    continue;
                }
                UeProtocol& p = s.ues[u];
                if (p.phase() == UePhase::Detached)
                {
                    p.attach(reestablishment_cell(r.measurements.l3_cells()));
                    continue;
                }
                p.step(Observation(r), n, s.pool, s.recorder);
            }
        }
    }

    const double counted_minutes =
        (run_config.scenario.duration_s - run_config.kpi.warmup_s) / 60.0;
    std::vector<RunResult> results;
    results.reserve(variants.size());
    for (std::size_t i = 0; i < variants.size(); ++i)
    {
        ProtocolRecorder& rec = states[i].recorder;
        RunResult r;
        r.variant = variants[i];
        r.seed = seed;
        r.counters = rec.counters();
        r.counters.ue_count = n_ues;
        r.counters.minutes = counted_minutes;
        r.handovers = rec.successful_handovers();
        r.declared_failures = rec.declared_failures();
        r.reestablishments = rec.reestablishments();
        r.trajectory_hash = hasher.value();
        r.handover_log.assign(rec.handover_log().begin(), rec.handover_log().end());
        r.rach_log.assign(rec.rach_log().begin(), rec.rach_log().end());
        r.failure_log.assign(rec.failure_log().begin(), rec.failure_log().end());
        r.cho_waiting_steps.assign(rec.cho_waiting_steps().begin(), rec.cho_waiting_steps().end());
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace chosim
