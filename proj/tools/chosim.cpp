// Batch driver: runs a handover/RACH sweep and writes results, figure series
// and a run manifest to an output directory.

#include "chosim/config_io.hpp"
#include "chosim/errors.hpp"
#include "chosim/sweep.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum Exit
{
    kOk = 0,
    kConfigError = 1,
    kRuntimeError = 2,
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text)
{
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        try
        {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(item, &used);
            if (used != item.size() || item.empty() || item.front() == '-')
            {
                throw std::invalid_argument(item);
            }
            seeds.push_back(v);
        }
        catch (const std::exception&)
        {
            throw chosim::ConfigError(fmt::format("bad seed '{}' in --seed-override", item));
        }
        pos = comma + 1;
    }
    return seeds;
}

/// Sweep used when only a scenario is given: both modes and procedures at
/// the scenario's own threshold, N_B and seed.
chosim::SweepSpec single_point(const fs::path& scenario, const chosim::SimulationConfig& c)
{
    chosim::SweepSpec spec;
    spec.modes = {chosim::HandoverMode::Baseline, chosim::HandoverMode::Conditional};
    spec.procedures = {chosim::RachProcedure::ThreeGpp, chosim::RachProcedure::Proposed};
    spec.access_thresholds_dbm = {c.rach.access_threshold_dbm};
    spec.prepared_beams = {c.handover.prepared_beams};
    spec.seeds = {c.scenario.seed};
    spec.scenario = scenario;
    return spec;
}

void print_summary(const chosim::SweepResult& result)
{
    std::map<std::tuple<int, int, double, int>, chosim::KpiCounters> rows;
    for (const chosim::RunResult& r : result.runs)
    {
        auto& acc = rows[{static_cast<int>(r.variant.mode), static_cast<int>(r.variant.procedure),
                          r.variant.access_threshold_dbm, r.variant.prepared_beams}];
        // Seeds are independent drops: pool them as extra UEs.
        acc.merge(r.counters);
    }
    std::fputs(fmt::format("{:<4} {:<9} {:>7} {:>3} {:>8} {:>10} {:>10}\n", "mode", "procedure",
                           "xi", "N_B", "R_CBRA%", "HOF/UEmin", "RLF/UEmin")
                   .c_str(),
               stdout);
    for (const auto& [key, c] : rows)
    {
        const auto ratio = chosim::r_cbra_percent(c);
        const auto rates = chosim::normalized_failures(c);
        std::fputs(
            fmt::format("{:<4} {:<9} {:>7} {:>3} {:>8} {:>10.4f} {:>10.4f}\n",
                        chosim::to_string(static_cast<chosim::HandoverMode>(std::get<0>(key))),
                        chosim::to_string(static_cast<chosim::RachProcedure>(std::get<1>(key))),
                        chosim::format_dbm(std::get<2>(key)), std::get<3>(key),
                        ratio ? fmt::format("{:.2f}", *ratio) : std::string("nan"),
                        rates.hof_per_ue_min, rates.rlf_per_ue_min)
                .c_str(),
            stdout);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Beam-level handover and random-access sweep simulator"};
    app.set_version_flag("--version", std::string(chosim::version()));

    std::string scenario_arg;
    std::string sweep_arg;
    std::string out_arg;
    int parallel = 1;
    std::vector<std::string> figure_args;
    std::string seed_override;
    std::string trace_arg = "off";
    bool quiet = false;

    app.add_option("--scenario", scenario_arg, "Scenario YAML (overrides the sweep's scenario)");
    app.add_option("--sweep", sweep_arg, "Sweep YAML");
    app.add_option("--out", out_arg, "Output directory (overrides the sweep's output)");
    app.add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--figure", figure_args, "Figure series to emit (repeatable)")
        ->check(CLI::IsMember({"f4", "f5", "f6"}));
    app.add_option("--seed-override", seed_override, "Comma-separated seed list");
    app.add_option("--trace", trace_arg, "Event/link trace level")
        ->check(CLI::IsMember({"off", "events", "links"}));
    app.add_flag("-q,--quiet", quiet, "Do not print the summary table");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    fs::path link_stage;
    try
    {
        if (scenario_arg.empty() && sweep_arg.empty())
        {
            throw chosim::ConfigError("need --sweep or --scenario");
        }

        std::string sweep_text;
        std::optional<chosim::SweepSpec> spec;
        if (!sweep_arg.empty())
        {
            sweep_text = chosim::read_text_file(sweep_arg);
            spec = chosim::load_sweep_spec(sweep_arg);
        }
        const fs::path scenario_path = scenario_arg.empty() ? spec->scenario : fs::path(scenario_arg);
        const std::string scenario_text = chosim::read_text_file(scenario_path);
        const chosim::SimulationConfig config = chosim::load_simulation_config(scenario_path);
        if (!spec)
        {
            spec = single_point(scenario_path, config);
        }
        spec->scenario = scenario_path;
        if (!seed_override.empty())
        {
            spec->seeds = parse_seed_list(seed_override);
        }
        if (!out_arg.empty())
        {
            spec->output = out_arg;
        }
        if (spec->output.empty())
        {
            throw chosim::ConfigError("no output directory: pass --out or set 'output'");
        }
        chosim::validate(*spec);

        std::vector<chosim::Figure> figures;
        for (const std::string& f : figure_args)
        {
            figures.push_back(chosim::parse_figure(f));
        }

        chosim::SweepOptions options;
        options.parallel = parallel;
        options.trace = trace_arg == "links"    ? chosim::TraceLevel::Links
                        : trace_arg == "events" ? chosim::TraceLevel::Events
                                                : chosim::TraceLevel::Off;
        if (options.trace == chosim::TraceLevel::Links)
        {
            const fs::path target = fs::absolute(spec->output);
            link_stage = target.parent_path() / fmt::format(".{}.links", target.filename().string());
            fs::remove_all(link_stage);
            fs::create_directories(link_stage);
            options.link_trace_dir = link_stage;
        }

        const auto started = std::chrono::steady_clock::now();
        const chosim::SweepResult result = chosim::run_sweep(*spec, config, options);
        chosim::write_sweep_outputs(spec->output, result, scenario_text, sweep_text, figures,
                                    options.trace, link_stage);
        if (!link_stage.empty())
        {
            fs::remove_all(link_stage);
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (!quiet)
        {
            print_summary(result);
            std::fputs(fmt::format("{} runs in {:.1f} s -> {}\n", result.runs.size(), seconds,
                                   spec->output.string())
                           .c_str(),
                       stdout);
        }
        return kOk;
    }
    catch (const chosim::ConfigError& e)
    {
        std::fputs(fmt::format("configuration error: {}\n", e.what()).c_str(), stderr);
        if (!link_stage.empty())
        {
            std::error_code ec;
            fs::remove_all(link_stage, ec);
        }
        return kConfigError;
    }
    catch (const std::exception& e)
    {
        std::fputs(fmt::format("error: {}\n", e.what()).c_str(), stderr);
        if (!link_stage.empty())
        {
            std::error_code ec;
            fs::remove_all(link_stage, ec);
        }
        return kRuntimeError;
    }
}
