#include "chosim/sweep.hpp"

#include "chosim/errors.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#ifndef CHOSIM_VERSION
#define CHOSIM_VERSION "0.0.0"
#endif

namespace chosim {

std::string_view version() noexcept
{
    return CHOSIM_VERSION;
}

namespace {

struct Job
{
    std::uint64_t seed;
    std::size_t seed_index;
    HandoverMode mode;
    std::vector<std::size_t> variant_indices;
};

std::string num(double v)
{
    if (std::isnan(v))
    {
        return "nan";
    }
    if (std::isinf(v))
    {
        return v < 0.0 ? "-inf" : "inf";
    }
    return fmt::format("{:.10g}", v);
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw RuntimeError(fmt::format("cannot write '{}'", path.string()));
    }
    return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path)
{
    out.close();
    if (!out)
    {
        throw RuntimeError(fmt::format("failed writing '{}'", path.string()));
    }
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec, const SimulationConfig& config,
                      const SweepOptions& options)
{
    validate(spec);
    validate(config);
    const std::vector<ProtocolVariant> variants = spec.variants();

    std::vector<Job> jobs;
    for (std::size_t s = 0; s < spec.seeds.size(); ++s)
    {
        for (HandoverMode mode : spec.modes)
        {
            Job job{spec.seeds[s], s, mode, {}};
            for (std::size_t v = 0; v < variants.size(); ++v)
            {
                if (variants[v].mode == mode)
                {
                    job.variant_indices.push_back(v);
                }
            }
            jobs.push_back(std::move(job));
        }
    }

    SweepResult result{spec, config, std::vector<RunResult>(variants.size() * spec.seeds.size())};
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    const auto worker = [&] {
        for (;;)
        {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size())
            {
                return;
            }
            {
                std::lock_guard lock(error_mutex);
                if (error)
                {
                    return;
                }
            }
            const Job& job = jobs[j];
            try
            {
                std::vector<ProtocolVariant> mine;
                for (std::size_t v : job.variant_indices)
                {
                    mine.push_back(variants[v]);
                }
                SimulationOptions sim_options;
                sim_options.trace = options.trace;
                std::ofstream link_file;
                std::filesystem::path link_path;
                // Link rows do not depend on the mode, so one job per seed writes them.
                const bool writes_links = options.trace == TraceLevel::Links &&
                                          job.mode == spec.modes.front() &&
                                          !options.link_trace_dir.empty();
                if (writes_links)
                {
                    link_path = options.link_trace_dir / fmt::format("links_seed{}.csv", job.seed);
                    link_file = open_output(link_path);
                    link_file << "step,ue,cell,beam,rsrp_dbm,sinr_db\n";
                    sim_options.link_sink = [&link_file](const LinkTraceRow& r) {
                        link_file << r.step << ',' << r.ue << ',' << r.cell << ',' << r.beam << ','
                                  << num(r.rsrp_dbm) << ',' << num(r.sinr_db) << '\n';
                    };
                }
                std::vector<RunResult> runs = simulate(config, mine, job.seed, sim_options);
                if (writes_links)
                {
                    close_output(link_file, link_path);
                }
                for (std::size_t k = 0; k < runs.size(); ++k)
                {
                    const std::size_t slot =
                        job.variant_indices[k] * spec.seeds.size() + job.seed_index;
                    result.runs[slot] = std::move(runs[k]);
                }
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                {
                    error = std::current_exception();
                }
            }
        }
    };

    const int threads = std::clamp<int>(options.parallel, 1, static_cast<int>(jobs.size()));
    if (threads == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
        {
            pool.emplace_back(worker);
        }
    }
    if (error)
    {
        try
        {
            std::rethrow_exception(error);
        }
        catch (const ConfigError&)
        {
            throw;
        }
        catch (const std::exception& e)
        {
            throw RuntimeError(fmt::format("simulation run failed: {}", e.what()));
        }
    }
    return result;
}

void write_results_csv(std::ostream& out, const std::vector<RunResult>& runs)
{
    out << "mode,procedure,xi_access_dbm,prepared_beams,seed,n_ue,counted_minutes,n_cfra,n_cbra,"
           "n_hof,n_rlf,r_cbra_pct,hof_per_ue_min,rlf_per_ue_min,failures_per_ue_min,handovers,"
           "trajectory_hash\n";
    for (const RunResult& r : runs)
    {
        const KpiCounters& c = r.counters;
        const FailureRates rates = normalized_failures(c);
        const auto ratio = r_cbra_percent(c);
        out << to_string(r.variant.mode) << ',' << to_string(r.variant.procedure) << ','
            << format_dbm(r.variant.access_threshold_dbm) << ',' << r.variant.prepared_beams
            << ',' << r.seed << ',' << c.ue_count << ',' << num(c.minutes) << ',' << c.cfra
            << ',' << c.cbra << ',' << c.hof << ',' << c.rlf << ','
            << (ratio ? num(*ratio) : std::string("nan")) << ',' << num(rates.hof_per_ue_min)
            << ',' << num(rates.rlf_per_ue_min) << ',' << num(rates.total_per_ue_min) << ','
            << r.handovers << ',' << fmt::format("{:016x}", r.trajectory_hash) << '\n';
    }
}

Figure parse_figure(std::string_view text)
{
    if (text == "f4" || text == "F4")
    {
        return Figure::F4;
    }
    if (text == "f5" || text == "F5")
    {
        return Figure::F5;
    }
    if (text == "f6" || text == "F6")
    {
        return Figure::F6;
    }
    throw ConfigError(fmt::format("unknown figure '{}'", text));
}

std::string_view to_string(Figure figure) noexcept
{
    switch (figure)
    {
    case Figure::F4:
        return "f4";
    case Figure::F5:
        return "f5";
    case Figure::F6:
        return "f6";
    }
    return "?";
}

namespace {

struct Spread
{
    double mean = std::nan("");
    double min = std::nan("");
    double max = std::nan("");
    int samples = 0;

    void add(double v)
    {
        if (samples == 0)
        {
            mean = min = max = v;
        }
        else
        {
            mean += v;
            min = std::min(min, v);
            max = std::max(max, v);
        }
        ++samples;
    }
    void finish()
    {
        if (samples > 0)
        {
            mean /= samples;
        }
    }
};

bool covers(const SweepSpec& spec, HandoverMode mode)
{
    return std::find(spec.modes.begin(), spec.modes.end(), mode) != spec.modes.end();
}

} // namespace

void write_figure_series(std::ostream& out, const SweepResult& result, Figure figure)
{
    const SweepSpec& spec = result.spec;
    if (figure == Figure::F4 && !covers(spec, HandoverMode::Conditional))
    {
        throw ConfigError("figure f4 needs CHO results");
    }
    if (figure == Figure::F5 && !covers(spec, HandoverMode::Baseline))
    {
        throw ConfigError("figure f5 needs BHO results");
    }
    if (figure == Figure::F6 &&
        !(covers(spec, HandoverMode::Baseline) && covers(spec, HandoverMode::Conditional)))
    {
        throw ConfigError("figure f6 needs both BHO and CHO results");
    }

    if (figure == Figure::F6)
    {
        // (mode, N_B, xi) -> spread over procedures and seeds
        std::map<std::tuple<int, int, double>, Spread> series;
        for (const RunResult& r : result.runs)
        {
            series[{static_cast<int>(r.variant.mode), r.variant.prepared_beams,
                    r.variant.access_threshold_dbm}]
                .add(normalized_failures(r.counters).total_per_ue_min);
        }
        out << "mode,prepared_beams,xi_access_dbm,failures_mean,failures_min,failures_max,"
               "samples\n";
        for (auto& [key, s] : series)
        {
            s.finish();
            out << to_string(static_cast<HandoverMode>(std::get<0>(key))) << ','
                << std::get<1>(key) << ',' << format_dbm(std::get<2>(key)) << ',' << num(s.mean)
                << ',' << num(s.min) << ',' << num(s.max) << ',' << s.samples << '\n';
        }
        return;
    }

    const HandoverMode mode =
        figure == Figure::F4 ? HandoverMode::Conditional : HandoverMode::Baseline;
    std::map<std::tuple<int, int, double>, std::pair<Spread, Spread>> series;
    for (const RunResult& r : result.runs)
    {
        if (r.variant.mode != mode)
        {
            continue;
        }
        auto& [hof, ratio] = series[{static_cast<int>(r.variant.procedure),
                                     r.variant.prepared_beams, r.variant.access_threshold_dbm}];
        hof.add(normalized_failures(r.counters).hof_per_ue_min);
        if (const auto pct = r_cbra_percent(r.counters))
        {
            ratio.add(*pct);
        }
    }
    out << "procedure,prepared_beams,xi_access_dbm,hof_mean,hof_min,hof_max,r_cbra_mean,"
           "r_cbra_min,r_cbra_max,samples\n";
    for (auto& [key, pair] : series)
    {
        auto& [hof, ratio] = pair;
        hof.finish();
        ratio.finish();
        out << to_string(static_cast<RachProcedure>(std::get<0>(key))) << ',' << std::get<1>(key)
            << ',' << format_dbm(std::get<2>(key)) << ',' << num(hof.mean) << ',' << num(hof.min)
            << ',' << num(hof.max) << ',' << num(ratio.mean) << ',' << num(ratio.min) << ','
            << num(ratio.max) << ',' << hof.samples << '\n';
    }
}

void write_event_logs(const std::filesystem::path& dir, const std::vector<RunResult>& runs)
{
    const auto prefix = [](const RunResult& r) {
        return fmt::format("{},{},{},{},{}", to_string(r.variant.mode),
                           to_string(r.variant.procedure),
                           format_dbm(r.variant.access_threshold_dbm), r.variant.prepared_beams,
                           r.seed);
    };
    const std::string head = "mode,procedure,xi_access_dbm,prepared_beams,seed,";

    const auto ho_path = dir / "handover_events.csv";
    std::ofstream ho = open_output(ho_path);
    ho << head << "step,ue,type,serving,target\n";
    const auto rach_path = dir / "rach_attempts.csv";
    std::ofstream rach = open_output(rach_path);
    rach << head << "step,ue,target,beam,kind,outcome,beam_prepared,elapsed_steps\n";
    const auto fail_path = dir / "failures.csv";
    std::ofstream fail = open_output(fail_path);
    fail << head << "step,ue,cause,old_serving,reestablished_cell,reestablished_step\n";

    for (const RunResult& r : runs)
    {
        const std::string p = prefix(r);
        for (const HandoverRecord& e : r.handover_log)
        {
            ho << p << ',' << e.step << ',' << e.ue << ',' << to_string(e.type) << ','
               << e.serving << ',' << e.target << '\n';
        }
        for (const RachRecord& e : r.rach_log)
        {
            rach << p << ',' << e.step << ',' << e.ue << ',' << e.target << ',' << e.beam << ','
                 << to_string(e.kind) << ',' << (e.success ? "success" : "failure") << ','
                 << (e.beam_prepared ? 1 : 0) << ',' << e.elapsed_steps << '\n';
        }
        for (const FailureRecord& e : r.failure_log)
        {
            fail << p << ',' << e.step << ',' << e.ue << ',' << to_string(e.cause) << ','
                 << e.old_serving << ',' << e.new_cell << ',' << e.reestablished_step << '\n';
        }
    }
    close_output(ho, ho_path);
    close_output(rach, rach_path);
    close_output(fail, fail_path);
}

std::string manifest_json(const SweepResult& result, const std::string& scenario_text,
                          const std::string& sweep_text, const std::vector<Figure>& figures)
{
    const SweepSpec& spec = result.spec;
    nlohmann::ordered_json j;
    j["tool"] = "chosim";
    j["version"] = std::string(version());
    j["schema_version"] = kSchemaVersion;
    j["scenario_path"] = spec.scenario.generic_string();
    j["seeds"] = spec.seeds;
    std::vector<std::string> modes;
    for (HandoverMode m : spec.modes)
    {
        modes.emplace_back(to_string(m));
    }
    std::vector<std::string> procedures;
    for (RachProcedure p : spec.procedures)
    {
        procedures.emplace_back(to_string(p));
    }
    std::vector<std::string> thresholds;
    for (double xi : spec.access_thresholds_dbm)
    {
        thresholds.push_back(format_dbm(xi));
    }
    j["grid"] = {{"modes", modes},
                 {"procedures", procedures},
                 {"xi_access_dbm", thresholds},
                 {"prepared_beams", spec.prepared_beams}};
    j["runs"] = result.runs.size();
    j["cells"] = result.config.scenario.total_cells();
    j["ues"] = result.config.scenario.total_ues();
    j["duration_s"] = result.config.scenario.duration_s;
    j["step_ms"] = result.config.scenario.step_ms;
    j["warmup_s"] = result.config.kpi.warmup_s;
    std::vector<std::string> figure_names;
    for (Figure f : figures)
    {
        figure_names.emplace_back(to_string(f));
    }
    j["figures"] = figure_names;
    j["scenario_file"] = scenario_text;
    j["sweep_file"] = sweep_text;
    return j.dump(2) + "\n";
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result,
                         const std::string& scenario_text, const std::string& sweep_text,
                         const std::vector<Figure>& figures, TraceLevel trace,
                         const std::filesystem::path& staged_link_traces)
{
    namespace fs = std::filesystem;
    // Render everything that can fail on bad input before touching the disk.
    std::vector<std::pair<std::string, std::string>> files;
    {
        std::ostringstream ss;
        write_results_csv(ss, result.runs);
        files.emplace_back("results.csv", ss.str());
    }
    for (Figure f : figures)
    {
        std::ostringstream ss;
        write_figure_series(ss, result, f);
        files.emplace_back(fmt::format("figure_{}.csv", to_string(f)), ss.str());
    }
    files.emplace_back("manifest.json", manifest_json(result, scenario_text, sweep_text, figures));

    std::error_code ec;
    const fs::path target = fs::absolute(dir);
    const fs::path stage =
        target.parent_path() / fmt::format(".{}.partial", target.filename().string());
    fs::remove_all(stage, ec);
    fs::create_directories(stage, ec);
    if (ec)
    {
        throw RuntimeError(fmt::format("cannot create '{}': {}", stage.string(), ec.message()));
    }
    try
    {
        for (const auto& [name, body] : files)
        {
            const fs::path p = stage / name;
            std::ofstream out = open_output(p);
            out << body;
            close_output(out, p);
        }
        if (trace != TraceLevel::Off)
        {
            fs::create_directories(stage / "traces");
            write_event_logs(stage / "traces", result.runs);
            if (trace == TraceLevel::Links && !staged_link_traces.empty() &&
                fs::exists(staged_link_traces))
            {
                for (const auto& entry : fs::directory_iterator(staged_link_traces))
                {
                    fs::rename(entry.path(), stage / "traces" / entry.path().filename());
                }
            }
        }
        fs::create_directories(target);
        for (const auto& entry : fs::directory_iterator(stage))
        {
            const fs::path dest = target / entry.path().filename();
            fs::remove_all(dest);
            fs::rename(entry.path(), dest);
        }
        fs::remove_all(stage);
    }
    catch (const fs::filesystem_error& e)
    {
        fs::remove_all(stage, ec);
        throw RuntimeError(fmt::format("writing outputs failed: {}", e.what()));
    }
    catch (...)
    {
        fs::remove_all(stage, ec);
        throw;
    }
}

} // namespace chosim
