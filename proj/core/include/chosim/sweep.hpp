#pragma once

#include "chosim/config_io.hpp"
#include "chosim/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace chosim {

struct SweepOptions
{
    int parallel = 1;
    TraceLevel trace = TraceLevel::Off;
    /// Directory for link traces (only read when trace == Links).
    std::filesystem::path link_trace_dir;
};

struct SweepResult
{
    SweepSpec spec;
    SimulationConfig config;
    /// One row per (variant, seed), variants in SweepSpec::variants() order,
    /// seeds in sweep order within a variant.
    std::vector<RunResult> runs;
};

/// Runs the whole grid. Each (seed, mode) pair is one job that computes the
/// channel once for all of its variants; jobs run on `parallel` threads and
/// the result does not depend on the thread count. Throws RuntimeError if a
/// run fails.
SweepResult run_sweep(const SweepSpec& spec, const SimulationConfig& config,
                      const SweepOptions& options = {});

/// Stable column order:
/// mode, procedure, xi_access_dbm, prepared_beams, seed, n_ue, counted_minutes,
/// n_cfra, n_cbra, n_hof, n_rlf, r_cbra_pct, hof_per_ue_min, rlf_per_ue_min,
/// failures_per_ue_min, handovers, trajectory_hash
void write_results_csv(std::ostream& out, const std::vector<RunResult>& runs);

enum class Figure
{
    F4, ///< CHO: HOF rate and CBRA ratio vs access threshold
    F5, ///< BHO: same series
    F6, ///< total failures vs access threshold per (mode, N_B)
};

Figure parse_figure(std::string_view text);
std::string_view to_string(Figure figure) noexcept;

/// Mean/min/max across seeds. Throws ConfigError when the results do not
/// cover the axes the figure needs.
void write_figure_series(std::ostream& out, const SweepResult& result, Figure figure);

void write_event_logs(const std::filesystem::path& dir, const std::vector<RunResult>& runs);

/// JSON run manifest: version, seeds, grid and the echoed input files.
std::string manifest_json(const SweepResult& result, const std::string& scenario_text,
                          const std::string& sweep_text, const std::vector<Figure>& figures);

/// Writes results, manifest, figure series and (if requested) traces to
/// `dir`. Files are staged in a sibling directory and moved into place
/// only after every file was written.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result,
                         const std::string& scenario_text, const std::string& sweep_text,
                         const std::vector<Figure>& figures, TraceLevel trace,
                         const std::filesystem::path& staged_link_traces = {});

std::string_view version() noexcept;

} // namespace chosim
