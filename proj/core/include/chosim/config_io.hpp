#pragma once

#include "chosim/simulation.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chosim {

inline constexpr int kSchemaVersion = 1;

/// Grid of protocol variants and seeds that share one scenario.
struct SweepSpec
{
    std::vector<HandoverMode> modes;
    std::vector<RachProcedure> procedures;
    std::vector<double> access_thresholds_dbm; ///< may hold -inf / +inf
    std::vector<int> prepared_beams;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path scenario;
    std::filesystem::path output;

    /// Cartesian product in (mode, procedure, threshold, N_B) order.
    std::vector<ProtocolVariant> variants() const;
};

void validate(const SweepSpec& spec);

/// Parses a threshold such as "-100", "-inf", "+inf" or ".inf".
double parse_dbm(std::string_view text);
/// Inverse of parse_dbm for output files: "-inf", "inf" or the shortest
/// round-tripping decimal.
std::string format_dbm(double value);

HandoverMode parse_mode(std::string_view text);
RachProcedure parse_procedure(std::string_view text);

/// Scenario files. Throw ConfigError on unreadable input, unknown keys,
/// wrong schema version or invalid values.
SimulationConfig parse_simulation_config(std::string_view yaml);
SimulationConfig load_simulation_config(const std::filesystem::path& path);

/// Sweep files. A relative scenario path is resolved against `base_dir`.
SweepSpec parse_sweep_spec(std::string_view yaml, const std::filesystem::path& base_dir);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

} // namespace chosim
