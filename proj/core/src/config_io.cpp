#include "chosim/config_io.hpp"

#include "chosim/errors.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

namespace chosim {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string where(const YAML::Node& node)
{
    const YAML::Mark m = node.Mark();
    if (m.line < 0)
    {
        return "";
    }
    return fmt::format(" (line {})", m.line + 1);
}

void expect_map(const YAML::Node& node, std::string_view what)
{
    if (!node.IsMap())
    {
        throw ConfigError(fmt::format("'{}' must be a mapping{}", what, where(node)));
    }
}

void check_keys(const YAML::Node& node, std::string_view what,
                std::initializer_list<std::string_view> allowed)
{
    expect_map(node, what);
    for (const auto& kv : node)
    {
        const auto key = kv.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        {
            throw ConfigError(
                fmt::format("unknown key '{}' in '{}'{}", key, what, where(kv.first)));
        }
    }
}

template <typename T>
T scalar(const YAML::Node& node, std::string_view what)
{
    if (!node.IsScalar())
    {
        throw ConfigError(fmt::format("'{}' must be a scalar{}", what, where(node)));
    }
    try
    {
        return node.as<T>();
    }
    catch (const YAML::Exception&)
    {
        throw ConfigError(
            fmt::format("'{}' has an invalid value '{}'{}", what, node.Scalar(), where(node)));
    }
}

double number(const YAML::Node& node, std::string_view what)
{
    if (!node.IsScalar())
    {
        throw ConfigError(fmt::format("'{}' must be a number{}", what, where(node)));
    }
    try
    {
        return parse_dbm(node.Scalar());
    }
    catch (const ConfigError&)
    {
        throw ConfigError(
            fmt::format("'{}' has an invalid value '{}'{}", what, node.Scalar(), where(node)));
    }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out)
{
    if (const YAML::Node n = map[key])
    {
        if constexpr (std::is_same_v<T, double>)
        {
            out = number(n, key);
        }
        else
        {
            out = scalar<T>(n, key);
        }
    }
}

Point point(const YAML::Node& node, std::string_view what)
{
    if (!node.IsSequence() || node.size() != 2)
    {
        throw ConfigError(fmt::format("'{}' must be a pair [x, y]{}", what, where(node)));
    }
    return {number(node[0], what), number(node[1], what)};
}

Rect rect(const YAML::Node& node, std::string_view what)
{
    if (!node.IsSequence() || node.size() != 4)
    {
        throw ConfigError(
            fmt::format("'{}' must be a rectangle [x0, y0, x1, y1]{}", what, where(node)));
    }
    return {{number(node[0], what), number(node[1], what)},
            {number(node[2], what), number(node[3], what)}};
}

std::vector<Point> points(const YAML::Node& node, std::string_view what)
{
    if (!node.IsSequence())
    {
        throw ConfigError(fmt::format("'{}' must be a list of points{}", what, where(node)));
    }
    std::vector<Point> out;
    for (const auto& p : node)
    {
        out.push_back(point(p, what));
    }
    return out;
}

std::vector<ConvexPolygon> polygons(const YAML::Node& node, std::string_view what)
{
    std::vector<ConvexPolygon> out;
    if (!node)
    {
        return out;
    }
    if (!node.IsSequence())
    {
        throw ConfigError(fmt::format("'{}' must be a list of polygons{}", what, where(node)));
    }
    for (const auto& poly : node)
    {
        try
        {
            out.emplace_back(points(poly, what));
        }
        catch (const std::invalid_argument& e)
        {
            throw ConfigError(fmt::format("'{}': {}{}", what, e.what(), where(poly)));
        }
    }
    return out;
}

MovementDomain parse_domain(const YAML::Node& node)
{
    const std::string s = lower(scalar<std::string>(node, "domain"));
    if (s == "streets")
    {
        return MovementDomain::Streets;
    }
    if (s == "open_square")
    {
        return MovementDomain::OpenSquare;
    }
    if (s == "pedestrian_area")
    {
        return MovementDomain::PedestrianArea;
    }
    throw ConfigError(fmt::format("unknown movement domain '{}'{}", s, where(node)));
}

DirectionPolicy parse_policy(const YAML::Node& node)
{
    const std::string s = lower(scalar<std::string>(node, "policy"));
    if (s == "bidirectional")
    {
        return DirectionPolicy::Bidirectional;
    }
    if (s == "random_waypoint")
    {
        return DirectionPolicy::RandomWaypoint;
    }
    throw ConfigError(fmt::format("unknown direction policy '{}'{}", s, where(node)));
}

void read_layout(const YAML::Node& node, ScenarioConfig& c, std::optional<BlockGridLayout>& grid)
{
    check_keys(node, "layout",
               {"block_grid", "bounds", "buildings", "extra_buildings", "streets", "open_squares",
                "pedestrian_areas"});
    if (const YAML::Node g = node["block_grid"])
    {
        check_keys(g, "block_grid",
                   {"blocks_x", "blocks_y", "block_width_m", "block_depth_m", "street_width_m",
                    "square_block", "pedestrian_strip"});
        BlockGridLayout layout;
        read(g, "blocks_x", layout.blocks_x);
        read(g, "blocks_y", layout.blocks_y);
        read(g, "block_width_m", layout.block_width_m);
        read(g, "block_depth_m", layout.block_depth_m);
        read(g, "street_width_m", layout.street_width_m);
        if (const YAML::Node sq = g["square_block"])
        {
            if (!sq.IsSequence() || sq.size() != 2)
            {
                throw ConfigError("'square_block' must be a pair [i, j]" + where(sq));
            }
            layout.square_block = std::pair{scalar<int>(sq[0], "square_block"),
                                            scalar<int>(sq[1], "square_block")};
        }
        if (const YAML::Node strip = g["pedestrian_strip"])
        {
            check_keys(strip, "pedestrian_strip", {"row", "from", "to"});
            read(strip, "row", layout.pedestrian_row);
            read(strip, "from", layout.pedestrian_from);
            read(strip, "to", layout.pedestrian_to);
        }
        for (const char* key : {"bounds", "buildings", "streets", "open_squares", "pedestrian_areas"})
        {
            if (node[key])
            {
                throw ConfigError(
                    fmt::format("'{}' cannot be combined with 'block_grid'{}", key, where(node[key])));
            }
        }
        apply_block_grid(layout, c);
        grid = layout;
    }
    else
    {
        if (!node["bounds"])
        {
            throw ConfigError("layout needs either 'block_grid' or 'bounds'" + where(node));
        }
        c.bounds = rect(node["bounds"], "bounds");
        if (const YAML::Node b = node["buildings"])
        {
            for (const auto& r : b)
            {
                c.buildings.push_back(rect(r, "buildings"));
            }
        }
        if (const YAML::Node s = node["streets"])
        {
            for (const auto& line : s)
            {
                c.streets.push_back({points(line, "streets")});
            }
        }
        c.open_squares = polygons(node["open_squares"], "open_squares");
        c.pedestrian_areas = polygons(node["pedestrian_areas"], "pedestrian_areas");
    }
    if (const YAML::Node extra = node["extra_buildings"])
    {
        for (const auto& r : extra)
        {
            c.buildings.push_back(rect(r, "extra_buildings"));
        }
    }
}

void read_sites(const YAML::Node& node, ScenarioConfig& c,
                const std::optional<BlockGridLayout>& grid)
{
    if (!node.IsSequence())
    {
        throw ConfigError("'sites' must be a list" + where(node));
    }
    int next_id = 0;
    for (const auto& s : node)
    {
        check_keys(s, "sites", {"id", "position", "block", "height_m", "sectors",
                                "azimuth_offset_deg"});
        SiteConfig site;
        site.id = next_id;
        read(s, "id", site.id);
        next_id = site.id + 1;
        if (s["position"] && s["block"])
        {
            throw ConfigError("a site takes either 'position' or 'block'" + where(s));
        }
        if (const YAML::Node p = s["position"])
        {
            site.position = point(p, "position");
        }
        else if (const YAML::Node b = s["block"])
        {
            if (!grid)
            {
                throw ConfigError("'block' site placement needs a block_grid layout" + where(b));
            }
            const Point ij = point(b, "block");
            const Rect r = grid->block(static_cast<int>(ij.x), static_cast<int>(ij.y));
            site.position = {0.5 * (r.min.x + r.max.x), 0.5 * (r.min.y + r.max.y)};
        }
        else
        {
            throw ConfigError("site needs 'position' or 'block'" + where(s));
        }
        read(s, "height_m", site.height_m);
        read(s, "sectors", site.sectors);
        read(s, "azimuth_offset_deg", site.azimuth_offset_deg);
        c.sites.push_back(site);
    }
}

void read_groups(const YAML::Node& node, ScenarioConfig& c)
{
    if (!node.IsSequence())
    {
        throw ConfigError("'groups' must be a list" + where(node));
    }
    for (const auto& g : node)
    {
        check_keys(g, "groups", {"name", "count", "speed_kmh", "domain", "policy"});
        UserGroup group;
        read(g, "name", group.name);
        read(g, "count", group.count);
        read(g, "speed_kmh", group.speed_kmh);
        if (!g["domain"])
        {
            throw ConfigError("group needs a 'domain'" + where(g));
        }
        group.domain = parse_domain(g["domain"]);
        group.policy = group.domain == MovementDomain::Streets ? DirectionPolicy::Bidirectional
                                                               : DirectionPolicy::RandomWaypoint;
        if (const YAML::Node p = g["policy"])
        {
            group.policy = parse_policy(p);
        }
        c.groups.push_back(group);
    }
}

void read_link(const YAML::Node& n, LinkModelConfig& l)
{
    check_keys(n, "link",
               {"carrier_ghz", "tx_power_dbm", "noise_dbm", "pathloss",
                "log_distance_reference_db", "log_distance_exponent", "shadowing_std_db",
                "shadowing_decorrelation_m", "fading", "fading_std_db", "fading_coherence_ms",
                "scheduled_beams"});
    read(n, "carrier_ghz", l.carrier_ghz);
    read(n, "tx_power_dbm", l.tx_power_dbm);
    read(n, "noise_dbm", l.noise_dbm);
    if (const YAML::Node p = n["pathloss"])
    {
        const std::string s = lower(scalar<std::string>(p, "pathloss"));
        if (s == "umi_street_canyon")
        {
            l.pathloss = PathlossModel::UmiStreetCanyon;
        }
        else if (s == "log_distance")
        {
            l.pathloss = PathlossModel::LogDistance;
        }
        else
        {
            throw ConfigError(fmt::format("unknown pathloss model '{}'{}", s, where(p)));
        }
    }
    read(n, "log_distance_reference_db", l.log_distance_reference_db);
    read(n, "log_distance_exponent", l.log_distance_exponent);
    read(n, "shadowing_std_db", l.shadowing_std_db);
    read(n, "shadowing_decorrelation_m", l.shadowing_decorrelation_m);
    if (const YAML::Node f = n["fading"])
    {
        const std::string s = lower(scalar<std::string>(f, "fading"));
        if (s == "none")
        {
            l.fading = FadingModel::None;
        }
        else if (s == "gauss_markov")
        {
            l.fading = FadingModel::GaussMarkov;
        }
        else
        {
            throw ConfigError(fmt::format("unknown fading model '{}'{}", s, where(f)));
        }
    }
    read(n, "fading_std_db", l.fading_std_db);
    read(n, "fading_coherence_ms", l.fading_coherence_ms);
    read(n, "scheduled_beams", l.scheduled_beams);
}

void read_measurement(const YAML::Node& n, MeasurementConfig& m)
{
    check_keys(n, "measurement",
               {"l1_samples", "period_steps", "beam_threshold_dbm", "strongest_beams",
                "cell_filter_k", "beam_filter_k", "l1_domain"});
    read(n, "l1_samples", m.l1_samples);
    read(n, "period_steps", m.period_steps);
    read(n, "beam_threshold_dbm", m.beam_threshold_dbm);
    read(n, "strongest_beams", m.strongest_beams);
    read(n, "cell_filter_k", m.cell_filter_k);
    read(n, "beam_filter_k", m.beam_filter_k);
    if (const YAML::Node d = n["l1_domain"])
    {
        const std::string s = lower(scalar<std::string>(d, "l1_domain"));
        if (s == "db")
        {
            m.l1_domain = AveragingDomain::Db;
        }
        else if (s == "linear")
        {
            m.l1_domain = AveragingDomain::Linear;
        }
        else
        {
            throw ConfigError(fmt::format("unknown averaging domain '{}'{}", s, where(d)));
        }
    }
}

void read_handover(const YAML::Node& n, HandoverConfig& h)
{
    check_keys(n, "handover",
               {"a3_offset_db", "add_offset_db", "exec_offset_db", "ttt_a3_ms", "ttt_add_ms",
                "ttt_exec_ms", "preparation_ms", "prepared_beams", "max_prepared_cells",
                "cfra_preambles_per_beam"});
    read(n, "a3_offset_db", h.a3_offset_db);
    read(n, "add_offset_db", h.add_offset_db);
    read(n, "exec_offset_db", h.exec_offset_db);
    read(n, "ttt_a3_ms", h.ttt_a3_ms);
    read(n, "ttt_add_ms", h.ttt_add_ms);
    read(n, "ttt_exec_ms", h.ttt_exec_ms);
    read(n, "preparation_ms", h.preparation_ms);
    read(n, "prepared_beams", h.prepared_beams);
    read(n, "max_prepared_cells", h.max_prepared_cells);
    read(n, "cfra_preambles_per_beam", h.cfra_preambles_per_beam);
}

void read_rach(const YAML::Node& n, RachConfig& r)
{
    check_keys(n, "rach",
               {"access_threshold_dbm", "t304_ms", "retry_period_ms",
                "cbra_collision_probability"});
    read(n, "access_threshold_dbm", r.access_threshold_dbm);
    read(n, "t304_ms", r.t304_ms);
    read(n, "retry_period_ms", r.retry_period_ms);
    read(n, "cbra_collision_probability", r.cbra_collision_probability);
}

void read_rlf(const YAML::Node& n, RlfConfig& r)
{
    check_keys(n, "rlf", {"gamma_out_db", "gamma_in_db", "t310_ms", "reestablishment_ms"});
    read(n, "gamma_out_db", r.gamma_out_db);
    read(n, "gamma_in_db", r.gamma_in_db);
    read(n, "t310_ms", r.t310_ms);
    read(n, "reestablishment_ms", r.reestablishment_ms);
}

YAML::Node parse_yaml(std::string_view text)
{
    try
    {
        return YAML::Load(std::string(text));
    }
    catch (const YAML::Exception& e)
    {
        throw ConfigError(fmt::format("malformed YAML: {}", e.what()));
    }
}

void check_schema(const YAML::Node& root)
{
    expect_map(root, "document");
    const YAML::Node v = root["schema_version"];
    if (!v)
    {
        throw ConfigError("missing 'schema_version'");
    }
    const int version = scalar<int>(v, "schema_version");
    if (version != kSchemaVersion)
    {
        throw ConfigError(fmt::format("unsupported schema_version {} (expected {})", version,
                                      kSchemaVersion));
    }
}

template <typename T, typename F>
std::vector<T> list(const YAML::Node& root, const char* key, F&& convert)
{
    const YAML::Node n = root[key];
    if (!n)
    {
        throw ConfigError(fmt::format("sweep is missing '{}'", key));
    }
    if (!n.IsSequence())
    {
        throw ConfigError(fmt::format("'{}' must be a list{}", key, where(n)));
    }
    std::vector<T> out;
    for (const auto& item : n)
    {
        out.push_back(convert(item));
    }
    return out;
}

} // namespace

double parse_dbm(std::string_view text)
{
    const std::string s = lower(text);
    if (s == "-inf" || s == "-.inf" || s == "-infinity")
    {
        return -std::numeric_limits<double>::infinity();
    }
    if (s == "inf" || s == "+inf" || s == ".inf" || s == "+.inf" || s == "infinity" ||
        s == "+infinity")
    {
        return std::numeric_limits<double>::infinity();
    }
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+')
    {
        ++first;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last || std::isnan(value))
    {
        throw ConfigError(fmt::format("'{}' is not a number", text));
    }
    return value;
}

std::string format_dbm(double value)
{
    if (std::isinf(value))
    {
        return value < 0.0 ? "-inf" : "inf";
    }
    return fmt::format("{}", value);
}

HandoverMode parse_mode(std::string_view text)
{
    const std::string s = lower(text);
    if (s == "bho")
    {
        return HandoverMode::Baseline;
    }
    if (s == "cho")
    {
        return HandoverMode::Conditional;
    }
    throw ConfigError(fmt::format("unknown handover mode '{}'", text));
}

RachProcedure parse_procedure(std::string_view text)
{
    const std::string s = lower(text);
    if (s == "three_gpp" || s == "3gpp")
    {
        return RachProcedure::ThreeGpp;
    }
    if (s == "proposed")
    {
        return RachProcedure::Proposed;
    }
    throw ConfigError(fmt::format("unknown RACH procedure '{}'", text));
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ConfigError(fmt::format("cannot read '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SimulationConfig parse_simulation_config(std::string_view yaml)
{
    const YAML::Node root = parse_yaml(yaml);
    check_schema(root);
    check_keys(root, "scenario",
               {"schema_version", "simulation", "layout", "sites", "groups", "link",
                "measurement", "handover", "rach", "rlf"});

    SimulationConfig c;
    ScenarioConfig& s = c.scenario;
    if (const YAML::Node sim = root["simulation"])
    {
        check_keys(sim, "simulation",
                   {"step_ms", "duration_s", "seed", "warmup_s", "ue_height_m"});
        read(sim, "step_ms", s.step_ms);
        read(sim, "duration_s", s.duration_s);
        read(sim, "seed", s.seed);
        read(sim, "warmup_s", c.kpi.warmup_s);
        read(sim, "ue_height_m", s.ue_height_m);
    }
    for (const char* key : {"layout", "sites", "groups"})
    {
        if (!root[key])
        {
            throw ConfigError(fmt::format("scenario is missing '{}'", key));
        }
    }
    std::optional<BlockGridLayout> grid;
    read_layout(root["layout"], s, grid);
    read_sites(root["sites"], s, grid);
    read_groups(root["groups"], s);
    if (const YAML::Node n = root["link"])
    {
        read_link(n, s.link);
    }
    if (const YAML::Node n = root["measurement"])
    {
        read_measurement(n, c.measurement);
    }
    if (const YAML::Node n = root["handover"])
    {
        read_handover(n, c.handover);
    }
    if (const YAML::Node n = root["rach"])
    {
        read_rach(n, c.rach);
    }
    if (const YAML::Node n = root["rlf"])
    {
        read_rlf(n, c.rlf);
    }
    validate(c);
    return c;
}

SimulationConfig load_simulation_config(const std::filesystem::path& path)
{
    try
    {
        return parse_simulation_config(read_text_file(path));
    }
    catch (const ConfigError& e)
    {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<ProtocolVariant> SweepSpec::variants() const
{
    std::vector<ProtocolVariant> out;
    for (HandoverMode m : modes)
    {
        for (RachProcedure p : procedures)
        {
            for (double xi : access_thresholds_dbm)
            {
                for (int nb : prepared_beams)
                {
                    out.push_back({m, p, xi, nb});
                }
            }
        }
    }
    return out;
}

void validate(const SweepSpec& spec)
{
    if (spec.modes.empty() || spec.procedures.empty() || spec.access_thresholds_dbm.empty() ||
        spec.prepared_beams.empty() || spec.seeds.empty())
    {
        throw ConfigError("every sweep axis needs at least one value");
    }
    const auto unique = [](auto values) {
        std::sort(values.begin(), values.end());
        return std::adjacent_find(values.begin(), values.end()) == values.end();
    };
    if (!unique(spec.modes) || !unique(spec.procedures) || !unique(spec.access_thresholds_dbm) ||
        !unique(spec.prepared_beams) || !unique(spec.seeds))
    {
        throw ConfigError("sweep axes must not repeat values");
    }
    for (int nb : spec.prepared_beams)
    {
        if (nb < 1)
        {
            throw ConfigError("prepared_beams entries must be at least 1");
        }
    }
    if (spec.scenario.empty())
    {
        throw ConfigError("sweep needs a scenario file");
    }
}

SweepSpec parse_sweep_spec(std::string_view yaml, const std::filesystem::path& base_dir)
{
    const YAML::Node root = parse_yaml(yaml);
    check_schema(root);
    check_keys(root, "sweep",
               {"schema_version", "scenario", "output", "modes", "procedures", "xi_access_dbm",
                "prepared_beams", "seeds"});
    SweepSpec spec;
    spec.modes = list<HandoverMode>(root, "modes", [](const YAML::Node& n) {
        return parse_mode(scalar<std::string>(n, "modes"));
    });
    spec.procedures = list<RachProcedure>(root, "procedures", [](const YAML::Node& n) {
        return parse_procedure(scalar<std::string>(n, "procedures"));
    });
    spec.access_thresholds_dbm = list<double>(
        root, "xi_access_dbm", [](const YAML::Node& n) { return number(n, "xi_access_dbm"); });
    spec.prepared_beams = list<int>(root, "prepared_beams", [](const YAML::Node& n) {
        return scalar<int>(n, "prepared_beams");
    });
    spec.seeds = list<std::uint64_t>(root, "seeds", [](const YAML::Node& n) {
        return scalar<std::uint64_t>(n, "seeds");
    });
    if (!root["scenario"])
    {
        throw ConfigError("sweep is missing 'scenario'");
    }
    std::filesystem::path scenario = scalar<std::string>(root["scenario"], "scenario");
    spec.scenario = scenario.is_relative() ? base_dir / scenario : scenario;
    if (const YAML::Node out = root["output"])
    {
        spec.output = scalar<std::string>(out, "output");
    }
    validate(spec);
    return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path)
{
    try
    {
        return parse_sweep_spec(read_text_file(path), path.parent_path());
    }
    catch (const ConfigError& e)
    {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

} // namespace chosim
