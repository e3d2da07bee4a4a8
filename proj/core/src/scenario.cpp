#include "chosim/scenario.hpp"

#include "chosim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

#include <fmt/format.h>

namespace chosim {

namespace {

constexpr double kNodeMergeTolerance = 1e-6;

const std::vector<ConvexPolygon>& areas_of(const ScenarioConfig& c, MovementDomain d)
{
    return d == MovementDomain::OpenSquare ? c.open_squares : c.pedestrian_areas;
}

Point sample_in_polygon(const ConvexPolygon& poly, rng::Substream& gen)
{
    const Rect box = poly.bounding_box();
    for (;;)
    {
        const Point p{gen.uniform(box.min.x, box.max.x), gen.uniform(box.min.y, box.max.y)};
        if (poly.contains(p, 0.0))
        {
            return p;
        }
    }
}

/// Parameter t along [a, b] where it meets [c, d], if the segments touch.
std::optional<std::pair<double, double>> segment_crossing(Point a, Point b, Point c, Point d)
{
    const Point r = b - a;
    const Point s = d - c;
    const double denom = r.x * s.y - r.y * s.x;
    if (std::abs(denom) < 1e-12)
    {
        return std::nullopt; // parallel; collinear overlaps meet at shared endpoints only
    }
    const Point ac = c - a;
    const double t = (ac.x * s.y - ac.y * s.x) / denom;
    const double u = (ac.x * r.y - ac.y * r.x) / denom;
    constexpr double eps = 1e-9;
    if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps)
    {
        return std::nullopt;
    }
    return std::pair{std::clamp(t, 0.0, 1.0), std::clamp(u, 0.0, 1.0)};
}

} // namespace

Point BlockGridLayout::street_crossing(int i, int j) const noexcept
{
    return {0.5 * street_width_m + i * (block_width_m + street_width_m),
            0.5 * street_width_m + j * (block_depth_m + street_width_m)};
}

Rect BlockGridLayout::block(int i, int j) const noexcept
{
    const Point lo{street_width_m + i * (block_width_m + street_width_m),
                   street_width_m + j * (block_depth_m + street_width_m)};
    return {lo, {lo.x + block_width_m, lo.y + block_depth_m}};
}

void apply_block_grid(const BlockGridLayout& g, ScenarioConfig& c)
{
    if (g.blocks_x < 1 || g.blocks_y < 1 || !(g.block_width_m > 0.0) ||
        !(g.block_depth_m > 0.0) || !(g.street_width_m > 0.0))
    {
        throw ConfigError("block grid needs positive block counts and dimensions");
    }
    const auto in_strip = [&](int i, int j) {
        return j == g.pedestrian_row && i >= g.pedestrian_from && i <= g.pedestrian_to;
    };

    c.bounds = {{0.0, 0.0},
                {g.blocks_x * (g.block_width_m + g.street_width_m) + g.street_width_m,
                 g.blocks_y * (g.block_depth_m + g.street_width_m) + g.street_width_m}};
    c.buildings.clear();
    c.streets.clear();
    c.open_squares.clear();
    c.pedestrian_areas.clear();

    for (int j = 0; j < g.blocks_y; ++j)
    {
        for (int i = 0; i < g.blocks_x; ++i)
        {
            const bool square = g.square_block && g.square_block->first == i &&
                                g.square_block->second == j;
            if (square)
            {
                c.open_squares.push_back(ConvexPolygon::from_rect(g.block(i, j)));
            }
            else if (!in_strip(i, j))
            {
                c.buildings.push_back(g.block(i, j));
            }
        }
    }
    if (g.pedestrian_row >= 0)
    {
        if (g.pedestrian_row >= g.blocks_y || g.pedestrian_from < 0 ||
            g.pedestrian_to >= g.blocks_x || g.pedestrian_from > g.pedestrian_to)
        {
            throw ConfigError("pedestrian strip lies outside the block grid");
        }
        const Rect first = g.block(g.pedestrian_from, g.pedestrian_row);
        const Rect last = g.block(g.pedestrian_to, g.pedestrian_row);
        c.pedestrian_areas.push_back(ConvexPolygon::from_rect({first.min, last.max}));
    }
    for (int i = 0; i <= g.blocks_x; ++i)
    {
        c.streets.push_back({{g.street_crossing(i, 0), g.street_crossing(i, g.blocks_y)}});
    }
    for (int j = 0; j <= g.blocks_y; ++j)
    {
        c.streets.push_back({{g.street_crossing(0, j), g.street_crossing(g.blocks_x, j)}});
    }
}

int ScenarioConfig::total_cells() const noexcept
{
    int n = 0;
    for (const SiteConfig& s : sites)
    {
        n += s.sectors;
    }
    return n;
}

int ScenarioConfig::total_ues() const noexcept
{
    int n = 0;
    for (const UserGroup& g : groups)
    {
        n += g.count;
    }
    return n;
}

void validate(const ScenarioConfig& c)
{
    if (c.schema_version != 1)
    {
        throw ConfigError(fmt::format("unsupported schema_version {}", c.schema_version));
    }
    if (!(c.step_ms > 0.0) || !(c.duration_s > 0.0))
    {
        throw ConfigError("time step and duration must be positive");
    }
    if (c.bounds.degenerate())
    {
        throw ConfigError("grid bounds are degenerate");
    }
    for (const Rect& b : c.buildings)
    {
        if (b.degenerate())
        {
            throw ConfigError("building footprint is degenerate");
        }
    }
    for (const Polyline& s : c.streets)
    {
        if (s.points.size() < 2)
        {
            throw ConfigError("street polyline needs at least two points");
        }
        for (std::size_t i = 1; i < s.points.size(); ++i)
        {
            if (distance(s.points[i - 1], s.points[i]) <= 0.0)
            {
                throw ConfigError("street polyline has a zero-length segment");
            }
        }
    }
    if (c.total_cells() <= 0)
    {
        throw ConfigError("scenario has zero cells");
    }
    if (c.total_ues() <= 0)
    {
        throw ConfigError("scenario has zero UEs");
    }
    std::set<int> ids;
    for (const SiteConfig& s : c.sites)
    {
        if (!ids.insert(s.id).second)
        {
            throw ConfigError(fmt::format("duplicate site id {}", s.id));
        }
        if (s.sectors < 0 || !(s.height_m > c.ue_height_m))
        {
            throw ConfigError(fmt::format("site {} has invalid sectors or height", s.id));
        }
    }
    for (const UserGroup& g : c.groups)
    {
        if (g.count < 0 || !(g.speed_kmh >= 0.0))
        {
            throw ConfigError(fmt::format("user group '{}' has invalid count or speed", g.name));
        }
        if (g.count == 0)
        {
            continue;
        }
        if (g.domain == MovementDomain::Streets)
        {
            if (c.streets.empty())
            {
                throw ConfigError(fmt::format("group '{}' walks streets but none exist", g.name));
            }
            if (g.policy != DirectionPolicy::Bidirectional)
            {
                throw ConfigError("street users must use the bidirectional policy");
            }
        }
        else
        {
            if (areas_of(c, g.domain).empty())
            {
                throw ConfigError(fmt::format("group '{}' has no movement area", g.name));
            }
            if (g.policy != DirectionPolicy::RandomWaypoint)
            {
                throw ConfigError("area users must use the random-waypoint policy");
            }
        }
    }
    validate(c.link);
}

ScenarioConfig default_scenario_config()
{
    ScenarioConfig c;
    BlockGridLayout g;
    g.blocks_x = 6;
    g.blocks_y = 5;
    g.square_block = std::pair{4, 2};
    g.pedestrian_row = 2;
    g.pedestrian_from = 0;
    g.pedestrian_to = 2;
    apply_block_grid(g, c);

    const std::pair<int, int> site_blocks[] = {{0, 0}, {2, 0}, {4, 0}, {1, 1}, {3, 1}, {5, 1},
                                               {0, 3}, {2, 3}, {4, 3}, {1, 4}, {5, 4}};
    int id = 0;
    for (const auto& [i, j] : site_blocks)
    {
        const Rect b = g.block(i, j);
        c.sites.push_back({id++, {0.5 * (b.min.x + b.max.x), 0.5 * (b.min.y + b.max.y)}, 10.0, 3,
                           30.0});
    }
    c.groups = {
        {"streets", 200, 30.0, MovementDomain::Streets, DirectionPolicy::Bidirectional},
        {"open_square", 40, 3.0, MovementDomain::OpenSquare, DirectionPolicy::RandomWaypoint},
        {"pedestrian", 80, 3.0, MovementDomain::PedestrianArea, DirectionPolicy::RandomWaypoint},
    };
    return c;
}

// ---------------------------------------------------------------------------

StreetNetwork::StreetNetwork(std::span<const Polyline> streets)
{
    struct Segment
    {
        Point a;
        Point b;
        std::vector<double> cuts;
    };
    std::vector<Segment> segments;
    for (const Polyline& line : streets)
    {
        for (std::size_t i = 1; i < line.points.size(); ++i)
        {
            segments.push_back({line.points[i - 1], line.points[i], {0.0, 1.0}});
        }
    }
    for (std::size_t i = 0; i < segments.size(); ++i)
    {
        for (std::size_t j = i + 1; j < segments.size(); ++j)
        {
            if (auto hit = segment_crossing(segments[i].a, segments[i].b, segments[j].a,
                                            segments[j].b))
            {
                segments[i].cuts.push_back(hit->first);
                segments[j].cuts.push_back(hit->second);
            }
        }
    }

    const auto node_at = [&](Point p) {
        for (std::size_t n = 0; n < nodes_.size(); ++n)
        {
            if (distance(nodes_[n], p) < kNodeMergeTolerance)
            {
                return static_cast<int>(n);
            }
        }
        nodes_.push_back(p);
        return static_cast<int>(nodes_.size() - 1);
    };

    std::set<std::pair<int, int>> seen;
    for (Segment& s : segments)
    {
        std::sort(s.cuts.begin(), s.cuts.end());
        for (std::size_t k = 1; k < s.cuts.size(); ++k)
        {
            const Point p = s.a + s.cuts[k - 1] * (s.b - s.a);
            const Point q = s.a + s.cuts[k] * (s.b - s.a);
            if (distance(p, q) < kNodeMergeTolerance)
            {
                continue;
            }
            const int u = node_at(p);
            const int v = node_at(q);
            if (u == v || !seen.insert({std::min(u, v), std::max(u, v)}).second)
            {
                continue;
            }
            edges_.push_back({u, v, distance(nodes_[u], nodes_[v])});
            total_length_ += edges_.back().length;
        }
    }
    adjacency_.resize(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e)
    {
        adjacency_[edges_[e].a].emplace_back(static_cast<int>(e), edges_[e].b);
        adjacency_[edges_[e].b].emplace_back(static_cast<int>(e), edges_[e].a);
    }
}

std::vector<int> StreetNetwork::shortest_path(int from, int to) const
{
    const auto n = nodes_.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> prev(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[from] = 0.0;
    open.push({0.0, from});
    while (!open.empty())
    {
        const auto [d, u] = open.top();
        open.pop();
        if (d > dist[u])
        {
            continue;
        }
        if (u == to)
        {
            break;
        }
        for (const auto& [e, v] : adjacency_[u])
        {
            const double nd = d + edges_[e].length;
            if (nd < dist[v])
            {
                dist[v] = nd;
                prev[v] = u;
                open.push({nd, v});
            }
        }
    }
    std::vector<int> path;
    if (from != to && prev[to] < 0)
    {
        return path;
    }
    for (int v = to; v != -1; v = prev[v])
    {
        path.push_back(v);
        if (v == from)
        {
            break;
        }
    }
    std::reverse(path.begin(), path.end());
    return path;
}

double StreetNetwork::distance_to_network(Point p) const noexcept
{
    double best = std::numeric_limits<double>::infinity();
    for (const Edge& e : edges_)
    {
        best = std::min(best, distance_to_segment(p, nodes_[e.a], nodes_[e.b]));
    }
    return best;
}

// ---------------------------------------------------------------------------

namespace {

int next_street_node(const StreetNetwork& net, UeMobility& ue)
{
    if (ue.route_pos < ue.route.size())
    {
        return ue.route[ue.route_pos++];
    }
    const int here = ue.to;
    const auto n = static_cast<std::uint64_t>(net.nodes().size());
    std::vector<int> path;
    while (path.size() < 2)
    {
        const int dest = static_cast<int>(ue.rng.below(n));
        if (dest != here)
        {
            path = net.shortest_path(here, dest);
        }
    }
    ue.route.assign(path.begin() + 2, path.end());
    ue.route_pos = 0;
    return path[1];
}

void place_on_street(const StreetNetwork& net, UeMobility& ue, rng::Substream& placement)
{
    double pick = placement.uniform() * net.total_length();
    const auto edges = net.edges();
    std::size_t e = 0;
    while (e + 1 < edges.size() && pick > edges[e].length)
    {
        pick -= edges[e].length;
        ++e;
    }
    const double along = std::clamp(placement.uniform() * edges[e].length, 0.0, edges[e].length);
    if (placement.uniform() < 0.5)
    {
        ue.from = edges[e].a;
        ue.to = edges[e].b;
        ue.along = along;
    }
    else
    {
        ue.from = edges[e].b;
        ue.to = edges[e].a;
        ue.along = edges[e].length - along;
    }
    const Point a = net.nodes()[ue.from];
    const Point b = net.nodes()[ue.to];
    ue.position = a + (ue.along / distance(a, b)) * (b - a);
    ue.heading_rad = std::atan2(b.y - a.y, b.x - a.x);
}

void advance_street(const StreetNetwork& net, UeMobility& ue, double travel)
{
    const auto nodes = net.nodes();
    while (travel > 0.0)
    {
        const double len = distance(nodes[ue.from], nodes[ue.to]);
        const double remaining = len - ue.along;
        if (travel < remaining)
        {
            ue.along += travel;
            break;
        }
        travel -= remaining;
        const int next = next_street_node(net, ue);
        ue.from = ue.to;
        ue.to = next;
        ue.along = 0.0;
        ue.turned = true;
    }
    const Point a = nodes[ue.from];
    const Point b = nodes[ue.to];
    ue.position = a + (ue.along / distance(a, b)) * (b - a);
    ue.heading_rad = std::atan2(b.y - a.y, b.x - a.x);
}

void advance_area(const ConvexPolygon& area, UeMobility& ue, double travel)
{
    while (travel > 0.0)
    {
        const double d = distance(ue.position, ue.waypoint);
        if (travel < d)
        {
            const Point dir = ue.waypoint - ue.position;
            ue.position = ue.position + (travel / d) * dir;
            ue.heading_rad = std::atan2(dir.y, dir.x);
            break;
        }
        travel -= d;
        ue.position = ue.waypoint;
        ue.waypoint = sample_in_polygon(area, ue.rng);
        ue.turned = true;
    }
}

} // namespace

World build_scenario(const ScenarioConfig& config)
{
    validate(config);

    std::vector<Cell> cells;
    for (std::size_t s = 0; s < config.sites.size(); ++s)
    {
        const SiteConfig& site = config.sites[s];
        for (int k = 0; k < site.sectors; ++k)
        {
            cells.push_back({static_cast<int>(cells.size()), static_cast<int>(s), site.position,
                             site.height_m, site.azimuth_offset_deg + 360.0 * k / site.sectors});
        }
    }

    LinkModel link(config.link, cells, default_beam_set(), config.buildings, config.bounds,
                   config.ue_height_m, config.seed);
    World world{config, std::move(cells), std::move(link), StreetNetwork(config.streets), {}};
    if (!config.streets.empty() && world.streets.edges().empty())
    {
        throw ConfigError("street polylines do not form a network");
    }

    int id = 0;
    for (std::size_t g = 0; g < config.groups.size(); ++g)
    {
        const UserGroup& group = config.groups[g];
        for (int k = 0; k < group.count; ++k, ++id)
        {
            UeMobility ue;
            ue.id = id;
            ue.group = static_cast<int>(g);
            ue.domain = group.domain;
            ue.speed_mps = group.speed_kmh / 3.6;
            ue.rng = rng::Substream(config.seed, rng::Stream::Mobility, id);
            rng::Substream placement(config.seed, rng::Stream::Placement, id);
            if (group.domain == MovementDomain::Streets)
            {
                place_on_street(world.streets, ue, placement);
            }
            else
            {
                const auto& areas = areas_of(config, group.domain);
                double total = 0.0;
                for (const ConvexPolygon& a : areas)
                {
                    total += a.area();
                }
                double pick = placement.uniform() * total;
                ue.area = 0;
                while (ue.area + 1 < static_cast<int>(areas.size()) && pick > areas[ue.area].area())
                {
                    pick -= areas[ue.area].area();
                    ++ue.area;
                }
                ue.position = sample_in_polygon(areas[ue.area], placement);
                ue.waypoint = sample_in_polygon(areas[ue.area], ue.rng);
                const Point dir = ue.waypoint - ue.position;
                ue.heading_rad = std::atan2(dir.y, dir.x);
            }
            world.initial_ues.push_back(std::move(ue));
        }
    }
    return world;
}

void step_positions(const World& world, std::span<UeMobility> ues)
{
    const double step_s = world.config.step_ms / 1000.0;
    for (UeMobility& ue : ues)
    {
        ue.turned = false;
        const double travel = ue.speed_mps * step_s;
        if (ue.domain == MovementDomain::Streets)
        {
            advance_street(world.streets, ue, travel);
        }
        else
        {
            advance_area(areas_of(world.config, ue.domain)[ue.area], ue, travel);
        }
    }
}

bool in_domain(const World& world, const UeMobility& ue, double tolerance)
{
    if (ue.domain == MovementDomain::Streets)
    {
        return world.streets.distance_to_network(ue.position) <= tolerance;
    }
    return areas_of(world.config, ue.domain)[ue.area].contains(ue.position, tolerance);
}

} // namespace chosim
