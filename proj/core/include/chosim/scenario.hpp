#pragma once

#include "chosim/geometry.hpp"
#include "chosim/radio.hpp"
#include "chosim/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chosim {

enum class MovementDomain
{
    Streets,
    OpenSquare,
    PedestrianArea,
};

enum class DirectionPolicy
{
    Bidirectional,  ///< street users, either direction along the street graph
    RandomWaypoint, ///< area users, straight legs between uniform waypoints
};

struct UserGroup
{
    std::string name;
    int count = 0;
    double speed_kmh = 3.0;
    MovementDomain domain = MovementDomain::Streets;
    DirectionPolicy policy = DirectionPolicy::Bidirectional;
};

struct SiteConfig
{
    int id = 0;
    Point position;
    double height_m = 10.0;
    int sectors = 3;
    double azimuth_offset_deg = 30.0; ///< boresight of the first sector
};

/// Parameterised stand-in for the Madrid grid: a lattice of rectangular
/// building blocks separated by streets, with one block left open as a
/// square and a run of blocks on one row turned into a pedestrian strip.
struct BlockGridLayout
{
    int blocks_x = 5;
    int blocks_y = 4;
    double block_width_m = 60.0;
    double block_depth_m = 50.0;
    double street_width_m = 15.0;
    std::optional<std::pair<int, int>> square_block;
    int pedestrian_row = -1; ///< -1 disables the strip
    int pedestrian_from = 0;
    int pedestrian_to = 0;

    Point street_crossing(int i, int j) const noexcept;
    Rect block(int i, int j) const noexcept;
};

struct ScenarioConfig
{
    int schema_version = 1;
    Rect bounds{{0.0, 0.0}, {100.0, 100.0}};
    std::vector<Rect> buildings;
    std::vector<Polyline> streets;
    std::vector<ConvexPolygon> open_squares;
    std::vector<ConvexPolygon> pedestrian_areas;
    std::vector<SiteConfig> sites;
    std::vector<UserGroup> groups;
    double ue_height_m = 1.5;
    double step_ms = 10.0;
    double duration_s = 60.0;
    std::uint64_t seed = 1;
    LinkModelConfig link;

    int total_cells() const noexcept;
    int total_ues() const noexcept;
};

/// Replaces bounds, buildings, streets and open areas with the block grid.
void apply_block_grid(const BlockGridLayout& layout, ScenarioConfig& config);

/// Throws ConfigError describing the first violated invariant.
void validate(const ScenarioConfig& config);

/// Full-size deployment: 11 three-sector sites (33 cells) and 320 users.
ScenarioConfig default_scenario_config();

/// Undirected street graph, split at every crossing of the input polylines.
class StreetNetwork
{
  public:
    struct Edge
    {
        int a;
        int b;
        double length;
    };

    StreetNetwork() = default;
    explicit StreetNetwork(std::span<const Polyline> streets);

    std::span<const Point> nodes() const noexcept { return nodes_; }
    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const std::pair<int, int>> adjacent(int node) const noexcept
    {
        return adjacency_[node];
    }
    double total_length() const noexcept { return total_length_; }

    /// Node sequence from `from` to `to`, both included (Dijkstra).
    std::vector<int> shortest_path(int from, int to) const;
    double distance_to_network(Point p) const noexcept;

  private:
    std::vector<Point> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, int>>> adjacency_; ///< (edge, other node)
    double total_length_ = 0.0;
};

/// Kinematic state of one UE.
struct UeMobility
{
    int id = 0;
    int group = 0;
    MovementDomain domain = MovementDomain::Streets;
    int area = -1; ///< polygon index for area users
    Point position;
    double heading_rad = 0.0;
    double speed_mps = 0.0;
    bool turned = false; ///< last step crossed a node or waypoint

    // street users: travelling from node `from` toward node `to`
    int from = -1;
    int to = -1;
    double along = 0.0;
    std::vector<int> route; ///< nodes still to visit after `to`
    std::size_t route_pos = 0;

    // area users
    Point waypoint;

    rng::Substream rng{0, rng::Stream::Mobility};
};

struct World
{
    ScenarioConfig config;
    std::vector<Cell> cells;
    LinkModel link_model;
    StreetNetwork streets;
    std::vector<UeMobility> initial_ues;
};

/// Builds the network layout and the initial user population.
World build_scenario(const ScenarioConfig& config);

/// Advances every UE by speed * step along its path.
void step_positions(const World& world, std::span<UeMobility> ues);

bool in_domain(const World& world, const UeMobility& ue, double tolerance = 1e-6);

} // namespace chosim
