#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plnav/geometry.hpp"
#include "plnav/rng.hpp"

namespace plnav {

/// Convex footprint extruded over [z_lo, z_hi]. A table is a slab with z_lo > 0
/// plus thin leg prisms starting at the floor.
struct Obstacle {
    std::vector<Vec2> footprint;
    double z_lo = 0.0;
    double z_hi = 1.0;
};

enum class HazardKind { Water, Clothes, SlopeEdge };

std::string_view to_string(HazardKind kind) noexcept;
HazardKind hazard_kind_from_string(std::string_view name);

/// Flat ground region that lasers ignore but the semantic labeler marks untraversable.
struct HazardPatch {
    std::vector<Vec2> region;
    HazardKind kind = HazardKind::Water;
};

struct Agent {
    Vec2 position;
    double heading = 0.0;
    double radius = 0.2;
    Vec2 goal;
    double v = 0.0;
    double w = 0.0;

    Pose pose() const noexcept { return {position, heading}; }
};

struct Bounds {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    bool contains(Vec2 p) const noexcept { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    double width() const noexcept { return x1 - x0; }
    double height() const noexcept { return y1 - y0; }
};

struct Scenario {
    Bounds bounds;
    std::vector<Obstacle> obstacles;
    std::vector<HazardPatch> hazards;
    std::vector<Agent> agents;
    /// Per-agent ordered goal circuit; empty inner list means "use the agent's goal".
    std::vector<std::vector<Vec2>> waypoints;
    int stage_id = 0;
};

/// Parses the line-oriented scenario format and validates every invariant.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Throws InvariantError naming the first offending entity.
void validate_scenario(const Scenario& scenario);

/// True iff p lies inside (boundary included) some footprint whose z-interval contains z.
bool point_in_obstacle(Vec2 p, double z, const Scenario& scenario) noexcept;

/// Footprint containment ignoring height.
bool point_in_any_footprint(Vec2 p, const Scenario& scenario) noexcept;

bool point_in_hazard(Vec2 p, const Scenario& scenario) noexcept;

/// Distance from p to the nearest footprint (zero inside).
double obstacle_clearance(Vec2 p, const Scenario& scenario) noexcept;

struct SampleOptions {
    double radius = 0.2;         ///< clearance kept from footprints and bounds
    double min_separation = 2.0; ///< start-goal distance
    int max_attempts = 10000;
};

struct StartGoal {
    Pose start;
    Vec2 goal;
};

/// Rejection-samples a collision-free start pose and goal. `occupied` lists positions of
/// already-placed agents; the new start keeps 2*radius from each of them and the new goal
/// keeps 2*radius from `occupied_goals`.
StartGoal sample_start_goal(const Scenario& scenario, Rng& rng, const SampleOptions& options = {},
                            std::span<const Vec2> occupied = {}, std::span<const Vec2> occupied_goals = {});

} // namespace plnav
