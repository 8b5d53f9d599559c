#include "plnav/world.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "plnav/error.hpp"

namespace plnav {

std::string_view to_string(HazardKind kind) noexcept
{
    switch (kind) {
    case HazardKind::Water: return "water";
    case HazardKind::Clothes: return "clothes";
    case HazardKind::SlopeEdge: return "slope-edge";
    }
    return "water";
}

HazardKind hazard_kind_from_string(std::string_view name)
{
    if (name == "water")
        return HazardKind::Water;
    if (name == "clothes")
        return HazardKind::Clothes;
    if (name == "slope-edge")
        return HazardKind::SlopeEdge;
    throw Error("unknown hazard kind '" + std::string(name) + "'");
}

namespace {

constexpr double kAreaEpsilon = 1e-12;

struct SourceLines {
    std::vector<std::size_t> obstacles;
    std::vector<std::size_t> hazards;
    std::vector<std::size_t> agents;
    std::vector<std::vector<std::size_t>> waypoints; // per agent, per waypoint
};

std::string entity(std::string_view kind, std::size_t index, const std::vector<std::size_t>* lines)
{
    std::string out = std::string(kind) + " #" + std::to_string(index);
    if (lines && index < lines->size())
        out += " (line " + std::to_string((*lines)[index]) + ")";
    return out;
}

void validate_impl(const Scenario& s, const SourceLines* src)
{
    const Bounds& b = s.bounds;
    if (!(b.x1 > b.x0 && b.y1 > b.y0))
        throw InvariantError("bounds: expected x0 < x1 and y0 < y1");

    for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
        const Obstacle& o = s.obstacles[k];
        const auto name = entity("obstacle", k, src ? &src->obstacles : nullptr);
        if (o.footprint.size() < 3)
            throw InvariantError(name + ": footprint needs at least 3 vertices");
        if (std::abs(signed_area(o.footprint)) <= kAreaEpsilon)
            throw InvariantError(name + ": footprint vertices are collinear");
        if (!is_convex_ccw(o.footprint))
            throw InvariantError(name + ": footprint must be convex and counter-clockwise");
        if (!(o.z_lo >= 0.0 && o.z_lo < o.z_hi))
            throw InvariantError(name + ": height interval must satisfy 0 <= z_lo < z_hi");
    }

    for (std::size_t k = 0; k < s.hazards.size(); ++k) {
        const HazardPatch& h = s.hazards[k];
        const auto name = entity("hazard", k, src ? &src->hazards : nullptr);
        if (h.region.size() < 3 || std::abs(signed_area(h.region)) <= kAreaEpsilon)
            throw InvariantError(name + ": region is degenerate");
        for (std::size_t a = 0; a < s.agents.size(); ++a)
            if (contains_polygon(h.region, s.agents[a].position))
                throw InvariantError(name + ": region covers the spawn point of agent #" + std::to_string(a));
    }

    for (std::size_t k = 0; k < s.agents.size(); ++k) {
        const Agent& a = s.agents[k];
        const auto name = entity("agent", k, src ? &src->agents : nullptr);
        if (!(a.radius > 0.0))
            throw InvariantError(name + ": radius must be positive");
        if (!(a.heading > -std::numbers::pi && a.heading <= std::numbers::pi))
            throw InvariantError(name + ": heading must lie in (-pi, pi]");
        if (!b.contains(a.position))
            throw InvariantError(name + ": position outside bounds");
        for (std::size_t o = 0; o < s.obstacles.size(); ++o)
            if (distance_to_convex(s.obstacles[o].footprint, a.position) < a.radius)
                throw InvariantError(name + ": overlaps obstacle #" + std::to_string(o));
        for (std::size_t j = 0; j < k; ++j)
            if (distance(a.position, s.agents[j].position) < a.radius + s.agents[j].radius)
                throw InvariantError(name + ": overlaps agent #" + std::to_string(j));
        if (!b.contains(a.goal))
            throw InvariantError(name + ": goal outside bounds");
        if (point_in_any_footprint(a.goal, s))
            throw InvariantError(name + ": goal inside an obstacle");
    }

    for (std::size_t k = s.agents.size(); k < s.waypoints.size(); ++k)
        if (!s.waypoints[k].empty())
            throw InvariantError("waypoint: agent index " + std::to_string(k) + " does not exist");
    for (std::size_t k = 0; k < s.waypoints.size(); ++k) {
        for (std::size_t i = 0; i < s.waypoints[k].size(); ++i) {
            const Vec2 w = s.waypoints[k][i];
            const std::vector<std::size_t>* lines =
                src && k < src->waypoints.size() ? &src->waypoints[k] : nullptr;
            const auto name = "agent #" + std::to_string(k) + " " + entity("waypoint", i, lines);
            if (!b.contains(w))
                throw InvariantError(name + ": outside bounds");
            if (point_in_any_footprint(w, s))
                throw InvariantError(name + ": inside an obstacle");
        }
    }
}

double parse_number(std::string_view token, std::size_t line)
{
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
        throw ParseError(line, "expected a number, got '" + std::string(token) + "'");
    return value;
}

long parse_integer(std::string_view token, std::size_t line)
{
    long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError(line, "expected an integer, got '" + std::string(token) + "'");
    return value;
}

std::vector<Vec2> parse_points(const std::vector<std::string>& tokens, std::size_t first, std::size_t line)
{
    const std::size_t count = tokens.size() - first;
    if (count % 2 != 0)
        throw ParseError(line, "odd number of polygon coordinates");
    if (count < 6)
        throw ParseError(line, "polygon needs at least 3 vertices");
    std::vector<Vec2> points;
    for (std::size_t i = first; i < tokens.size(); i += 2)
        points.push_back({parse_number(tokens[i], line), parse_number(tokens[i + 1], line)});
    return points;
}

} // namespace

void validate_scenario(const Scenario& scenario) { validate_impl(scenario, nullptr); }

Scenario parse_scenario(std::string_view text)
{
    Scenario s;
    SourceLines src;
    bool have_bounds = false;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        std::istringstream fields(raw);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;

        const std::string& key = tok[0];
        auto expect = [&](std::size_t n) {
            if (tok.size() != n + 1)
                throw ParseError(line_no, "'" + key + "' expects " + std::to_string(n) + " values");
        };

        if (key == "bounds") {
            if (have_bounds)
                throw ParseError(line_no, "duplicate bounds record");
            expect(4);
            s.bounds = {parse_number(tok[1], line_no), parse_number(tok[2], line_no), parse_number(tok[3], line_no),
                        parse_number(tok[4], line_no)};
            have_bounds = true;
        } else if (key == "obstacle") {
            if (tok.size() < 3)
                throw ParseError(line_no, "'obstacle' expects z_lo z_hi followed by vertices");
            Obstacle o;
            o.z_lo = parse_number(tok[1], line_no);
            o.z_hi = parse_number(tok[2], line_no);
            o.footprint = parse_points(tok, 3, line_no);
            if (signed_area(o.footprint) < 0.0)
                std::reverse(o.footprint.begin(), o.footprint.end());
            s.obstacles.push_back(std::move(o));
            src.obstacles.push_back(line_no);
        } else if (key == "hazard") {
            if (tok.size() < 2)
                throw ParseError(line_no, "'hazard' expects a kind followed by vertices");
            HazardPatch h;
            try {
                h.kind = hazard_kind_from_string(tok[1]);
            } catch (const Error& e) {
                throw ParseError(line_no, e.what());
            }
            h.region = parse_points(tok, 2, line_no);
            s.hazards.push_back(std::move(h));
            src.hazards.push_back(line_no);
        } else if (key == "agent") {
            expect(6);
            Agent a;
            a.position = {parse_number(tok[1], line_no), parse_number(tok[2], line_no)};
            a.heading = wrap_angle(parse_number(tok[3], line_no));
            a.radius = parse_number(tok[4], line_no);
            a.goal = {parse_number(tok[5], line_no), parse_number(tok[6], line_no)};
            s.agents.push_back(a);
            src.agents.push_back(line_no);
        } else if (key == "waypoint") {
            expect(3);
            const long idx = parse_integer(tok[1], line_no);
            if (idx < 0)
                throw ParseError(line_no, "waypoint agent index must be non-negative");
            if (s.waypoints.size() <= static_cast<std::size_t>(idx))
                s.waypoints.resize(static_cast<std::size_t>(idx) + 1);
            s.waypoints[static_cast<std::size_t>(idx)].push_back(
                {parse_number(tok[2], line_no), parse_number(tok[3], line_no)});
            if (src.waypoints.size() <= static_cast<std::size_t>(idx))
                src.waypoints.resize(static_cast<std::size_t>(idx) + 1);
            src.waypoints[static_cast<std::size_t>(idx)].push_back(line_no);
        } else if (key == "stage") {
            expect(1);
            s.stage_id = static_cast<int>(parse_integer(tok[1], line_no));
        } else {
            throw ParseError(line_no, "unknown record '" + key + "'");
        }
    }
    if (!have_bounds)
        throw ParseError(line_no + 1, "missing bounds record");

    validate_impl(s, &src);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open scenario file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_scenario(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.message(), path.string());
    } catch (const InvariantError& e) {
        throw InvariantError(path.string() + ": " + e.what());
    }
}

bool point_in_obstacle(Vec2 p, double z, const Scenario& scenario) noexcept
{
    for (const Obstacle& o : scenario.obstacles)
        if (z >= o.z_lo && z <= o.z_hi && contains_convex(o.footprint, p))
            return true;
    return false;
}

bool point_in_any_footprint(Vec2 p, const Scenario& scenario) noexcept
{
    for (const Obstacle& o : scenario.obstacles)
        if (contains_convex(o.footprint, p))
            return true;
    return false;
}

bool point_in_hazard(Vec2 p, const Scenario& scenario) noexcept
{
    for (const HazardPatch& h : scenario.hazards)
        if (contains_polygon(h.region, p))
            return true;
    return false;
}

double obstacle_clearance(Vec2 p, const Scenario& scenario) noexcept
{
    double best = std::numeric_limits<double>::infinity();
    for (const Obstacle& o : scenario.obstacles)
        best = std::min(best, distance_to_convex(o.footprint, p));
    return best;
}

StartGoal sample_start_goal(const Scenario& scenario, Rng& rng, const SampleOptions& options,
                            std::span<const Vec2> occupied, std::span<const Vec2> occupied_goals)
{
    const Bounds& b = scenario.bounds;
    const double r = options.radius;
    const double x0 = b.x0 + r, x1 = b.x1 - r, y0 = b.y0 + r, y1 = b.y1 - r;
    if (!(x1 > x0 && y1 > y0))
        throw SamplingExhaustedError("bounds leave no room for an agent of radius " + std::to_string(r));

    auto free = [&](Vec2 p, std::span<const Vec2> others) {
        if (obstacle_clearance(p, scenario) < r || point_in_hazard(p, scenario))
            return false;
        for (Vec2 q : others)
            if (distance(p, q) < 2.0 * r)
                return false;
        return true;
    };

    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
        const Vec2 start{uniform(rng, x0, x1), uniform(rng, y0, y1)};
        const Vec2 goal{uniform(rng, x0, x1), uniform(rng, y0, y1)};
        const double heading = wrap_angle(uniform(rng, -std::numbers::pi, std::numbers::pi));
        if (distance(start, goal) < options.min_separation)
            continue;
        if (!free(start, occupied) || !free(goal, occupied_goals))
            continue;
        return {{start, heading}, goal};
    }
    throw SamplingExhaustedError("no collision-free start/goal pair after " + std::to_string(options.max_attempts) +
                                 " attempts");
}

} // namespace plnav
