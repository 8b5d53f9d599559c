#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace plnav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
    constexpr Vec2& operator+=(Vec2 o) noexcept
    {
        x += o.x;
        y += o.y;
        return *this;
    }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double theta) noexcept;

struct Pose {
    Vec2 position;
    double heading = 0.0;

    bool operator==(const Pose&) const = default;
};

/// Positive for counter-clockwise vertex order.
double signed_area(std::span<const Vec2> polygon) noexcept;

/// True for a strictly convex (no three collinear consecutive vertices) CCW polygon.
bool is_convex_ccw(std::span<const Vec2> polygon) noexcept;

/// Closed-set containment for a convex CCW polygon: edges count as inside.
bool contains_convex(std::span<const Vec2> polygon, Vec2 p) noexcept;

/// Even-odd containment for an arbitrary simple polygon.
bool contains_polygon(std::span<const Vec2> polygon, Vec2 p) noexcept;

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) noexcept;

/// Euclidean distance from p to a convex CCW polygon; zero inside or on the boundary.
double distance_to_convex(std::span<const Vec2> polygon, Vec2 p) noexcept;

/// Parameter interval [t_in, t_out] over which origin + t*dir lies inside a convex
/// CCW polygon (t ranges over all reals). Empty when the line misses the polygon.
struct Interval {
    double lo;
    double hi;
};
std::optional<Interval> line_convex_interval(std::span<const Vec2> polygon, Vec2 origin, Vec2 dir) noexcept;

/// Regular polygon approximating a disc, CCW.
std::vector<Vec2> disc_polygon(Vec2 center, double radius, int sides);

} // namespace plnav
