#include "plnav/geometry.hpp"

#include <algorithm>
#include <limits>

namespace plnav {

double wrap_angle(double theta) noexcept
{
    double wrapped = std::remainder(theta, 2.0 * std::numbers::pi);
    if (wrapped <= -std::numbers::pi)
        wrapped += 2.0 * std::numbers::pi;
    return wrapped;
}

double signed_area(std::span<const Vec2> polygon) noexcept
{
    double twice = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i)
        twice += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
    return 0.5 * twice;
}

bool is_convex_ccw(std::span<const Vec2> polygon) noexcept
{
    const std::size_t n = polygon.size();
    if (n < 3 || signed_area(polygon) <= 0.0)
        return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[(i + 1) % n];
        const Vec2 c = polygon[(i + 2) % n];
        if (cross(b - a, c - b) <= 0.0)
            return false;
    }
    return true;
}

bool contains_convex(std::span<const Vec2> polygon, Vec2 p) noexcept
{
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 edge = polygon[(i + 1) % n] - a;
        const Vec2 rel = p - a;
        // Tolerance scales with the operands so exact-boundary points survive rounding.
        const double tol = 1e-12 * norm(edge) * (norm(rel) + 1.0);
        if (cross(edge, rel) < -tol)
            return false;
    }
    return n >= 3;
}

bool contains_polygon(std::span<const Vec2> polygon, Vec2 p) noexcept
{
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = polygon[i];
        const Vec2 b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross)
                inside = !inside;
        }
    }
    return inside;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) noexcept
{
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0)
        return distance(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

double distance_to_convex(std::span<const Vec2> polygon, Vec2 p) noexcept
{
    if (contains_convex(polygon, p))
        return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < polygon.size(); ++i)
        best = std::min(best, distance_to_segment(p, polygon[i], polygon[(i + 1) % polygon.size()]));
    return best;
}

std::optional<Interval> line_convex_interval(std::span<const Vec2> polygon, Vec2 origin, Vec2 dir) noexcept
{
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = polygon[i];
        const Vec2 edge = polygon[(i + 1) % n] - a;
        const double num = cross(edge, origin - a);
        const double den = cross(edge, dir);
        if (den == 0.0) {
            if (num < 0.0)
                return std::nullopt;
            continue;
        }
        const double t = -num / den;
        if (den > 0.0)
            lo = std::max(lo, t);
        else
            hi = std::min(hi, t);
        if (lo > hi)
            return std::nullopt;
    }
    return Interval{lo, hi};
}

std::vector<Vec2> disc_polygon(Vec2 center, double radius, int sides)
{
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(sides));
    // Circumscribed so the polygon covers the disc.
    const double r = radius / std::cos(std::numbers::pi / sides);
    for (int k = 0; k < sides; ++k) {
        const double a = 2.0 * std::numbers::pi * k / sides;
        out.push_back(center + Vec2{r * std::cos(a), r * std::sin(a)});
    }
    return out;
}

} // namespace plnav
