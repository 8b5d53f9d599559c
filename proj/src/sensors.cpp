#include "plnav/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double deg2rad(double d) noexcept { return d * std::numbers::pi / 180.0; }

/// Portion of an obstacle's prism crossed by one column's vertical ray fan,
/// in units of horizontal forward distance s.
struct ColumnSpan {
    double s_in;
    double s_out;
    double z_lo;
    double z_hi;
};

void collect_spans(std::span<const Obstacle> obstacles, Vec2 origin, Vec2 dir, std::vector<ColumnSpan>& out)
{
    for (const Obstacle& o : obstacles) {
        const auto iv = line_convex_interval(o.footprint, origin, dir);
        if (!iv || iv->hi < 0.0)
            continue;
        out.push_back({std::max(iv->lo, 0.0), iv->hi, o.z_lo, o.z_hi});
    }
}

/// First s along the ray z(s) = mount + slope*s inside any span, or +inf.
double first_hit(const std::vector<ColumnSpan>& spans, double mount, double slope) noexcept
{
    double best = kInf;
    for (const ColumnSpan& sp : spans) {
        double lo = sp.s_in;
        double hi = sp.s_out;
        if (slope == 0.0) {
            if (mount < sp.z_lo || mount > sp.z_hi)
                continue;
        } else {
            double a = (sp.z_lo - mount) / slope;
            double b = (sp.z_hi - mount) / slope;
            if (a > b)
                std::swap(a, b);
            lo = std::max(lo, a);
            hi = std::min(hi, b);
        }
        if (lo <= hi && lo < best)
            best = lo;
    }
    return best;
}

void render_into(const Scenario& scenario, const Pose& pose, const CameraModel& cam, std::span<const Obstacle> extra,
                 DepthFrame* depth, SemanticMask* mask)
{
    cam.validate();
    const auto H = static_cast<std::size_t>(cam.height);
    const auto W = static_cast<std::size_t>(cam.width);
    if (depth) {
        depth->values = Grid<double>(H, W, cam.max_range);
        depth->max_range = cam.max_range;
    }
    if (mask)
        mask->values = Grid<std::uint8_t>(H, W, 1);

    const double fx = cam.fx();
    const double fy = cam.fy();
    const double c = std::cos(pose.heading);
    const double s = std::sin(pose.heading);
    std::vector<ColumnSpan> spans;
    std::vector<double> slopes(H);
    for (std::size_t i = 0; i < H; ++i)
        slopes[i] = -(static_cast<double>(i) + 0.5 - 0.5 * cam.height) / fy;

    for (std::size_t j = 0; j < W; ++j) {
        const double left = -(static_cast<double>(j) + 0.5 - 0.5 * cam.width) / fx;
        const Vec2 dir{c - left * s, s + left * c}; // forward component normalized to 1
        spans.clear();
        collect_spans(scenario.obstacles, pose.position, dir, spans);
        collect_spans(extra, pose.position, dir, spans);

        for (std::size_t i = 0; i < H; ++i) {
            const double slope = slopes[i];
            const double scale = std::sqrt(1.0 + left * left + slope * slope);
            const double s_obstacle = first_hit(spans, cam.mount_height, slope);
            const double s_ground = slope < 0.0 ? -cam.mount_height / slope : kInf;
            const bool ground_first = s_ground < s_obstacle;
            const double s_hit = std::min(s_obstacle, s_ground);
            const double range = s_hit * scale;
            if (!(range <= cam.max_range))
                continue; // no hit: max_range, label 1
            if (depth)
                depth->values(i, j) = std::max(range, kMinRange);
            if (mask && ground_first)
                mask->values(i, j) = point_in_hazard(pose.position + dir * s_ground, scenario) ? 1 : 0;
        }
    }
}

} // namespace

void CameraModel::validate() const
{
    if (height < 8 || width < 8)
        throw InvariantError("camera: image must be at least 8x8 pixels");
    if (!(hfov_deg > 0.0 && hfov_deg < 180.0 && vfov_deg > 0.0 && vfov_deg < 180.0))
        throw InvariantError("camera: fields of view must lie in (0, 180) degrees");
    if (!(max_range > 0.0))
        throw InvariantError("camera: max_range must be positive");
    if (!(mount_height >= 0.0))
        throw InvariantError("camera: mount height must be non-negative");
}

double CameraModel::fx() const noexcept { return 0.5 * width / std::tan(0.5 * deg2rad(hfov_deg)); }
double CameraModel::fy() const noexcept { return 0.5 * height / std::tan(0.5 * deg2rad(vfov_deg)); }

double CameraModel::column_bearing(int j) const noexcept
{
    return std::atan(-(j + 0.5 - 0.5 * width) / fx());
}

double CameraModel::row_elevation(int i) const noexcept
{
    return std::atan(-(i + 0.5 - 0.5 * height) / fy());
}

double beam_bearing(int b, int n_beams, double fov_deg) noexcept
{
    const double fov = deg2rad(fov_deg);
    return 0.5 * fov - fov * b / (n_beams - 1);
}

LaserScan cast_laser(const Scenario& scenario, const Pose& pose, double z, double fov_deg, int n_beams,
                     double max_range, std::span<const Obstacle> extra)
{
    if (n_beams < 2)
        throw UsageError("cast_laser needs at least 2 beams");
    if (!(z >= 0.0))
        throw UsageError("laser height must be non-negative");
    LaserScan scan;
    scan.fov_deg = fov_deg;
    scan.z = z;
    scan.max_range = max_range;
    scan.ranges.assign(static_cast<std::size_t>(n_beams), max_range);

    auto visit = [&](std::span<const Obstacle> obstacles, Vec2 dir, double& best) {
        for (const Obstacle& o : obstacles) {
            if (z < o.z_lo || z > o.z_hi)
                continue;
            const auto iv = line_convex_interval(o.footprint, pose.position, dir);
            if (!iv || iv->hi < 0.0)
                continue;
            best = std::min(best, std::max(iv->lo, 0.0));
        }
    };
    for (int b = 0; b < n_beams; ++b) {
        const double a = pose.heading + beam_bearing(b, n_beams, fov_deg);
        const Vec2 dir{std::cos(a), std::sin(a)};
        double best = kInf;
        visit(scenario.obstacles, dir, best);
        visit(extra, dir, best);
        if (best < max_range)
            scan.ranges[static_cast<std::size_t>(b)] = std::max(best, kMinRange);
    }
    return scan;
}

DepthFrame render_depth(const Scenario& scenario, const Pose& pose, const CameraModel& cam,
                        std::span<const Obstacle> extra)
{
    DepthFrame d;
    render_into(scenario, pose, cam, extra, &d, nullptr);
    return d;
}

SemanticMask render_semantics(const Scenario& scenario, const Pose& pose, const CameraModel& cam,
                              std::span<const Obstacle> extra)
{
    SemanticMask m;
    render_into(scenario, pose, cam, extra, nullptr, &m);
    return m;
}

CameraFrames render_camera(const Scenario& scenario, const Pose& pose, const CameraModel& cam,
                           std::span<const Obstacle> extra)
{
    CameraFrames f;
    render_into(scenario, pose, cam, extra, &f.depth, &f.mask);
    return f;
}

} // namespace plnav
