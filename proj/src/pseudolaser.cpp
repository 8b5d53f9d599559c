#include "plnav/pseudolaser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plnav/error.hpp"

namespace plnav {

void NoiseConfig::validate() const
{
    if (!(alpha > 0.0))
        throw InvariantError("noise: alpha must be positive");
    if (radius < 1)
        throw InvariantError("noise: radius must be at least 1");
    if (!(scale >= 0.0))
        throw InvariantError("noise: scale must be non-negative");
}

SemanticDepth apply_mask(const DepthFrame& depth, const SemanticMask& mask)
{
    const auto& d = depth.values;
    const auto& m = mask.values;
    if (d.rows() != m.rows() || d.cols() != m.cols())
        throw ShapeError("apply_mask: depth is " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) +
                         " but mask is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    SemanticDepth out{Grid<double>(d.rows(), d.cols())};
    auto dst = out.values.data();
    auto src = d.data();
    auto bits = m.data();
    for (std::size_t k = 0; k < dst.size(); ++k)
        dst[k] = src[k] * static_cast<double>(bits[k]);
    return out;
}

std::size_t lower_half_begin(std::size_t rows) noexcept { return (rows + 1) / 2; }

PseudoLaser slice_min_pool(const SemanticDepth& sd, double max_range)
{
    const auto& g = sd.values;
    PseudoLaser out;
    out.max_range = max_range;
    out.ranges.assign(g.cols(), std::numeric_limits<double>::infinity());
    for (std::size_t r = lower_half_begin(g.rows()); r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) {
            const double v = g(r, c);
            if (v != 0.0 && v < out.ranges[c])
                out.ranges[c] = v;
        }
    for (double& v : out.ranges)
        if (std::isinf(v))
            v = max_range;
    return out;
}

PseudoLaser naive_row_slice(const SemanticDepth& sd, std::size_t row, double max_range)
{
    const auto& g = sd.values;
    if (row >= g.rows())
        throw UsageError("naive_row_slice: row " + std::to_string(row) + " out of range for " +
                         std::to_string(g.rows()) + " rows");
    PseudoLaser out;
    out.max_range = max_range;
    out.ranges.resize(g.cols());
    for (std::size_t c = 0; c < g.cols(); ++c)
        out.ranges[c] = g(row, c) == 0.0 ? max_range : g(row, c);
    return out;
}

std::vector<std::size_t> detect_boundaries(const PseudoLaser& scan, double alpha)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + 1 < scan.ranges.size(); ++i)
        if (std::abs(scan.ranges[i + 1] - scan.ranges[i]) > alpha)
            out.push_back(i);
    return out;
}

std::vector<Window> boundary_windows(const PseudoLaser& scan, const NoiseConfig& cfg)
{
    std::vector<Window> merged;
    const std::size_t n = scan.ranges.size();
    const auto r = static_cast<std::size_t>(cfg.radius);
    for (std::size_t i : detect_boundaries(scan, cfg.alpha)) {
        const Window w{i + 1 >= r ? i + 1 - r : 0, std::min(i + r, n - 1)};
        if (!merged.empty() && w.first <= merged.back().last + 1)
            merged.back().last = std::max(merged.back().last, w.last);
        else
            merged.push_back(w);
    }
    return merged;
}

PseudoLaser interpolate_boundaries(const PseudoLaser& scan, const NoiseConfig& cfg)
{
    PseudoLaser out = scan;
    const std::size_t n = scan.ranges.size();
    for (const Window& w : boundary_windows(scan, cfg)) {
        const bool has_left = w.first > 0;
        const bool has_right = w.last + 1 < n;
        if (has_left && has_right) {
            const std::size_t a = w.first - 1;
            const std::size_t b = w.last + 1;
            const double va = scan.ranges[a];
            const double vb = scan.ranges[b];
            for (std::size_t k = w.first; k <= w.last; ++k)
                out.ranges[k] = va + (vb - va) * static_cast<double>(k - a) / static_cast<double>(b - a);
        } else if (has_left || has_right) {
            const double fill = has_left ? scan.ranges[w.first - 1] : scan.ranges[w.last + 1];
            for (std::size_t k = w.first; k <= w.last; ++k)
                out.ranges[k] = fill;
        }
    }
    return out;
}

PseudoLaser augment(const PseudoLaser& scan, const NoiseConfig& cfg, Rng& rng)
{
    cfg.validate();
    PseudoLaser out = cfg.interpolate ? interpolate_boundaries(scan, cfg) : scan;
    if (cfg.gaussian) {
        std::vector<bool> in_window(scan.ranges.size(), false);
        if (cfg.interpolate)
            for (const Window& w : boundary_windows(scan, cfg))
                for (std::size_t k = w.first; k <= w.last; ++k)
                    in_window[k] = true;
        for (std::size_t k = 0; k < out.ranges.size(); ++k) {
            if (in_window[k])
                continue;
            const double value = out.ranges[k];
            const double sigma = cfg.model == NoiseModel::StdProportional ? cfg.scale * value
                                                                          : std::sqrt(cfg.scale * std::max(value, 0.0));
            out.ranges[k] = value + sigma * standard_normal(rng);
        }
    }
    for (double& v : out.ranges)
        v = std::clamp(v, kMinRange, scan.max_range);
    return out;
}

std::array<double, 2> goal_in_robot_frame(const Pose& pose, Vec2 goal) noexcept
{
    const Vec2 d = goal - pose.position;
    return {norm(d), wrap_angle(std::atan2(d.y, d.x) - pose.heading)};
}

Observation build_observation(const std::array<PseudoLaser, kStackedScans>& history, std::array<double, 2> goal_polar,
                              double v, double w)
{
    const std::size_t width = history[0].size();
    Observation obs;
    obs.width = width;
    obs.scans.reserve(kStackedScans * width);
    for (const PseudoLaser& scan : history) {
        if (scan.size() != width)
            throw ShapeError("build_observation: scans have different lengths");
        for (double r : scan.ranges)
            obs.scans.push_back(r / scan.max_range);
    }
    obs.goal_distance = goal_polar[0];
    obs.goal_bearing = goal_polar[1];
    obs.v = v;
    obs.w = w;
    return obs;
}

void ScanHistory::push(PseudoLaser scan)
{
    if (scans_.empty()) {
        for (std::size_t k = 0; k < kStackedScans; ++k)
            scans_.push_back(scan);
        return;
    }
    scans_.pop_front();
    scans_.push_back(std::move(scan));
}

std::array<PseudoLaser, kStackedScans> ScanHistory::stacked() const
{
    if (scans_.size() != kStackedScans)
        throw UsageError("scan history is empty");
    return {scans_[0], scans_[1], scans_[2]};
}

} // namespace plnav
