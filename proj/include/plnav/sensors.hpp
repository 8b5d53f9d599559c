#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plnav/grid.hpp"
#include "plnav/world.hpp"

namespace plnav {

/// Smallest range a sensor reports; hits closer than this (sensor inside geometry) clamp here.
inline constexpr double kMinRange = 1e-3;

/// Forward-looking pinhole camera mounted at the robot centre.
struct CameraModel {
    double hfov_deg = 90.0;
    double vfov_deg = 60.0;
    int height = 48;
    int width = 128;
    double mount_height = 0.5;
    double max_range = 10.0;

    void validate() const;
    double fx() const noexcept;
    double fy() const noexcept;
    /// Bearing of column j's pixel centre relative to the heading (positive = left).
    double column_bearing(int j) const noexcept;
    /// Elevation of row i's pixel centre (positive = up).
    double row_elevation(int i) const noexcept;
};

/// Euclidean ray lengths in metres; max_range encodes "no hit".
struct DepthFrame {
    Grid<double> values;
    double max_range = 10.0;
};

/// 0 = traversable ground, 1 = everything else.
struct SemanticMask {
    Grid<std::uint8_t> values;
};

struct LaserScan {
    std::vector<double> ranges;
    double fov_deg = 90.0;
    double z = 0.0;
    double max_range = 10.0;
};

/// Bearing of beam b of n spread uniformly over the fov, beam 0 leftmost.
double beam_bearing(int b, int n_beams, double fov_deg) noexcept;

/// Planar laser at height z. Only obstacles whose z-interval contains z are seen;
/// hazard patches are invisible. `extra` adds dynamic obstacles (other robots).
LaserScan cast_laser(const Scenario& scenario, const Pose& pose, double z, double fov_deg, int n_beams,
                     double max_range, std::span<const Obstacle> extra = {});

DepthFrame render_depth(const Scenario& scenario, const Pose& pose, const CameraModel& cam,
                        std::span<const Obstacle> extra = {});

SemanticMask render_semantics(const Scenario& scenario, const Pose& pose, const CameraModel& cam,
                              std::span<const Obstacle> extra = {});

struct CameraFrames {
    DepthFrame depth;
    SemanticMask mask;
};

/// Depth and semantics from one traversal.
CameraFrames render_camera(const Scenario& scenario, const Pose& pose, const CameraModel& cam,
                           std::span<const Obstacle> extra = {});

} // namespace plnav
