#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <vector>

#include "plnav/grid.hpp"
#include "plnav/rng.hpp"
#include "plnav/sensors.hpp"

namespace plnav {

/// Depth with untraversable-only content; zero marks masked-out (traversable) pixels.
struct SemanticDepth {
    Grid<double> values;
};

/// 1-D range vector synthesized from an image, one entry per column.
struct PseudoLaser {
    std::vector<double> ranges;
    double max_range = 10.0;

    std::size_t size() const noexcept { return ranges.size(); }
};

enum class NoiseModel {
    StdProportional,      ///< sigma = scale * value
    VarianceProportional, ///< sigma^2 = scale * value
};

struct NoiseConfig {
    double alpha = 0.5;        ///< boundary threshold between adjacent entries, metres
    int radius = 8;            ///< neighbourhood half-width in beams
    double scale = 0.07;       ///< noise scale relative to the value
    bool interpolate = true;   ///< boundary-window interpolation stage
    bool gaussian = true;      ///< Gaussian stage
    NoiseModel model = NoiseModel::StdProportional;

    void validate() const;
};

/// Elementwise depth * mask.
SemanticDepth apply_mask(const DepthFrame& depth, const SemanticMask& mask);

/// First row of the pooled region: ceil(H/2).
std::size_t lower_half_begin(std::size_t rows) noexcept;

/// Column-wise minimum over the lower image half, ignoring zeros. Columns with no
/// nonzero entry report max_range.
PseudoLaser slice_min_pool(const SemanticDepth& sd, double max_range);

/// Single-row slice; zeros become max_range.
PseudoLaser naive_row_slice(const SemanticDepth& sd, std::size_t row, double max_range);

/// Indices i with |L(i+1) - L(i)| > alpha.
std::vector<std::size_t> detect_boundaries(const PseudoLaser& scan, double alpha);

/// Closed index range [first, last] replaced by interpolation.
struct Window {
    std::size_t first;
    std::size_t last;

    bool operator==(const Window&) const = default;
};

/// Windows [i-radius+1, i+radius] around each boundary, clipped and merged when they
/// overlap or touch.
std::vector<Window> boundary_windows(const PseudoLaser& scan, const NoiseConfig& cfg);

/// Interpolation stage only: each window is replaced by the line between the entries just
/// outside it; a window touching one end is filled with the single available endpoint.
PseudoLaser interpolate_boundaries(const PseudoLaser& scan, const NoiseConfig& cfg);

/// Full augmentation: interpolation, then Gaussian noise on every entry outside all
/// windows, then clamping to [kMinRange, max_range].
PseudoLaser augment(const PseudoLaser& scan, const NoiseConfig& cfg, Rng& rng);

/// Policy input: three stacked scans normalized by max range plus behavioural state.
struct Observation {
    std::size_t width = 0;
    std::vector<double> scans; ///< 3*width, oldest scan first
    double goal_distance = 0.0;
    double goal_bearing = 0.0; ///< radians, positive = left
    double v = 0.0;
    double w = 0.0;
};

inline constexpr std::size_t kStackedScans = 3;

/// Goal relative to the robot as (distance, bearing).
std::array<double, 2> goal_in_robot_frame(const Pose& pose, Vec2 goal) noexcept;

/// `history` holds exactly three equal-length scans, oldest first.
Observation build_observation(const std::array<PseudoLaser, kStackedScans>& history, std::array<double, 2> goal_polar,
                              double v, double w);

/// Rolling three-scan history; the first push replicates its scan.
class ScanHistory {
public:
    void reset() { scans_.clear(); }
    void push(PseudoLaser scan);
    bool empty() const noexcept { return scans_.empty(); }
    std::array<PseudoLaser, kStackedScans> stacked() const;

private:
    std::deque<PseudoLaser> scans_;
};

} // namespace plnav
