#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "plnav/pseudolaser.hpp"
#include "plnav/sensors.hpp"

namespace plnav {

/// Which sensor chain feeds the policy (the ablation axis).
enum class SensingVariant {
    BtmLaser,          ///< planar laser low on the body
    TopLaser,          ///< planar laser on top of the body
    Depth1d,           ///< one depth row, no semantics
    DepthPool,         ///< lower-half min pooling, no semantics
    Depth1dSem,        ///< one masked depth row
    DepthPoolSem,      ///< masked lower-half min pooling
    DepthPoolSemNoise, ///< DepthPoolSem trained with augmentation
};

std::string_view to_string(SensingVariant v) noexcept;
SensingVariant sensing_variant_from_string(std::string_view name);
std::vector<SensingVariant> all_sensing_variants();

struct SensingModel {
    SensingVariant variant = SensingVariant::DepthPoolSem;
    CameraModel camera;
    double bottom_laser_z = 0.3;
    double top_laser_z = 0.8;
    int slice_row = -1; ///< depth-1d row; negative selects floor(3H/4)

    /// Scan width fed to the policy (camera width; lasers use as many beams).
    int width() const noexcept { return camera.width; }
    double max_range() const noexcept { return camera.max_range; }
    std::size_t resolved_slice_row() const noexcept;
    /// Whether training observations are augmented for this variant.
    bool augments_training() const noexcept { return variant == SensingVariant::DepthPoolSemNoise; }
};

/// Produces the 1-D scan the chosen variant sees from `pose`.
PseudoLaser perceive(const SensingModel& model, const Scenario& scenario, const Pose& pose,
                     std::span<const Obstacle> extra = {});

} // namespace plnav
