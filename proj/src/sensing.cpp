#include "plnav/sensing.hpp"

#include "plnav/error.hpp"

namespace plnav {

namespace {

struct VariantName {
    SensingVariant variant;
    std::string_view name;
};

constexpr VariantName kNames[] = {
    {SensingVariant::BtmLaser, "btm-laser"},
    {SensingVariant::TopLaser, "top-laser"},
    {SensingVariant::Depth1d, "depth-1d"},
    {SensingVariant::DepthPool, "depth-pool"},
    {SensingVariant::Depth1dSem, "depth-1d-sem"},
    {SensingVariant::DepthPoolSem, "depth-pool-sem"},
    {SensingVariant::DepthPoolSemNoise, "depth-pool-sem-noise"},
};

PseudoLaser from_laser(const LaserScan& scan)
{
    return {scan.ranges, scan.max_range};
}

} // namespace

std::string_view to_string(SensingVariant v) noexcept
{
    for (const auto& n : kNames)
        if (n.variant == v)
            return n.name;
    return "depth-pool-sem";
}

SensingVariant sensing_variant_from_string(std::string_view name)
{
    for (const auto& n : kNames)
        if (n.name == name)
            return n.variant;
    throw UsageError("unknown sensing variant '" + std::string(name) + "'");
}

std::vector<SensingVariant> all_sensing_variants()
{
    std::vector<SensingVariant> out;
    for (const auto& n : kNames)
        out.push_back(n.variant);
    return out;
}

std::size_t SensingModel::resolved_slice_row() const noexcept
{
    return slice_row >= 0 ? static_cast<std::size_t>(slice_row) : static_cast<std::size_t>(3 * camera.height / 4);
}

PseudoLaser perceive(const SensingModel& model, const Scenario& scenario, const Pose& pose,
                     std::span<const Obstacle> extra)
{
    const CameraModel& cam = model.camera;
    switch (model.variant) {
    case SensingVariant::BtmLaser:
        return from_laser(cast_laser(scenario, pose, model.bottom_laser_z, cam.hfov_deg, cam.width, cam.max_range, extra));
    case SensingVariant::TopLaser:
        return from_laser(cast_laser(scenario, pose, model.top_laser_z, cam.hfov_deg, cam.width, cam.max_range, extra));
    case SensingVariant::Depth1d:
    case SensingVariant::DepthPool: {
        const DepthFrame depth = render_depth(scenario, pose, cam, extra);
        SemanticDepth sd{depth.values};
        return model.variant == SensingVariant::DepthPool
                   ? slice_min_pool(sd, cam.max_range)
                   : naive_row_slice(sd, model.resolved_slice_row(), cam.max_range);
    }
    case SensingVariant::Depth1dSem:
    case SensingVariant::DepthPoolSem:
    case SensingVariant::DepthPoolSemNoise: {
        const CameraFrames frames = render_camera(scenario, pose, cam, extra);
        const SemanticDepth sd = apply_mask(frames.depth, frames.mask);
        return model.variant == SensingVariant::Depth1dSem
                   ? naive_row_slice(sd, model.resolved_slice_row(), cam.max_range)
                   : slice_min_pool(sd, cam.max_range);
    }
    }
    throw UsageError("unhandled sensing variant");
}

} // namespace plnav
