#pragma once

#include <filesystem>
#include <optional>

#include "plnav/sensors.hpp"

namespace plnav {

/// Binary 16-bit PGM (P5); depth scaled so 65535 == max_range. The max range is
/// recorded in a "# max_range <m>" header comment.
void write_depth_pgm(const std::filesystem::path& path, const DepthFrame& depth);

/// Reads a P2/P5 graymap. Without a max_range comment the caller's value (default 10 m) is used.
DepthFrame read_depth_pgm(const std::filesystem::path& path, std::optional<double> max_range = std::nullopt);

/// Binary PBM (P4); mask value 1 is written as a set (black) bit.
void write_mask_pbm(const std::filesystem::path& path, const SemanticMask& mask);

/// Reads a P1/P4 bitmap.
SemanticMask read_mask_pbm(const std::filesystem::path& path);

} // namespace plnav
