#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plnav/rl/config.hpp"

namespace plnav::rl {

struct TrainOptions {
    std::optional<std::filesystem::path> resume; ///< stage checkpoint to continue after
    std::ostream* progress = nullptr;            ///< human-readable progress and warnings
};

struct StageResult {
    std::string id;
    long long steps = 0;
    double success_rate = 0.0; ///< rolling rate when the stage ended
    double mean_reward = 0.0;
    bool reached_threshold = false;
    std::filesystem::path checkpoint;
};

struct TrainResult {
    std::vector<StageResult> stages;
    std::uint64_t config_hash = 0;
};

/// Runs the stages in order, transferring parameters between them. A stage ends when the
/// rolling success rate over a full window reaches its threshold or when its step budget is
/// spent (with a warning). Writes train_log.csv, manifest.json and stage_<id>.ckpt to out_dir.
TrainResult train_curriculum(const TrainConfig& config, const std::filesystem::path& out_dir,
                             const TrainOptions& options = {});

} // namespace plnav::rl
