#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "plnav/rl/config.hpp"

namespace plnav {

// JSON mirrors of the configuration structs. Missing keys keep their defaults; unknown
// keys are rejected so typos surface immediately.

nlohmann::json to_json(const nn::PolicyConfig& c);
nlohmann::json to_json(const rl::PPOConfig& c);
nlohmann::json to_json(const EnvConfig& c);
nlohmann::json to_json(const SensingModel& c);
nlohmann::json to_json(const NoiseConfig& c);
nlohmann::json to_json(const rl::TrainConfig& c);

nn::PolicyConfig policy_config_from_json(const nlohmann::json& j);
rl::PPOConfig ppo_config_from_json(const nlohmann::json& j);
EnvConfig env_config_from_json(const nlohmann::json& j);
SensingModel sensing_from_json(const nlohmann::json& j);
NoiseConfig noise_config_from_json(const nlohmann::json& j);
rl::TrainConfig train_config_from_json(const nlohmann::json& j);

/// Parses a training config file. Relative scene paths are resolved against the file's
/// directory.
rl::TrainConfig load_train_config(const std::filesystem::path& path);

/// FNV-1a over the canonical (sorted-key, compact) JSON dump.
std::uint64_t config_hash(const rl::TrainConfig& c);
std::string hash_hex(std::uint64_t h);

} // namespace plnav
