#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "plnav/nn/adam.hpp"
#include "plnav/nn/policy.hpp"

namespace plnav::nn {

// Binary layout, little-endian throughout:
//   "PLNAVCKP" | u32 version | u32 n_dims | i64 dims[n_dims] | u64 config_hash | u32 n_tensors
//   per tensor: u32 name_len | name | u32 rank | u64 shape[rank] | f64 data[prod(shape)]
//   u64 FNV-1a checksum of everything before it

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

struct Checkpoint {
    PolicyConfig policy;
    std::uint64_t config_hash = 0;
    std::vector<NamedTensor> tensors; ///< parameters in declaration order, then optional extras

    const Tensor* find(std::string_view name) const noexcept;
    /// Scalar stored under "meta.<key>", or `fallback`.
    double meta(std::string_view key, double fallback) const noexcept;
    void set_meta(const std::string& key, double value);
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Parameters (and optionally Adam moments) of a network.
Checkpoint make_checkpoint(const PolicyNet& net, std::uint64_t config_hash, const Adam* optimizer = nullptr);
PolicyNet restore_policy(const Checkpoint& ckpt);
/// Restores moments and step count when present; returns false otherwise.
bool restore_optimizer(const Checkpoint& ckpt, Adam& optimizer);

} // namespace plnav::nn
