#pragma once

#include <optional>
#include <span>
#include <vector>

#include "plnav/nn/adam.hpp"
#include "plnav/nn/distributions.hpp"
#include "plnav/nn/policy.hpp"
#include "plnav/rl/buffer.hpp"
#include "plnav/rl/config.hpp"

namespace plnav::rl {

/// Per-transition inputs of the loss.
struct PPOSample {
    nn::ActionVec action{};
    nn::ActionVec old_mean{};
    nn::ActionVec old_log_std{};
    double old_log_prob = 0.0;
    double advantage = 0.0;
    double ret = 0.0;
};

struct LossStats {
    double total = 0.0;
    double policy_loss = 0.0; ///< mean(-ratio * A)
    double value_loss = 0.0;  ///< mean((V - R)^2)
    double kl = 0.0;          ///< mean KL(old || new)
    double kl_penalty = 0.0;  ///< kl_coef * kl
    double entropy = 0.0;
    double mean_ratio = 0.0;
    std::size_t samples = 0;
};

struct LossResult {
    LossStats stats;
    nn::PolicyGradOutput grad;
};

/// KL-penalized PPO loss (minimized):
///   -mean(ratio*A) + beta*mean(KL(old||new)) + c_v*mean((V-R)^2) - c_e*entropy
/// `samples` has one entry per output column; empty entries are ignored.
LossResult ppo_loss(const nn::PolicyOutput& out, std::span<const std::optional<PPOSample>> samples,
                    const PPOConfig& cfg);

/// Segments packed as one padded time-major batch.
struct SegmentBatch {
    nn::PolicyBatch input;
    std::vector<std::optional<std::size_t>> entry; ///< buffer entry per column, empty for padding
};

SegmentBatch make_segment_batch(const nn::PolicyConfig& cfg, const RolloutBuffer& buffer,
                                std::span<const std::size_t> segments);

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double kl = 0.0;         ///< mean over minibatches, measured before each step
    double kl_penalty = 0.0;
    double entropy = 0.0;
    double grad_norm = 0.0;  ///< mean pre-clip global norm
    double kl_after = 0.0;   ///< KL(old || updated) over the whole buffer
    int minibatches = 0;
};

/// Epochs of minibatch Adam steps over whole segments. Requires advantages.
UpdateStats ppo_update(nn::PolicyNet& net, nn::Adam& optimizer, const RolloutBuffer& buffer, const PPOConfig& cfg,
                       Rng& rng);

/// Mean KL(stored policy || net) over the buffer's transitions.
double measure_kl(const nn::PolicyNet& net, const RolloutBuffer& buffer);

/// Replaces every stored value (bootstrap entries included) with `net`'s estimate.
void recompute_values(const nn::PolicyNet& net, RolloutBuffer& buffer);

/// target <- (1 - tau) * target + tau * online
void polyak_update(nn::ParameterStore& target, const nn::ParameterStore& online, double tau);

} // namespace plnav::rl
