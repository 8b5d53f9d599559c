#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "plnav/env.hpp"
#include "plnav/nn/policy.hpp"
#include "plnav/rl/buffer.hpp"
#include "plnav/sensing.hpp"

namespace plnav::rl {

struct CollectorConfig {
    int num_envs = 8;
    EnvConfig env;
    SensingModel sensing;
    bool augment = false; ///< apply NoiseConfig to training scans
    NoiseConfig noise;
};

/// Summary of one finished agent episode.
struct EpisodeStat {
    double total_reward = 0.0;
    AgentStatus status = AgentStatus::Running;
    int steps = 0;
};

/// Steps several environments in lockstep with one batched policy forward per step.
/// Episodes persist across calls to collect(); hidden states reset at episode starts.
class RolloutCollector {
public:
    /// Environment k runs scenes[k % scenes.size()].
    RolloutCollector(std::vector<std::shared_ptr<const Scenario>> scenes, CollectorConfig config, std::uint64_t seed);

    /// Gathers exactly `transitions` transitions, cut into segments of at most `unroll` entries.
    RolloutBuffer collect(const nn::PolicyNet& net, int transitions, int unroll);

    /// Episodes finished since the previous call.
    std::vector<EpisodeStat> take_finished();
    long long total_steps() const noexcept { return total_steps_; }
    const CollectorConfig& config() const noexcept { return config_; }

private:
    struct AgentSlot {
        std::size_t env = 0;
        std::size_t agent = 0;
        ScanHistory history;
        nn::HiddenState hidden;
        std::optional<Observation> pending; ///< observation of the current state, not yet acted on
        double episode_reward = 0.0;
        int episode_steps = 0;
    };

    struct EnvSlot {
        Environment env;
        Rng rng;
        bool needs_reset = true;
        std::size_t first_slot = 0;
    };


    void reset_env(std::size_t e);
    const Observation& observe(AgentSlot& slot);
    void append(std::size_t slot, int unroll, const Observation& obs, const nn::ActionVec& raw, double log_prob,
                const nn::ActionVec& mean, const nn::ActionVec& log_std, double value, bool bootstrap);
    void close_stream(std::size_t slot, RolloutBuffer& out);

    CollectorConfig config_;
    std::vector<EnvSlot> envs_;
    std::vector<AgentSlot> slots_;
    std::vector<RolloutBuffer> open_; ///< per slot: entries of its unfinished stream
    std::vector<EpisodeStat> finished_;
    long long total_steps_ = 0;
    int hidden_dim_ = 0;
};

} // namespace plnav::rl
