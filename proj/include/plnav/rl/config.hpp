#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plnav/env.hpp"
#include "plnav/nn/policy.hpp"
#include "plnav/pseudolaser.hpp"
#include "plnav/sensing.hpp"

namespace plnav::rl {

struct PPOConfig {
    int batch_size = 1024;      ///< transitions per update
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double learning_rate = 5e-5;
    int unroll = 20;            ///< LSTM truncation window
    double kl_coef = 15e-4;
    int epochs = 4;
    int minibatches = 4;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
    double max_grad_norm = 0.5; ///< global-norm clip; <= 0 disables
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    bool normalize_advantages = true;
    bool target_network = false; ///< Polyak-averaged value network for bootstrap values
    double target_tau = 0.01;
    bool lr_anneal = false;      ///< decay the learning rate linearly to zero over each stage budget

    void validate() const;
};

struct StageConfig {
    std::string id;
    std::vector<std::string> scenes; ///< scenario files; envs alternate over them
    double threshold = 0.9;          ///< rolling success rate that ends the stage early
    long long budget = 200000;       ///< environment steps

    void validate() const;
};

struct TrainConfig {
    std::uint64_t seed = 0;
    nn::PolicyConfig policy;
    PPOConfig ppo;
    EnvConfig env;
    SensingModel sensing;
    NoiseConfig noise;
    int num_envs = 8;
    int success_window = 100; ///< episodes in the rolling success rate
    std::vector<StageConfig> stages;

    void validate() const;
};

} // namespace plnav::rl
