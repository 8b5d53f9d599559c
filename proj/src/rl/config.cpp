#include "plnav/rl/config.hpp"

#include <cmath>

#include "plnav/error.hpp"

namespace plnav::rl {

void PPOConfig::validate() const
{
    if (batch_size < 1 || unroll < 1 || epochs < 1 || minibatches < 1)
        throw InvariantError("ppo: batch_size, unroll, epochs and minibatches must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0) || !(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw InvariantError("ppo: gamma must lie in (0,1] and gae_lambda in [0,1]");
    if (!(learning_rate > 0.0) || kl_coef < 0.0 || value_coef < 0.0 || entropy_coef < 0.0)
        throw InvariantError("ppo: learning rate must be positive and coefficients non-negative");
    if (!(target_tau > 0.0 && target_tau <= 1.0))
        throw InvariantError("ppo: target_tau must lie in (0,1]");
}

void StageConfig::validate() const
{
    if (id.empty())
        throw InvariantError("stage: id must not be empty");
    if (scenes.empty())
        throw InvariantError("stage " + id + ": no scenes");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw InvariantError("stage " + id + ": threshold must lie in (0,1]");
    if (budget < 1)
        throw InvariantError("stage " + id + ": budget must be positive");
}

void TrainConfig::validate() const
{
    policy.validate();
    ppo.validate();
    sensing.camera.validate();
    noise.validate();
    if (policy.scan_width != sensing.width())
        throw InvariantError("config: policy scan_width " + std::to_string(policy.scan_width) +
                             " differs from the sensor width " + std::to_string(sensing.width()));
    if (num_envs < 1 || success_window < 1)
        throw InvariantError("config: num_envs and success_window must be positive");
    for (const auto& s : stages)
        s.validate();
}

} // namespace plnav::rl
