#pragma once

#include <span>
#include <vector>

#include "plnav/rl/buffer.hpp"

namespace plnav::rl {

struct AdvantageResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// GAE over one trajectory piece. `values` has one more entry than `rewards`: the last is
/// the bootstrap value of the state after the final step. A terminal flag at step t stops
/// bootstrapping from t+1.
AdvantageResult gae(std::span<const double> rewards, std::span<const double> values,
                    std::span<const unsigned char> terminals, double gamma, double lambda);

/// Fills buffer.advantages and buffer.returns (raw, unnormalized) stream by stream.
/// Bootstrap-only entries receive zero.
void compute_advantages(RolloutBuffer& buffer, double gamma, double lambda);

/// Zero-mean unit-variance advantages over the buffer's transitions.
std::vector<double> normalized_advantages(const RolloutBuffer& buffer);

} // namespace plnav::rl
