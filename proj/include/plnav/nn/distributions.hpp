#pragma once

#include <array>
#include <span>

#include "plnav/env.hpp"
#include "plnav/rng.hpp"

namespace plnav::nn {

/// Diagonal Gaussian helpers over the two action dimensions.
using ActionVec = std::array<double, 2>;

double gaussian_log_prob(const ActionVec& x, const ActionVec& mean, const ActionVec& log_std) noexcept;
double gaussian_entropy(const ActionVec& log_std) noexcept;
/// KL(p || q) for p = N(mean_p, exp(log_std_p)^2), q likewise.
double gaussian_kl(const ActionVec& mean_p, const ActionVec& log_std_p, const ActionVec& mean_q,
                   const ActionVec& log_std_q) noexcept;

struct SampledAction {
    ActionVec raw;     ///< unclamped Gaussian sample
    Action action;     ///< clamped to [-1,1]^2 and denormalized
    double log_prob;   ///< density of `raw`
};

SampledAction sample_action(const ActionVec& mean, const ActionVec& log_std, Rng& rng);

/// Deterministic action: the clamped mean.
Action mean_action(const ActionVec& mean) noexcept;

} // namespace plnav::nn
