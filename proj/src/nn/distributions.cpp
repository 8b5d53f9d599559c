#include "plnav/nn/distributions.hpp"

#include <cmath>
#include <numbers>

namespace plnav::nn {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

double gaussian_log_prob(const ActionVec& x, const ActionVec& mean, const ActionVec& log_std) noexcept
{
    double lp = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
        lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
    }
    return lp;
}

double gaussian_entropy(const ActionVec& log_std) noexcept
{
    double h = 0.0;
    for (double ls : log_std)
        h += ls + 0.5 + kHalfLog2Pi;
    return h;
}

double gaussian_kl(const ActionVec& mean_p, const ActionVec& log_std_p, const ActionVec& mean_q,
                   const ActionVec& log_std_q) noexcept
{
    double kl = 0.0;
    for (std::size_t i = 0; i < mean_p.size(); ++i) {
        const double var_p = std::exp(2.0 * log_std_p[i]);
        const double var_q = std::exp(2.0 * log_std_q[i]);
        const double d = mean_p[i] - mean_q[i];
        kl += log_std_q[i] - log_std_p[i] + (var_p + d * d) / (2.0 * var_q) - 0.5;
    }
    return kl;
}

SampledAction sample_action(const ActionVec& mean, const ActionVec& log_std, Rng& rng)
{
    SampledAction s{};
    for (std::size_t i = 0; i < mean.size(); ++i)
        s.raw[i] = mean[i] + std::exp(log_std[i]) * standard_normal(rng);
    s.action = Action::from_normalized(s.raw[0], s.raw[1]);
    s.log_prob = gaussian_log_prob(s.raw, mean, log_std);
    return s;
}

Action mean_action(const ActionVec& mean) noexcept { return Action::from_normalized(mean[0], mean[1]); }

} // namespace plnav::nn
