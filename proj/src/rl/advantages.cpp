#include "plnav/rl/advantages.hpp"

#include <cmath>

#include "plnav/error.hpp"

namespace plnav::rl {

AdvantageResult gae(std::span<const double> rewards, std::span<const double> values,
                    std::span<const unsigned char> terminals, double gamma, double lambda)
{
    const std::size_t n = rewards.size();
    if (values.size() != n + 1 || terminals.size() != n)
        throw ShapeError("gae: expected n rewards, n terminal flags and n+1 values");
    AdvantageResult r{std::vector<double>(n), std::vector<double>(n)};
    double next = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        const double live = terminals[k] ? 0.0 : 1.0;
        const double delta = rewards[k] + gamma * values[k + 1] * live - values[k];
        next = delta + gamma * lambda * live * next;
        r.advantages[k] = next;
        r.returns[k] = next + values[k];
    }
    return r;
}

void compute_advantages(RolloutBuffer& buffer, double gamma, double lambda)
{
    buffer.advantages.assign(buffer.size(), 0.0);
    buffer.returns.assign(buffer.size(), 0.0);
    for (const Stream& s : buffer.streams) {
        const bool open = buffer.bootstrap_only[s.end - 1] != 0;
        const std::size_t n = s.end - s.begin - (open ? 1 : 0);
        std::vector<double> values(buffer.values.begin() + static_cast<std::ptrdiff_t>(s.begin),
                                   buffer.values.begin() + static_cast<std::ptrdiff_t>(s.begin + n));
        values.push_back(open ? buffer.values[s.end - 1] : 0.0);
        const auto r = gae(std::span(buffer.rewards).subspan(s.begin, n), values,
                           std::span(buffer.terminals).subspan(s.begin, n), gamma, lambda);
        for (std::size_t k = 0; k < n; ++k) {
            buffer.advantages[s.begin + k] = r.advantages[k];
            buffer.returns[s.begin + k] = r.returns[k];
        }
    }
}

std::vector<double> normalized_advantages(const RolloutBuffer& buffer)
{
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < buffer.size(); ++i)
        if (!buffer.bootstrap_only[i]) {
            sum += buffer.advantages[i];
            ++n;
        }
    const double mean = n ? sum / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < buffer.size(); ++i)
        if (!buffer.bootstrap_only[i])
            sq += (buffer.advantages[i] - mean) * (buffer.advantages[i] - mean);
    const double sd = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
    std::vector<double> out(buffer.size(), 0.0);
    for (std::size_t i = 0; i < buffer.size(); ++i)
        if (!buffer.bootstrap_only[i])
            out[i] = (buffer.advantages[i] - mean) / (sd + 1e-8);
    return out;
}

} // namespace plnav::rl
