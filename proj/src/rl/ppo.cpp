#include "plnav/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "plnav/error.hpp"
#include "plnav/rl/advantages.hpp"

namespace plnav::rl {

namespace {

constexpr std::size_t kReplayChunk = 64; ///< segments per forward when replaying a whole buffer

template <typename Fn>
void for_each_chunk(const nn::PolicyNet& net, const RolloutBuffer& buffer, Fn&& fn)
{
    std::vector<std::size_t> ids(buffer.segments.size());
    std::iota(ids.begin(), ids.end(), 0);
    for (std::size_t first = 0; first < ids.size(); first += kReplayChunk) {
        const std::size_t n = std::min(kReplayChunk, ids.size() - first);
        SegmentBatch sb = make_segment_batch(net.config(), buffer, std::span(ids).subspan(first, n));
        const nn::PolicyOutput out = net.forward(sb.input);
        fn(sb, out);
    }
}

} // namespace

LossResult ppo_loss(const nn::PolicyOutput& out, std::span<const std::optional<PPOSample>> samples,
                    const PPOConfig& cfg)
{
    const Eigen::Index cols = out.mean.cols();
    if (static_cast<Eigen::Index>(samples.size()) != cols || out.value.cols() != cols)
        throw ShapeError("ppo loss: one sample slot per output column required");

    LossResult r;
    r.grad.mean = nn::Matrix::Zero(2, cols);
    r.grad.value = nn::Matrix::Zero(1, cols);
    r.grad.log_std = nn::Vector::Zero(2);

    const nn::ActionVec ls{out.log_std(0), out.log_std(1)};
    const nn::ActionVec var{std::exp(2.0 * ls[0]), std::exp(2.0 * ls[1])};
    std::size_t n = 0;
    for (const auto& s : samples)
        n += s.has_value();
    if (n == 0)
        return r;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double beta = cfg.kl_coef;

    LossStats& st = r.stats;
    st.samples = n;
    for (Eigen::Index col = 0; col < cols; ++col) {
        const auto& s = samples[static_cast<std::size_t>(col)];
        if (!s)
            continue;
        const nn::ActionVec mu{out.mean(0, col), out.mean(1, col)};
        const double ratio = std::exp(nn::gaussian_log_prob(s->action, mu, ls) - s->old_log_prob);
        const double kl = nn::gaussian_kl(s->old_mean, s->old_log_std, mu, ls);
        const double dv = out.value(0, col) - s->ret;
        st.policy_loss += -ratio * s->advantage * inv_n;
        st.kl += kl * inv_n;
        st.value_loss += dv * dv * inv_n;
        st.mean_ratio += ratio * inv_n;
        for (int i = 0; i < 2; ++i) {
            const double diff = s->action[i] - mu[i];
            const double old_var = std::exp(2.0 * s->old_log_std[i]);
            const double dmu_old = s->old_mean[i] - mu[i];
            r.grad.mean(i, col) = inv_n * (-s->advantage * ratio * diff / var[i] - beta * dmu_old / var[i]);
            r.grad.log_std(i) += inv_n * (-s->advantage * ratio * (diff * diff / var[i] - 1.0) +
                                          beta * (1.0 - (old_var + dmu_old * dmu_old) / var[i]));
        }
        r.grad.value(0, col) = 2.0 * cfg.value_coef * dv * inv_n;
    }
    st.entropy = nn::gaussian_entropy(ls);
    r.grad.log_std.array() -= cfg.entropy_coef;
    st.kl_penalty = beta * st.kl;
    st.total = st.policy_loss + st.kl_penalty + cfg.value_coef * st.value_loss - cfg.entropy_coef * st.entropy;
    return r;
}

SegmentBatch make_segment_batch(const nn::PolicyConfig& cfg, const RolloutBuffer& buffer,
                                std::span<const std::size_t> segments)
{
    if (segments.empty())
        throw UsageError("segment batch needs at least one segment");
    std::size_t steps = 0;
    for (std::size_t id : segments)
        steps = std::max(steps, buffer.segments.at(id).length());
    const int batch = static_cast<int>(segments.size());
    SegmentBatch sb{nn::PolicyBatch(cfg, static_cast<int>(steps), batch), {}};
    sb.entry.assign(steps * segments.size(), std::nullopt);
    for (int b = 0; b < batch; ++b) {
        const Segment& seg = buffer.segments[segments[static_cast<std::size_t>(b)]];
        sb.input.set_hidden(b, seg.initial);
        for (std::size_t t = 0; t < seg.length(); ++t) {
            sb.input.set_observation(static_cast<int>(t), b, buffer.observations[seg.begin + t]);
            sb.entry[t * segments.size() + static_cast<std::size_t>(b)] = seg.begin + t;
        }
    }
    return sb;
}

UpdateStats ppo_update(nn::PolicyNet& net, nn::Adam& optimizer, const RolloutBuffer& buffer, const PPOConfig& cfg,
                       Rng& rng)
{
    if (buffer.advantages.size() != buffer.size())
        throw UsageError("ppo update requires computed advantages");
    if (buffer.segments.empty())
        throw UsageError("ppo update on an empty buffer");
    const std::vector<double> adv =
        cfg.normalize_advantages ? normalized_advantages(buffer) : buffer.advantages;

    UpdateStats stats;
    std::vector<std::size_t> order(buffer.segments.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t groups = std::min<std::size_t>(static_cast<std::size_t>(cfg.minibatches), order.size());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t g = 0; g < groups; ++g) {
            const std::size_t lo = g * order.size() / groups;
            const std::size_t hi = (g + 1) * order.size() / groups;
            SegmentBatch sb = make_segment_batch(net.config(), buffer, std::span(order).subspan(lo, hi - lo));

            std::vector<std::optional<PPOSample>> samples(sb.entry.size());
            for (std::size_t c = 0; c < sb.entry.size(); ++c) {
                if (!sb.entry[c] || buffer.bootstrap_only[*sb.entry[c]])
                    continue;
                const std::size_t i = *sb.entry[c];
                samples[c] = PPOSample{buffer.actions[i], buffer.old_means[i], buffer.old_log_stds[i],
                                       buffer.log_probs[i], adv[i], buffer.returns[i]};
            }

            nn::PolicyTrace trace;
            const nn::PolicyOutput out = net.forward(sb.input, &trace);
            const LossResult loss = ppo_loss(out, samples, cfg);
            if (loss.stats.samples == 0)
                continue;
            if (!std::isfinite(loss.stats.total)) {
                std::ostringstream msg;
                msg << "non-finite PPO loss (policy " << loss.stats.policy_loss << ", value " << loss.stats.value_loss
                    << ", kl " << loss.stats.kl << ", entropy " << loss.stats.entropy << ") at epoch " << epoch
                    << ", minibatch " << g;
                throw NumericalError(msg.str());
            }

            nn::ParameterStore& store = net.params();
            store.zero_grad();
            net.backward(loss.grad, trace);
            const double norm = store.grad_norm();
            if (!std::isfinite(norm))
                throw NumericalError("non-finite gradient norm at epoch " + std::to_string(epoch) + ", minibatch " +
                                     std::to_string(g));
            if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm)
                store.scale_grad(cfg.max_grad_norm / norm);
            optimizer.step(store);

            stats.policy_loss += loss.stats.policy_loss;
            stats.value_loss += loss.stats.value_loss;
            stats.kl += loss.stats.kl;
            stats.kl_penalty += loss.stats.kl_penalty;
            stats.entropy += loss.stats.entropy;
            stats.grad_norm += norm;
            ++stats.minibatches;
        }
    }
    if (stats.minibatches > 0) {
        const double k = 1.0 / stats.minibatches;
        stats.policy_loss *= k;
        stats.value_loss *= k;
        stats.kl *= k;
        stats.kl_penalty *= k;
        stats.entropy *= k;
        stats.grad_norm *= k;
    }
    stats.kl_after = measure_kl(net, buffer);
    return stats;
}

double measure_kl(const nn::PolicyNet& net, const RolloutBuffer& buffer)
{
    double sum = 0.0;
    std::size_t n = 0;
    for_each_chunk(net, buffer, [&](const SegmentBatch& sb, const nn::PolicyOutput& out) {
        const nn::ActionVec ls{out.log_std(0), out.log_std(1)};
        for (std::size_t c = 0; c < sb.entry.size(); ++c) {
            if (!sb.entry[c] || buffer.bootstrap_only[*sb.entry[c]])
                continue;
            const std::size_t i = *sb.entry[c];
            const auto col = static_cast<Eigen::Index>(c);
            sum += nn::gaussian_kl(buffer.old_means[i], buffer.old_log_stds[i], {out.mean(0, col), out.mean(1, col)}, ls);
            ++n;
        }
    });
    return n ? sum / static_cast<double>(n) : 0.0;
}

void recompute_values(const nn::PolicyNet& net, RolloutBuffer& buffer)
{
    for_each_chunk(net, buffer, [&](const SegmentBatch& sb, const nn::PolicyOutput& out) {
        for (std::size_t c = 0; c < sb.entry.size(); ++c)
            if (sb.entry[c])
                buffer.values[*sb.entry[c]] = out.value(0, static_cast<Eigen::Index>(c));
    });
}

void polyak_update(nn::ParameterStore& target, const nn::ParameterStore& online, double tau)
{
    if (target.size() != online.size())
        throw ShapeError("polyak update: parameter layouts differ");
    for (std::size_t k = 0; k < target.size(); ++k) {
        auto t = target[k].value.data();
        const auto o = online[k].value.data();
        if (t.size() != o.size())
            throw ShapeError("polyak update: parameter " + target[k].name + " differs in size");
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = (1.0 - tau) * t[i] + tau * o[i];
    }
}

} // namespace plnav::rl
