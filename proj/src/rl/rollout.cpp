#include "plnav/rl/rollout.hpp"

#include <algorithm>

#include "plnav/error.hpp"
#include "plnav/nn/distributions.hpp"

namespace plnav::rl {

RolloutCollector::RolloutCollector(std::vector<std::shared_ptr<const Scenario>> scenes, CollectorConfig config,
                                   std::uint64_t seed)
    : config_(std::move(config))
{
    if (scenes.empty())
        throw UsageError("rollout collector needs at least one scene");
    if (config_.num_envs < 1)
        throw InvariantError("rollout collector needs at least one environment");
    config_.noise.validate();
    for (int k = 0; k < config_.num_envs; ++k) {
        const auto& scene = scenes[static_cast<std::size_t>(k) % scenes.size()];
        if (scene->agents.empty())
            throw InvariantError("training scene declares no agents");
        envs_.push_back(EnvSlot{Environment(scene, config_.env), Rng(derive_seed(seed, static_cast<std::uint64_t>(k))),
                                true, slots_.size()});
        for (std::size_t a = 0; a < scene->agents.size(); ++a) {
            AgentSlot slot;
            slot.env = static_cast<std::size_t>(k);
            slot.agent = a;
            slots_.push_back(std::move(slot));
        }
    }
    open_.resize(slots_.size());
}

std::vector<EpisodeStat> RolloutCollector::take_finished()
{
    std::vector<EpisodeStat> out;
    out.swap(finished_);
    return out;
}

void RolloutCollector::reset_env(std::size_t e)
{
    EnvSlot& es = envs_[e];
    es.env.reset(es.rng);
    es.needs_reset = false;
    for (std::size_t a = 0; a < es.env.agent_count(); ++a) {
        AgentSlot& slot = slots_[es.first_slot + a];
        slot.history.reset();
        slot.hidden = nn::HiddenState::zeros(hidden_dim_);
        slot.pending.reset();
        slot.episode_reward = 0.0;
        slot.episode_steps = 0;
    }
}

const Observation& RolloutCollector::observe(AgentSlot& slot)
{
    if (slot.pending)
        return *slot.pending;
    EnvSlot& es = envs_[slot.env];
    const Agent& agent = es.env.agents()[slot.agent].agent;
    const Pose pose = agent.pose();
    const auto others = es.env.agent_obstacles(slot.agent);
    PseudoLaser scan = perceive(config_.sensing, es.env.scenario(), pose, others);
    if (config_.augment)
        scan = augment(scan, config_.noise, es.rng);
    slot.history.push(std::move(scan));
    slot.pending = build_observation(slot.history.stacked(), goal_in_robot_frame(pose, es.env.current_goal(slot.agent)),
                                     agent.v, agent.w);
    return *slot.pending;
}

void RolloutCollector::append(std::size_t slot, int unroll, const Observation& obs, const nn::ActionVec& raw,
                              double log_prob, const nn::ActionVec& mean, const nn::ActionVec& log_std, double value,
                              bool bootstrap)
{
    RolloutBuffer& s = open_[slot];
    const std::size_t index = s.size();
    if (s.segments.empty() || s.segments.back().length() >= static_cast<std::size_t>(unroll))
        s.segments.push_back(Segment{index, index, slots_[slot].hidden});
    s.segments.back().end = index + 1;
    s.observations.push_back(obs);
    s.actions.push_back(raw);
    s.log_probs.push_back(log_prob);
    s.old_means.push_back(mean);
    s.old_log_stds.push_back(log_std);
    s.values.push_back(value);
    s.rewards.push_back(0.0);
    s.terminals.push_back(0);
    s.bootstrap_only.push_back(bootstrap ? 1 : 0);
}

void RolloutCollector::close_stream(std::size_t slot, RolloutBuffer& out)
{
    RolloutBuffer& s = open_[slot];
    if (s.size() == 0)
        return;
    const std::size_t offset = out.size();
    auto move_into = [](auto& dst, auto& src) { dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end())); };
    move_into(out.observations, s.observations);
    move_into(out.actions, s.actions);
    move_into(out.log_probs, s.log_probs);
    move_into(out.old_means, s.old_means);
    move_into(out.old_log_stds, s.old_log_stds);
    move_into(out.values, s.values);
    move_into(out.rewards, s.rewards);
    move_into(out.terminals, s.terminals);
    move_into(out.bootstrap_only, s.bootstrap_only);
    for (Segment& seg : s.segments) {
        seg.begin += offset;
        seg.end += offset;
        out.segments.push_back(std::move(seg));
    }
    out.streams.push_back(Stream{offset, out.size()});
    s = RolloutBuffer{};
}

namespace {

nn::ActionVec column(const nn::Matrix& m, Eigen::Index col) { return {m(0, col), m(1, col)}; }

} // namespace

RolloutBuffer RolloutCollector::collect(const nn::PolicyNet& net, int transitions, int unroll)
{
    if (transitions < 1 || unroll < 1)
        throw InvariantError("collect: transitions and unroll must be positive");
    const nn::PolicyConfig& pc = net.config();
    if (pc.scan_width != config_.sensing.width())
        throw ShapeError("collect: policy scan width " + std::to_string(pc.scan_width) + " differs from sensor width " +
                         std::to_string(config_.sensing.width()));
    if (hidden_dim_ != pc.hidden_dim) {
        hidden_dim_ = pc.hidden_dim;
        for (AgentSlot& slot : slots_)
            slot.hidden = nn::HiddenState::zeros(hidden_dim_);
    }

    RolloutBuffer out;
    int count = 0;
    std::vector<std::size_t> live;
    std::vector<char> recorded(slots_.size());
    while (count < transitions) {
        for (std::size_t e = 0; e < envs_.size(); ++e)
            if (envs_[e].needs_reset || envs_[e].env.done())
                reset_env(e);

        live.clear();
        for (std::size_t si = 0; si < slots_.size(); ++si)
            if (envs_[slots_[si].env].env.agents()[slots_[si].agent].status == AgentStatus::Running)
                live.push_back(si);

        nn::PolicyBatch batch(pc, 1, static_cast<int>(live.size()));
        for (std::size_t b = 0; b < live.size(); ++b) {
            batch.set_observation(0, static_cast<int>(b), observe(slots_[live[b]]));
            batch.set_hidden(static_cast<int>(b), slots_[live[b]].hidden);
        }
        const nn::PolicyOutput po = net.forward(batch);
        const nn::ActionVec log_std{po.log_std(0), po.log_std(1)};

        const std::size_t remaining = static_cast<std::size_t>(transitions - count);
        std::vector<std::vector<std::optional<Action>>> actions(envs_.size());
        for (std::size_t e = 0; e < envs_.size(); ++e)
            actions[e].assign(envs_[e].env.agent_count(), std::nullopt);
        std::fill(recorded.begin(), recorded.end(), 0);

        for (std::size_t b = 0; b < live.size(); ++b) {
            const std::size_t si = live[b];
            AgentSlot& slot = slots_[si];
            const auto col = static_cast<Eigen::Index>(b);
            const nn::ActionVec mean = column(po.mean, col);
            const double value = po.value(0, col);
            const nn::SampledAction s = nn::sample_action(mean, log_std, envs_[slot.env].rng);
            actions[slot.env][slot.agent] = s.action;
            if (b < remaining) {
                append(si, unroll, *slot.pending, s.raw, s.log_prob, mean, log_std, value, false);
                recorded[si] = 1;
            } else if (open_[si].size() > 0) {
                // Over budget: this state only bootstraps the stream collected so far.
                append(si, unroll, *slot.pending, {0.0, 0.0}, 0.0, mean, log_std, value, true);
                close_stream(si, out);
            }
            slot.hidden.h = po.h_last.col(col);
            slot.hidden.c = po.c_last.col(col);
            slot.pending.reset();
        }

        for (std::size_t e = 0; e < envs_.size(); ++e) {
            EnvSlot& es = envs_[e];
            const StepOutcome outcome = es.env.step(actions[e]);
            for (std::size_t a = 0; a < es.env.agent_count(); ++a) {
                if (!outcome.acted[a])
                    continue;
                const std::size_t si = es.first_slot + a;
                AgentSlot& slot = slots_[si];
                const bool terminal = is_terminal(outcome.statuses[a]);
                slot.episode_reward += outcome.rewards[a];
                slot.episode_steps += 1;
                if (recorded[si]) {
                    open_[si].rewards.back() = outcome.rewards[a];
                    open_[si].terminals.back() = terminal ? 1 : 0;
                }
                if (terminal) {
                    finished_.push_back(EpisodeStat{slot.episode_reward, outcome.statuses[a], slot.episode_steps});
                    close_stream(si, out);
                }
            }
        }
        const int added = static_cast<int>(std::min(live.size(), remaining));
        count += added;
        total_steps_ += added;
    }

    // Bootstrap every stream still open with the value of its current state.
    std::vector<std::size_t> open_slots;
    for (std::size_t si = 0; si < slots_.size(); ++si)
        if (open_[si].size() > 0)
            open_slots.push_back(si);
    if (!open_slots.empty()) {
        nn::PolicyBatch batch(pc, 1, static_cast<int>(open_slots.size()));
        for (std::size_t b = 0; b < open_slots.size(); ++b) {
            batch.set_observation(0, static_cast<int>(b), observe(slots_[open_slots[b]]));
            batch.set_hidden(static_cast<int>(b), slots_[open_slots[b]].hidden);
        }
        const nn::PolicyOutput po = net.forward(batch);
        const nn::ActionVec log_std{po.log_std(0), po.log_std(1)};
        for (std::size_t b = 0; b < open_slots.size(); ++b) {
            const auto col = static_cast<Eigen::Index>(b);
            append(open_slots[b], unroll, *slots_[open_slots[b]].pending, {0.0, 0.0}, 0.0, column(po.mean, col),
                   log_std, po.value(0, col), true);
            close_stream(open_slots[b], out);
        }
    }
    return out;
}

} // namespace plnav::rl
