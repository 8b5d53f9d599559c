#include "plnav/env.hpp"

#include <algorithm>
#include <cmath>

#include "plnav/error.hpp"

namespace plnav {

Velocity denormalize(double a1, double a2) noexcept
{
    a1 = std::clamp(a1, -1.0, 1.0);
    a2 = std::clamp(a2, -1.0, 1.0);
    return {(a1 + 1.0) / 2.0 * 1.0, a2 * std::numbers::pi / 2.0};
}

Action Action::from_normalized(double a1, double a2)
{
    Action a;
    a.normalized = {std::clamp(a1, -1.0, 1.0), std::clamp(a2, -1.0, 1.0)};
    a.physical = denormalize(a1, a2);
    return a;
}

Pose integrate(const Pose& pose, double v, double w, double dt) noexcept
{
    constexpr double kStraight = 1e-9;
    const double theta = pose.heading;
    Pose out = pose;
    if (std::abs(w) < kStraight) {
        out.position += Vec2{std::cos(theta), std::sin(theta)} * (v * dt);
    } else {
        const double turned = theta + w * dt;
        const double radius = v / w;
        out.position += Vec2{radius * (std::sin(turned) - std::sin(theta)), -radius * (std::cos(turned) - std::cos(theta))};
        out.heading = turned;
    }
    out.heading = wrap_angle(out.heading);
    return out;
}

double reward_goal(Vec2 p_prev, Vec2 p_cur, Vec2 goal, const RewardConfig& cfg) noexcept
{
    const double d_cur = distance(p_cur, goal);
    if (d_cur < cfg.goal_radius)
        return cfg.r_arrival;
    return cfg.w_goal * (distance(p_prev, goal) - d_cur);
}

double reward_rotational(double w, const RewardConfig& cfg) noexcept
{
    return std::abs(w) > cfg.rotation_threshold ? cfg.w_rotation * std::abs(w) : 0.0;
}

std::string_view to_string(CollisionKind kind) noexcept
{
    switch (kind) {
    case CollisionKind::None: return "none";
    case CollisionKind::Agent: return "agent";
    case CollisionKind::Obstacle: return "obstacle";
    case CollisionKind::Hazard: return "hazard";
    case CollisionKind::OutOfBounds: return "out-of-bounds";
    }
    return "none";
}

std::string_view to_string(AgentStatus status) noexcept
{
    switch (status) {
    case AgentStatus::Running: return "running";
    case AgentStatus::Arrived: return "arrived";
    case AgentStatus::Collided: return "collided";
    case AgentStatus::TimedOut: return "timed-out";
    }
    return "running";
}

CollisionKind detect_collision(Vec2 position, double radius, std::span<const Vec2> other_positions,
                               std::span<const double> other_radii, const Scenario& scenario,
                               const BodyModel& body) noexcept
{
    for (std::size_t j = 0; j < other_positions.size(); ++j) {
        const double other_r = j < other_radii.size() ? other_radii[j] : radius;
        if (distance(position, other_positions[j]) < radius + other_r)
            return CollisionKind::Agent;
    }
    for (const Obstacle& o : scenario.obstacles) {
        if (o.z_lo > body.height)
            continue; // overhang above the robot
        if (distance_to_convex(o.footprint, position) < radius)
            return CollisionKind::Obstacle;
    }
    if (point_in_hazard(position, scenario))
        return CollisionKind::Hazard;
    if (!scenario.bounds.contains(position))
        return CollisionKind::OutOfBounds;
    return CollisionKind::None;
}

double reward_collision(Vec2 position, double radius, std::span<const Vec2> other_positions,
                        std::span<const double> other_radii, const Scenario& scenario, const BodyModel& body,
                        const RewardConfig& cfg) noexcept
{
    return detect_collision(position, radius, other_positions, other_radii, scenario, body) == CollisionKind::None
               ? 0.0
               : cfg.r_collision;
}

Environment::Environment(std::shared_ptr<const Scenario> scenario, EnvConfig config)
    : scenario_(std::move(scenario)), config_(config)
{
    if (!scenario_)
        throw UsageError("environment needs a scenario");
    if (scenario_->agents.empty())
        throw UsageError("scenario declares no agents");
    if (!(config_.dt > 0.0))
        throw UsageError("dt must be positive");
    agents_.resize(scenario_->agents.size());
    for (std::size_t i = 0; i < agents_.size(); ++i)
        agents_[i].agent = scenario_->agents[i];
}

bool Environment::done() const noexcept
{
    return std::all_of(agents_.begin(), agents_.end(), [](const AgentState& a) { return is_terminal(a.status); });
}

Vec2 Environment::current_goal(std::size_t agent) const
{
    return agents_.at(agent).agent.goal;
}

void Environment::set_agent(std::size_t index, const Agent& agent)
{
    agents_.at(index).agent = agent;
}

void Environment::reset(Rng& rng)
{
    steps_ = 0;
    const Scenario& s = *scenario_;
    std::vector<Vec2> starts;
    std::vector<Vec2> goals;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        AgentState& st = agents_[i];
        st = AgentState{};
        st.agent = s.agents[i];
        if (config_.randomize) {
            SampleOptions opts = config_.sampling;
            opts.radius = std::max(opts.radius, st.agent.radius);
            const StartGoal sg = sample_start_goal(s, rng, opts, starts, goals);
            st.agent.position = sg.start.position;
            st.agent.heading = sg.start.heading;
            st.agent.goal = sg.goal;
        }
        if (i < s.waypoints.size() && !s.waypoints[i].empty())
            st.agent.goal = s.waypoints[i].front();
        st.agent.v = 0.0;
        st.agent.w = 0.0;
        starts.push_back(st.agent.position);
        goals.push_back(st.agent.goal);
    }
}

std::vector<Obstacle> Environment::agent_obstacles(std::size_t viewer) const
{
    std::vector<Obstacle> out;
    for (std::size_t j = 0; j < agents_.size(); ++j) {
        if (j == viewer || is_terminal(agents_[j].status))
            continue;
        out.push_back({disc_polygon(agents_[j].agent.position, agents_[j].agent.radius, 8), 0.0, config_.body.height});
    }
    return out;
}

StepOutcome Environment::step(std::span<const std::optional<Action>> actions)
{
    const std::size_t n = agents_.size();
    if (actions.size() != n)
        throw UsageError("step expects one action slot per agent");
    for (std::size_t i = 0; i < n; ++i) {
        const bool live = !is_terminal(agents_[i].status);
        if (live && !actions[i])
            throw UsageError("missing action for live agent #" + std::to_string(i));
        if (!live && actions[i])
            throw UsageError("agent #" + std::to_string(i) + " has terminated and cannot act");
    }
    if (done())
        throw UsageError("episode is over; call reset");

    StepOutcome out;
    out.rewards.assign(n, 0.0);
    out.terms.assign(n, {});
    out.collisions.assign(n, CollisionKind::None);
    out.acted.assign(n, false);

    std::vector<Vec2> previous(n);
    for (std::size_t i = 0; i < n; ++i) {
        AgentState& st = agents_[i];
        previous[i] = st.agent.position;
        if (is_terminal(st.status))
            continue;
        out.acted[i] = true;
        const Velocity vel = actions[i]->physical;
        const Pose next = integrate(st.agent.pose(), vel.v, vel.w, config_.dt);
        st.agent.position = next.position;
        st.agent.heading = next.heading;
        st.agent.v = vel.v;
        st.agent.w = vel.w;
    }
    ++steps_;

    // Collisions are resolved after every agent has moved.
    const RewardConfig& rc = config_.reward;
    std::vector<AgentStatus> next_status(n);
    for (std::size_t i = 0; i < n; ++i) {
        next_status[i] = agents_[i].status;
        if (!out.acted[i])
            continue;
        std::vector<Vec2> others;
        std::vector<double> radii;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !out.acted[j])
                continue;
            others.push_back(agents_[j].agent.position);
            radii.push_back(agents_[j].agent.radius);
        }
        const AgentState& st = agents_[i];
        const Vec2 goal = st.agent.goal;
        RewardTerms terms;
        terms.goal = reward_goal(previous[i], st.agent.position, goal, rc);
        out.collisions[i] =
            detect_collision(st.agent.position, st.agent.radius, others, radii, *scenario_, config_.body);
        terms.collision = out.collisions[i] == CollisionKind::None ? 0.0 : rc.r_collision;
        terms.rotational = reward_rotational(st.agent.w, rc);
        out.terms[i] = terms;
        out.rewards[i] = terms.goal + terms.collision + terms.rotational;

        if (out.collisions[i] != CollisionKind::None) {
            next_status[i] = AgentStatus::Collided;
        } else if (distance(st.agent.position, goal) < rc.goal_radius) {
            const auto& circuit = i < scenario_->waypoints.size() ? scenario_->waypoints[i] : std::vector<Vec2>{};
            if (!circuit.empty() && st.next_waypoint + 1 < circuit.size()) {
                agents_[i].next_waypoint += 1;
                agents_[i].agent.goal = circuit[agents_[i].next_waypoint];
            } else {
                next_status[i] = AgentStatus::Arrived;
                agents_[i].arrival_step = steps_;
            }
        } else if (steps_ >= config_.max_steps) {
            next_status[i] = AgentStatus::TimedOut;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        agents_[i].status = next_status[i];
    for (const AgentState& st : agents_)
        out.statuses.push_back(st.status);
    return out;
}

} // namespace plnav
