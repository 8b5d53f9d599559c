#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "plnav/world.hpp"

namespace plnav {

/// Physical velocity command.
struct Velocity {
    double v = 0.0; ///< m/s, [0, 1]
    double w = 0.0; ///< rad/s, [-pi/2, pi/2]

    bool operator==(const Velocity&) const = default;
};

/// Normalized policy output in [-1,1]^2 together with its physical meaning.
struct Action {
    std::array<double, 2> normalized{0.0, 0.0};
    Velocity physical;

    static Action from_normalized(double a1, double a2);
};

/// v = (a1+1)/2 * 1 m/s, w = a2 * pi/2 rad/s, inputs clamped to [-1,1].
Velocity denormalize(double a1, double a2) noexcept;

/// Exact unicycle update over dt; heading wrapped to (-pi, pi].
Pose integrate(const Pose& pose, double v, double w, double dt) noexcept;

struct RewardConfig {
    double r_arrival = 15.0;
    double w_goal = 2.5;
    double r_collision = -15.0;
    double w_rotation = -0.1;
    double goal_radius = 0.1;
    double rotation_threshold = 0.7;
};

/// r_arrival inside goal_radius, otherwise w_goal times the progress toward g.
double reward_goal(Vec2 p_prev, Vec2 p_cur, Vec2 goal, const RewardConfig& cfg) noexcept;

/// w_rotation*|w| above the rotation threshold, else 0.
double reward_rotational(double w, const RewardConfig& cfg) noexcept;

enum class CollisionKind { None, Agent, Obstacle, Hazard, OutOfBounds };

std::string_view to_string(CollisionKind kind) noexcept;

/// Geometry shared by the collision predicate.
struct BodyModel {
    double height = 0.84; ///< robot body cylinder height
};

/// First collision found for the body at `position` with radius `radius`.
/// Other agents collide below (R_i + R_j) centre distance (2R for equal radii); obstacles
/// collide when the footprint distance is below R and their z-interval reaches into the body.
CollisionKind detect_collision(Vec2 position, double radius, std::span<const Vec2> other_positions,
                               std::span<const double> other_radii, const Scenario& scenario,
                               const BodyModel& body) noexcept;

double reward_collision(Vec2 position, double radius, std::span<const Vec2> other_positions,
                        std::span<const double> other_radii, const Scenario& scenario, const BodyModel& body,
                        const RewardConfig& cfg) noexcept;

enum class AgentStatus { Running, Arrived, Collided, TimedOut };

std::string_view to_string(AgentStatus status) noexcept;
inline bool is_terminal(AgentStatus s) noexcept { return s != AgentStatus::Running; }

struct EnvConfig {
    double dt = 0.1;
    int max_steps = 150;
    RewardConfig reward;
    BodyModel body;
    bool randomize = true; ///< sample start/goal on reset instead of using the scenario's agents
    SampleOptions sampling;
};

struct AgentState {
    Agent agent;
    AgentStatus status = AgentStatus::Running;
    std::size_t next_waypoint = 0;
    int arrival_step = -1; ///< step count at which the agent arrived
};

struct RewardTerms {
    double goal = 0.0;
    double collision = 0.0;
    double rotational = 0.0;

    double total() const noexcept { return goal + collision + rotational; }
};

struct StepOutcome {
    std::vector<double> rewards;       ///< per agent; 0 for agents already terminated
    std::vector<RewardTerms> terms;    ///< per agent reward decomposition
    std::vector<AgentStatus> statuses; ///< per agent after the step
    std::vector<CollisionKind> collisions;
    std::vector<bool> acted;           ///< agents that were live during this step
};

/// Multi-agent POMDP environment. Single owner; the scenario is shared read-only.
class Environment {
public:
    Environment(std::shared_ptr<const Scenario> scenario, EnvConfig config);

    /// Places every agent (sampled or as declared) and clears counters.
    void reset(Rng& rng);

    /// One entry per agent: an action for each live agent, nullopt for terminated ones.
    StepOutcome step(std::span<const std::optional<Action>> actions);

    const Scenario& scenario() const noexcept { return *scenario_; }
    const std::shared_ptr<const Scenario>& scenario_ptr() const noexcept { return scenario_; }
    const EnvConfig& config() const noexcept { return config_; }
    const std::vector<AgentState>& agents() const noexcept { return agents_; }
    std::size_t agent_count() const noexcept { return agents_.size(); }
    int step_count() const noexcept { return steps_; }
    double time() const noexcept { return steps_ * config_.dt; }
    bool done() const noexcept;

    /// Current goal (active waypoint if the agent follows a circuit).
    Vec2 current_goal(std::size_t agent) const;

    /// Other live agents as prisms for the sensors.
    std::vector<Obstacle> agent_obstacles(std::size_t viewer) const;

    /// Overrides placement (tests and scripted evaluations).
    void set_agent(std::size_t index, const Agent& agent);

private:
    std::shared_ptr<const Scenario> scenario_;
    EnvConfig config_;
    std::vector<AgentState> agents_;
    int steps_ = 0;
};

} // namespace plnav
