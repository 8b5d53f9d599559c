#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plnav/env.hpp"
#include "plnav/nn/policy.hpp"
#include "plnav/sensing.hpp"
#include "plnav/trajectory.hpp"

namespace plnav {

/// Maps observations of the live agents of one episode to actions.
class Controller {
public:
    virtual ~Controller() = default;
    virtual std::string name() const = 0;
    /// Starts an episode with `agents` agents.
    virtual void reset(std::size_t agents) = 0;
    /// `agents[k]` is the index of the agent that produced `observations[k]`.
    virtual std::vector<Action> act(std::span<const std::size_t> agents, std::span<const Observation> observations,
                                    Rng& rng) = 0;
    /// Independent copy for parallel trials.
    virtual std::unique_ptr<Controller> clone() const = 0;
    /// Scan width the controller expects, if it depends on one.
    virtual std::optional<int> scan_width() const { return std::nullopt; }
};

/// Deterministic policy: the clamped Gaussian mean, hidden state carried per agent.
class PolicyController final : public Controller {
public:
    PolicyController(std::shared_ptr<const nn::PolicyNet> net, std::string name = "policy");
    std::string name() const override { return name_; }
    void reset(std::size_t agents) override;
    std::vector<Action> act(std::span<const std::size_t> agents, std::span<const Observation> observations,
                            Rng& rng) override;
    std::unique_ptr<Controller> clone() const override;
    std::optional<int> scan_width() const override { return net_->config().scan_width; }

private:
    std::shared_ptr<const nn::PolicyNet> net_;
    std::string name_;
    std::vector<nn::HiddenState> hidden_;
};

enum class ScriptedKind { GoStraight, Zero, Random };

/// Full speed straight ahead, standing still, or uniform random actions.
class ScriptedController final : public Controller {
public:
    explicit ScriptedController(ScriptedKind kind) : kind_(kind) {}
    std::string name() const override;
    void reset(std::size_t) override {}
    std::vector<Action> act(std::span<const std::size_t> agents, std::span<const Observation> observations,
                            Rng& rng) override;
    std::unique_ptr<Controller> clone() const override { return std::make_unique<ScriptedController>(kind_); }

private:
    ScriptedKind kind_;
};

struct EvalOptions {
    EnvConfig env;
    SensingModel sensing;
    int threads = 0;              ///< 0 = worker_count()
    bool record_trajectories = false;
};

struct EvalReport {
    std::string model;
    std::string scene;
    int trials = 0;
    int successes = 0;
    double success_rate = 0.0;
    double avg_time_s = 0.0; ///< over successful trials only; 0 when none
    int collisions = 0;
    int timeouts = 0;
    double mean_reward = 0.0; ///< per agent-episode
    TrajectoryLog trajectories;
};

/// Worker threads allowed: hardware concurrency, capped by PLNAV_THREADS when set.
int worker_count();

/// Runs `trials` episodes, trial k seeded with derive_seed(seed, k). A trial succeeds when
/// every agent arrives; it is a collision if any agent collides and a timeout otherwise.
/// Its time is the step count at the last arrival times dt.
EvalReport evaluate(const Controller& controller, std::shared_ptr<const Scenario> scenario, std::string scene_id,
                    int trials, std::uint64_t seed, const EvalOptions& options);

struct AblationModel {
    std::string id;
    SensingVariant variant = SensingVariant::DepthPoolSem;
    std::filesystem::path checkpoint;
};

struct AblationRow {
    std::string model;
    std::string scene;
    bool absent = false; ///< checkpoint missing or unreadable
    std::string reason;
    EvalReport report;
};

/// Cross product of models and scenes. Unavailable checkpoints give absent rows.
std::vector<AblationRow> run_ablation(std::span<const AblationModel> models,
                                      std::span<const std::filesystem::path> scenes, int trials, std::uint64_t seed,
                                      const EvalOptions& options, std::ostream* warnings = nullptr);

inline constexpr const char* kReportCsvHeader = "model,scene,trials,success_rate,avg_time_s,collisions,timeouts";

std::string report_csv_row(const EvalReport& r);
void write_report_csv(std::ostream& out, std::span<const EvalReport> reports);
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);
/// Models as rows, scenes as columns, cells "success% / time s".
void write_ablation_table(std::ostream& out, std::span<const AblationRow> rows);

} // namespace plnav
