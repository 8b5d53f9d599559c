#include "plnav/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <thread>

#include "plnav/error.hpp"
#include "plnav/nn/checkpoint.hpp"
#include "plnav/nn/distributions.hpp"

namespace plnav {

PolicyController::PolicyController(std::shared_ptr<const nn::PolicyNet> net, std::string name)
    : net_(std::move(net)), name_(std::move(name))
{
    if (!net_)
        throw UsageError("policy controller needs a network");
}

void PolicyController::reset(std::size_t agents)
{
    hidden_.assign(agents, nn::HiddenState::zeros(net_->config().hidden_dim));
}

std::vector<Action> PolicyController::act(std::span<const std::size_t> agents, std::span<const Observation> observations,
                                          Rng&)
{
    const int n = static_cast<int>(agents.size());
    std::vector<Action> actions;
    if (n == 0)
        return actions;
    nn::PolicyBatch batch(net_->config(), 1, n);
    for (int b = 0; b < n; ++b) {
        batch.set_observation(0, b, observations[static_cast<std::size_t>(b)]);
        batch.set_hidden(b, hidden_.at(agents[static_cast<std::size_t>(b)]));
    }
    const nn::PolicyOutput out = net_->forward(batch);
    for (int b = 0; b < n; ++b) {
        nn::HiddenState& h = hidden_[agents[static_cast<std::size_t>(b)]];
        h.h = out.h_last.col(b);
        h.c = out.c_last.col(b);
        actions.push_back(nn::mean_action({out.mean(0, b), out.mean(1, b)}));
    }
    return actions;
}

std::unique_ptr<Controller> PolicyController::clone() const
{
    return std::make_unique<PolicyController>(net_, name_);
}

std::string ScriptedController::name() const
{
    switch (kind_) {
    case ScriptedKind::GoStraight: return "go-straight";
    case ScriptedKind::Zero: return "zero";
    case ScriptedKind::Random: return "random";
    }
    return "scripted";
}

std::vector<Action> ScriptedController::act(std::span<const std::size_t> agents, std::span<const Observation>, Rng& rng)
{
    std::vector<Action> actions;
    for (std::size_t k = 0; k < agents.size(); ++k) {
        switch (kind_) {
        case ScriptedKind::GoStraight: actions.push_back(Action::from_normalized(1.0, 0.0)); break;
        case ScriptedKind::Zero: actions.push_back(Action::from_normalized(-1.0, 0.0)); break;
        case ScriptedKind::Random: {
            const double a1 = uniform(rng, -1.0, 1.0);
            const double a2 = uniform(rng, -1.0, 1.0);
            actions.push_back(Action::from_normalized(a1, a2));
            break;
        }
        }
    }
    return actions;
}

int worker_count()
{
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("PLNAV_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0)
            n = std::min(n, cap);
    }
    return n;
}

namespace {

struct TrialResult {
    bool success = false;
    bool collision = false;
    double time = 0.0;
    double reward = 0.0;
    int agent_episodes = 0;
    std::vector<TrajectoryRow> rows;
};

TrialResult run_trial(Controller& controller, const std::shared_ptr<const Scenario>& scenario, int trial,
                      std::uint64_t seed, const EvalOptions& options)
{
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
    Environment env(scenario, options.env);
    env.reset(rng);
    const std::size_t n = env.agent_count();
    controller.reset(n);
    std::vector<ScanHistory> histories(n);

    TrialResult r;
    std::vector<std::size_t> live;
    std::vector<Observation> observations;
    while (!env.done()) {
        live.clear();
        observations.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const AgentState& st = env.agents()[i];
            if (st.status != AgentStatus::Running)
                continue;
            const Pose pose = st.agent.pose();
            histories[i].push(perceive(options.sensing, *scenario, pose, env.agent_obstacles(i)));
            observations.push_back(build_observation(histories[i].stacked(),
                                                     goal_in_robot_frame(pose, env.current_goal(i)), st.agent.v,
                                                     st.agent.w));
            live.push_back(i);
        }
        const std::vector<Action> chosen = controller.act(live, observations, rng);
        if (chosen.size() != live.size())
            throw InvariantError("controller returned " + std::to_string(chosen.size()) + " actions for " +
                                 std::to_string(live.size()) + " agents");
        std::vector<std::optional<Action>> actions(n);
        for (std::size_t k = 0; k < live.size(); ++k)
            actions[live[k]] = chosen[k];
        const StepOutcome outcome = env.step(actions);
        for (std::size_t i = 0; i < n; ++i) {
            if (!outcome.acted[i])
                continue;
            r.reward += outcome.rewards[i];
            if (options.record_trajectories) {
                const AgentState& st = env.agents()[i];
                r.rows.push_back(TrajectoryRow{trial, static_cast<int>(i), env.step_count(), env.time(),
                                               st.agent.pose(), actions[i]->normalized, outcome.rewards[i],
                                               outcome.statuses[i]});
            }
        }
    }

    r.success = true;
    int last_arrival = 0;
    for (const AgentState& st : env.agents()) {
        r.success = r.success && st.status == AgentStatus::Arrived;
        r.collision = r.collision || st.status == AgentStatus::Collided;
        last_arrival = std::max(last_arrival, st.arrival_step);
    }
    r.time = r.success ? last_arrival * options.env.dt : 0.0;
    r.agent_episodes = static_cast<int>(n);
    return r;
}

} // namespace

EvalReport evaluate(const Controller& controller, std::shared_ptr<const Scenario> scenario, std::string scene_id,
                    int trials, std::uint64_t seed, const EvalOptions& options)
{
    if (trials < 1)
        throw UsageError("evaluate: trials must be positive");
    if (!scenario || scenario->agents.empty())
        throw UsageError("evaluate: scene " + scene_id + " declares no agents");
    if (const auto width = controller.scan_width(); width && *width != options.sensing.width())
        throw ShapeError("evaluate: controller expects scans of width " + std::to_string(*width) +
                         " but the sensing model produces " + std::to_string(options.sensing.width()));

    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    const int threads = std::clamp(options.threads > 0 ? options.threads : worker_count(), 1, trials);
    auto work = [&](int worker) {
        const auto local = controller.clone();
        for (int k = worker; k < trials; k += threads)
            results[static_cast<std::size_t>(k)] = run_trial(*local, scenario, k, seed, options);
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(work, t);
    }

    EvalReport report;
    report.model = controller.name();
    report.scene = std::move(scene_id);
    report.trials = trials;
    double time_sum = 0.0;
    double reward_sum = 0.0;
    int agent_episodes = 0;
    for (auto& r : results) {
        if (r.success) {
            ++report.successes;
            time_sum += r.time;
        } else if (r.collision) {
            ++report.collisions;
        } else {
            ++report.timeouts;
        }
        reward_sum += r.reward;
        agent_episodes += r.agent_episodes;
        std::move(r.rows.begin(), r.rows.end(), std::back_inserter(report.trajectories.rows));
    }
    report.success_rate = static_cast<double>(report.successes) / trials;
    report.avg_time_s = report.successes ? time_sum / report.successes : 0.0;
    report.mean_reward = agent_episodes ? reward_sum / agent_episodes : 0.0;
    return report;
}

std::vector<AblationRow> run_ablation(std::span<const AblationModel> models,
                                      std::span<const std::filesystem::path> scenes, int trials, std::uint64_t seed,
                                      const EvalOptions& options, std::ostream* warnings)
{
    std::vector<std::pair<std::string, std::shared_ptr<const Scenario>>> loaded;
    for (const auto& path : scenes)
        loaded.emplace_back(path.stem().string(), std::make_shared<const Scenario>(load_scenario(path)));

    std::vector<AblationRow> rows;
    for (const AblationModel& model : models) {
        EvalOptions opts = options;
        opts.sensing.variant = model.variant;
        std::unique_ptr<PolicyController> controller;
        std::string reason;
        try {
            auto net = std::make_shared<const nn::PolicyNet>(nn::restore_policy(nn::load_checkpoint(model.checkpoint)));
            if (net->config().scan_width != opts.sensing.width())
                throw ShapeError("checkpoint scan width " + std::to_string(net->config().scan_width) +
                                 " does not match the sensor width " + std::to_string(opts.sensing.width()));
            controller = std::make_unique<PolicyController>(std::move(net), model.id);
        } catch (const Error& e) {
            reason = e.what();
            if (warnings)
                *warnings << "warning: model " << model.id << " marked absent: " << reason << '\n';
        }
        for (const auto& [scene_id, scenario] : loaded) {
            AblationRow row;
            row.model = model.id;
            row.scene = scene_id;
            if (!controller) {
                row.absent = true;
                row.reason = reason;
                row.report.model = model.id;
                row.report.scene = scene_id;
            } else {
                row.report = evaluate(*controller, scenario, scene_id, trials, seed, opts);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string report_csv_row(const EvalReport& r)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.4f,%.3f,%d,%d", r.model.c_str(), r.scene.c_str(), r.trials,
                  r.success_rate, r.avg_time_s, r.collisions, r.timeouts);
    return buf;
}

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports)
{
    out << kReportCsvHeader << '\n';
    for (const auto& r : reports)
        out << report_csv_row(r) << '\n';
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows)
{
    out << kReportCsvHeader << '\n';
    for (const auto& row : rows) {
        if (row.absent)
            out << row.model << ',' << row.scene << ",0,absent,,,\n";
        else
            out << report_csv_row(row.report) << '\n';
    }
}

void write_ablation_table(std::ostream& out, std::span<const AblationRow> rows)
{
    std::vector<std::string> models, scenes;
    for (const auto& row : rows) {
        if (std::find(models.begin(), models.end(), row.model) == models.end())
            models.push_back(row.model);
        if (std::find(scenes.begin(), scenes.end(), row.scene) == scenes.end())
            scenes.push_back(row.scene);
    }
    auto cell = [&](const std::string& m, const std::string& s) -> std::string {
        for (const auto& row : rows)
            if (row.model == m && row.scene == s) {
                if (row.absent)
                    return "absent";
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.0f%% / %.1fs", 100.0 * row.report.success_rate,
                              row.report.avg_time_s);
                return buf;
            }
        return "-";
    };

    std::size_t first = 5;
    for (const auto& m : models)
        first = std::max(first, m.size());
    std::vector<std::size_t> widths;
    for (const auto& s : scenes) {
        std::size_t w = s.size();
        for (const auto& m : models)
            w = std::max(w, cell(m, s).size());
        widths.push_back(w);
    }
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - std::min(w, s.size()), ' '); };

    out << pad("model", first);
    for (std::size_t k = 0; k < scenes.size(); ++k)
        out << " | " << pad(scenes[k], widths[k]);
    out << '\n' << std::string(first, '-');
    for (std::size_t w : widths)
        out << "-+-" << std::string(w, '-');
    out << '\n';
    for (const auto& m : models) {
        out << pad(m, first);
        for (std::size_t k = 0; k < scenes.size(); ++k)
            out << " | " << pad(cell(m, scenes[k]), widths[k]);
        out << '\n';
    }
}

} // namespace plnav
