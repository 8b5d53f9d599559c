#include "plnav/rl/curriculum.hpp"

#include <cstdio>
#include <deque>
#include <fstream>
#include <memory>
#include <ostream>

#include "plnav/config.hpp"
#include "plnav/error.hpp"
#include "plnav/nn/adam.hpp"
#include "plnav/nn/checkpoint.hpp"
#include "plnav/rl/advantages.hpp"
#include "plnav/rl/ppo.hpp"
#include "plnav/rl/rollout.hpp"

namespace plnav::rl {

namespace {

constexpr const char* kLogHeader = "step,stage,mean_reward,success_rate,kl,policy_loss,value_loss,entropy,episodes";

std::string format_row(long long step, const std::string& stage, double mean_reward, double success, const UpdateStats& u,
                       std::size_t episodes)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%lld,%s,%.6f,%.4f,%.8f,%.6f,%.6f,%.6f,%zu", step, stage.c_str(), mean_reward,
                  success, u.kl_after, u.policy_loss, u.value_loss, u.entropy, episodes);
    return buf;
}

void write_manifest(const TrainConfig& config, std::uint64_t hash, const std::filesystem::path& path)
{
    nlohmann::json m;
    m["config"] = to_json(config);
    m["config_hash"] = hash_hex(hash);
    m["parameter_count"] = config.policy.parameter_count();
    m["checkpoint_version"] = nn::kCheckpointVersion;
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << m.dump(2) << '\n';
}

} // namespace

TrainResult train_curriculum(const TrainConfig& config, const std::filesystem::path& out_dir,
                             const TrainOptions& options)
{
    config.validate();
    if (config.stages.empty())
        throw UsageError("training config lists no stages");
    std::filesystem::create_directories(out_dir);

    TrainResult result;
    result.config_hash = config_hash(config);
    const PPOConfig& ppo = config.ppo;

    nn::PolicyNet net(config.policy, derive_seed(config.seed, 0));
    nn::Adam optimizer(net.params(), {ppo.learning_rate, ppo.adam_beta1, ppo.adam_beta2, ppo.adam_epsilon});
    std::size_t first_stage = 0;
    long long global_step = 0;
    if (options.resume) {
        const nn::Checkpoint ckpt = nn::load_checkpoint(*options.resume);
        if (ckpt.config_hash != result.config_hash)
            throw UsageError("cannot resume: checkpoint config hash " + hash_hex(ckpt.config_hash) +
                             " differs from " + hash_hex(result.config_hash));
        net = nn::restore_policy(ckpt);
        nn::restore_optimizer(ckpt, optimizer);
        first_stage = static_cast<std::size_t>(ckpt.meta("stage_index", -1.0) + 1.0);
        global_step = static_cast<long long>(ckpt.meta("global_step", 0.0));
    }
    std::optional<nn::PolicyNet> target;
    if (ppo.target_network)
        target = net;

    write_manifest(config, result.config_hash, out_dir / "manifest.json");
    const std::filesystem::path log_path = out_dir / "train_log.csv";
    std::ofstream log(log_path, options.resume ? std::ios::app : std::ios::trunc);
    if (!log)
        throw IoError("cannot write " + log_path.string());
    if (!options.resume)
        log << kLogHeader << '\n';

    for (std::size_t s = first_stage; s < config.stages.size(); ++s) {
        const StageConfig& stage = config.stages[s];
        std::vector<std::shared_ptr<const Scenario>> scenes;
        for (const auto& path : stage.scenes)
            scenes.push_back(std::make_shared<const Scenario>(load_scenario(path)));

        CollectorConfig cc{config.num_envs, config.env, config.sensing, config.sensing.augments_training(), config.noise};
        RolloutCollector collector(scenes, cc, derive_seed(config.seed, 100 + s));
        Rng update_rng(derive_seed(config.seed, 200 + s));
        std::deque<EpisodeStat> window;

        StageResult sr;
        sr.id = stage.id;
        while (sr.steps < stage.budget) {
            const int n = static_cast<int>(std::min<long long>(ppo.batch_size, stage.budget - sr.steps));
            RolloutBuffer buffer = collector.collect(net, n, ppo.unroll);
            sr.steps += n;
            global_step += n;
            for (const EpisodeStat& e : collector.take_finished()) {
                window.push_back(e);
                if (window.size() > static_cast<std::size_t>(config.success_window))
                    window.pop_front();
            }

            if (target)
                recompute_values(*target, buffer);
            compute_advantages(buffer, ppo.gamma, ppo.gae_lambda);
            if (ppo.lr_anneal)
                optimizer.set_learning_rate(ppo.learning_rate * (1.0 - static_cast<double>(sr.steps - n) /
                                                                           static_cast<double>(stage.budget)));
            const UpdateStats stats = ppo_update(net, optimizer, buffer, ppo, update_rng);
            if (target)
                polyak_update(target->params(), net.params(), ppo.target_tau);

            double successes = 0.0, reward = 0.0;
            for (const EpisodeStat& e : window) {
                successes += e.status == AgentStatus::Arrived;
                reward += e.total_reward;
            }
            const double count = static_cast<double>(window.size());
            sr.success_rate = window.empty() ? 0.0 : successes / count;
            sr.mean_reward = window.empty() ? 0.0 : reward / count;
            const std::string row = format_row(global_step, stage.id, sr.mean_reward, sr.success_rate, stats, window.size());
            log << row << '\n';
            log.flush();
            if (options.progress)
                *options.progress << row << '\n';

            if (window.size() >= static_cast<std::size_t>(config.success_window) && sr.success_rate >= stage.threshold) {
                sr.reached_threshold = true;
                break;
            }
        }
        if (!sr.reached_threshold && options.progress)
            *options.progress << "warning: stage " << stage.id << " spent its budget of " << stage.budget
                              << " steps at success rate " << sr.success_rate << " (threshold " << stage.threshold
                              << "); advancing\n";

        nn::Checkpoint ckpt = nn::make_checkpoint(net, result.config_hash, &optimizer);
        ckpt.set_meta("stage_index", static_cast<double>(s));
        ckpt.set_meta("global_step", static_cast<double>(global_step));
        sr.checkpoint = out_dir / ("stage_" + stage.id + ".ckpt");
        nn::save_checkpoint(sr.checkpoint, ckpt);
        result.stages.push_back(std::move(sr));
    }
    return result;
}

} // namespace plnav::rl
