#include "plnav/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "plnav/error.hpp"
#include "plnav/nn/checkpoint.hpp"

namespace plnav {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view what, std::initializer_list<std::string_view> allowed)
{
    if (!j.is_object())
        throw UsageError(std::string(what) + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (std::string_view a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw UsageError(std::string(what) + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config key '") + key + "': " + e.what());
    }
}

} // namespace

json to_json(const nn::PolicyConfig& c)
{
    return {{"scan_width", c.scan_width},
            {"conv1_filters", c.conv1_filters},
            {"conv1_kernel", c.conv1_kernel},
            {"conv1_stride", c.conv1_stride},
            {"conv2_filters", c.conv2_filters},
            {"conv2_kernel", c.conv2_kernel},
            {"conv2_stride", c.conv2_stride},
            {"attention_reduction", c.attention_reduction},
            {"attention_merge", c.attention_merge == nn::AttentionMerge::Max ? "max" : "add"},
            {"feature_dim", c.feature_dim},
            {"hidden_dim", c.hidden_dim},
            {"init_log_std", c.init_log_std}};
}

nn::PolicyConfig policy_config_from_json(const json& j)
{
    check_keys(j, "policy",
               {"scan_width", "conv1_filters", "conv1_kernel", "conv1_stride", "conv2_filters", "conv2_kernel",
                "conv2_stride", "attention_reduction", "attention_merge", "feature_dim", "hidden_dim", "init_log_std"});
    nn::PolicyConfig c;
    read(j, "scan_width", c.scan_width);
    read(j, "conv1_filters", c.conv1_filters);
    read(j, "conv1_kernel", c.conv1_kernel);
    read(j, "conv1_stride", c.conv1_stride);
    read(j, "conv2_filters", c.conv2_filters);
    read(j, "conv2_kernel", c.conv2_kernel);
    read(j, "conv2_stride", c.conv2_stride);
    read(j, "attention_reduction", c.attention_reduction);
    std::string merge = "add";
    read(j, "attention_merge", merge);
    if (merge != "add" && merge != "max")
        throw UsageError("policy.attention_merge must be 'add' or 'max'");
    c.attention_merge = merge == "max" ? nn::AttentionMerge::Max : nn::AttentionMerge::Add;
    read(j, "feature_dim", c.feature_dim);
    read(j, "hidden_dim", c.hidden_dim);
    read(j, "init_log_std", c.init_log_std);
    c.validate();
    return c;
}

json to_json(const rl::PPOConfig& c)
{
    return {{"batch_size", c.batch_size},     {"gamma", c.gamma},
            {"gae_lambda", c.gae_lambda},     {"learning_rate", c.learning_rate},
            {"unroll", c.unroll},             {"kl_coef", c.kl_coef},
            {"epochs", c.epochs},             {"minibatches", c.minibatches},
            {"value_coef", c.value_coef},     {"entropy_coef", c.entropy_coef},
            {"max_grad_norm", c.max_grad_norm}, {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},     {"adam_epsilon", c.adam_epsilon},
            {"normalize_advantages", c.normalize_advantages},
            {"target_network", c.target_network}, {"target_tau", c.target_tau}, {"lr_anneal", c.lr_anneal}};
}

rl::PPOConfig ppo_config_from_json(const json& j)
{
    check_keys(j, "ppo",
               {"batch_size", "gamma", "gae_lambda", "learning_rate", "unroll", "kl_coef", "epochs", "minibatches",
                "value_coef", "entropy_coef", "max_grad_norm", "adam_beta1", "adam_beta2", "adam_epsilon",
                "normalize_advantages", "target_network", "target_tau", "lr_anneal"});
    rl::PPOConfig c;
    read(j, "batch_size", c.batch_size);
    read(j, "gamma", c.gamma);
    read(j, "gae_lambda", c.gae_lambda);
    read(j, "learning_rate", c.learning_rate);
    read(j, "unroll", c.unroll);
    read(j, "kl_coef", c.kl_coef);
    read(j, "epochs", c.epochs);
    read(j, "minibatches", c.minibatches);
    read(j, "value_coef", c.value_coef);
    read(j, "entropy_coef", c.entropy_coef);
    read(j, "max_grad_norm", c.max_grad_norm);
    read(j, "adam_beta1", c.adam_beta1);
    read(j, "adam_beta2", c.adam_beta2);
    read(j, "adam_epsilon", c.adam_epsilon);
    read(j, "normalize_advantages", c.normalize_advantages);
    read(j, "target_network", c.target_network);
    read(j, "target_tau", c.target_tau);
    read(j, "lr_anneal", c.lr_anneal);
    c.validate();
    return c;
}

json to_json(const EnvConfig& c)
{
    const RewardConfig& r = c.reward;
    return {{"dt", c.dt},
            {"max_steps", c.max_steps},
            {"randomize", c.randomize},
            {"body_height", c.body.height},
            {"reward",
             {{"r_arrival", r.r_arrival},
              {"w_goal", r.w_goal},
              {"r_collision", r.r_collision},
              {"w_rotation", r.w_rotation},
              {"goal_radius", r.goal_radius},
              {"rotation_threshold", r.rotation_threshold}}},
            {"sampling",
             {{"radius", c.sampling.radius},
              {"min_separation", c.sampling.min_separation},
              {"max_attempts", c.sampling.max_attempts}}}};
}

EnvConfig env_config_from_json(const json& j)
{
    check_keys(j, "env", {"dt", "max_steps", "randomize", "body_height", "reward", "sampling"});
    EnvConfig c;
    read(j, "dt", c.dt);
    read(j, "max_steps", c.max_steps);
    read(j, "randomize", c.randomize);
    read(j, "body_height", c.body.height);
    if (j.contains("reward")) {
        const json& r = j.at("reward");
        check_keys(r, "env.reward",
                   {"r_arrival", "w_goal", "r_collision", "w_rotation", "goal_radius", "rotation_threshold"});
        read(r, "r_arrival", c.reward.r_arrival);
        read(r, "w_goal", c.reward.w_goal);
        read(r, "r_collision", c.reward.r_collision);
        read(r, "w_rotation", c.reward.w_rotation);
        read(r, "goal_radius", c.reward.goal_radius);
        read(r, "rotation_threshold", c.reward.rotation_threshold);
    }
    if (j.contains("sampling")) {
        const json& s = j.at("sampling");
        check_keys(s, "env.sampling", {"radius", "min_separation", "max_attempts"});
        read(s, "radius", c.sampling.radius);
        read(s, "min_separation", c.sampling.min_separation);
        read(s, "max_attempts", c.sampling.max_attempts);
    }
    if (!(c.dt > 0.0) || c.max_steps < 1 || !(c.body.height > 0.0))
        throw UsageError("env: dt, max_steps and body_height must be positive");
    return c;
}

json to_json(const SensingModel& c)
{
    const CameraModel& cam = c.camera;
    return {{"variant", std::string(to_string(c.variant))},
            {"camera",
             {{"hfov_deg", cam.hfov_deg},
              {"vfov_deg", cam.vfov_deg},
              {"height", cam.height},
              {"width", cam.width},
              {"mount_height", cam.mount_height},
              {"max_range", cam.max_range}}},
            {"bottom_laser_z", c.bottom_laser_z},
            {"top_laser_z", c.top_laser_z},
            {"slice_row", c.slice_row}};
}

SensingModel sensing_from_json(const json& j)
{
    check_keys(j, "sensing", {"variant", "camera", "bottom_laser_z", "top_laser_z", "slice_row"});
    SensingModel c;
    std::string variant(to_string(c.variant));
    read(j, "variant", variant);
    c.variant = sensing_variant_from_string(variant);
    if (j.contains("camera")) {
        const json& cam = j.at("camera");
        check_keys(cam, "sensing.camera", {"hfov_deg", "vfov_deg", "height", "width", "mount_height", "max_range"});
        read(cam, "hfov_deg", c.camera.hfov_deg);
        read(cam, "vfov_deg", c.camera.vfov_deg);
        read(cam, "height", c.camera.height);
        read(cam, "width", c.camera.width);
        read(cam, "mount_height", c.camera.mount_height);
        read(cam, "max_range", c.camera.max_range);
    }
    read(j, "bottom_laser_z", c.bottom_laser_z);
    read(j, "top_laser_z", c.top_laser_z);
    read(j, "slice_row", c.slice_row);
    c.camera.validate();
    return c;
}

json to_json(const NoiseConfig& c)
{
    return {{"alpha", c.alpha},
            {"radius", c.radius},
            {"scale", c.scale},
            {"interpolate", c.interpolate},
            {"gaussian", c.gaussian},
            {"model", c.model == NoiseModel::VarianceProportional ? "variance" : "std"}};
}

NoiseConfig noise_config_from_json(const json& j)
{
    check_keys(j, "noise", {"alpha", "radius", "scale", "interpolate", "gaussian", "model"});
    NoiseConfig c;
    read(j, "alpha", c.alpha);
    read(j, "radius", c.radius);
    read(j, "scale", c.scale);
    read(j, "interpolate", c.interpolate);
    read(j, "gaussian", c.gaussian);
    std::string model = "std";
    read(j, "model", model);
    if (model != "std" && model != "variance")
        throw UsageError("noise.model must be 'std' or 'variance'");
    c.model = model == "variance" ? NoiseModel::VarianceProportional : NoiseModel::StdProportional;
    c.validate();
    return c;
}

json to_json(const rl::TrainConfig& c)
{
    json stages = json::array();
    for (const auto& s : c.stages)
        stages.push_back({{"id", s.id}, {"scenes", s.scenes}, {"threshold", s.threshold}, {"budget", s.budget}});
    return {{"seed", c.seed},
            {"policy", to_json(c.policy)},
            {"ppo", to_json(c.ppo)},
            {"env", to_json(c.env)},
            {"sensing", to_json(c.sensing)},
            {"noise", to_json(c.noise)},
            {"num_envs", c.num_envs},
            {"success_window", c.success_window},
            {"stages", stages}};
}

rl::TrainConfig train_config_from_json(const json& j)
{
    check_keys(j, "config",
               {"seed", "policy", "ppo", "env", "sensing", "noise", "num_envs", "success_window", "stages"});
    rl::TrainConfig c;
    read(j, "seed", c.seed);
    if (j.contains("policy"))
        c.policy = policy_config_from_json(j.at("policy"));
    if (j.contains("ppo"))
        c.ppo = ppo_config_from_json(j.at("ppo"));
    if (j.contains("env"))
        c.env = env_config_from_json(j.at("env"));
    if (j.contains("sensing"))
        c.sensing = sensing_from_json(j.at("sensing"));
    if (j.contains("noise"))
        c.noise = noise_config_from_json(j.at("noise"));
    read(j, "num_envs", c.num_envs);
    read(j, "success_window", c.success_window);
    if (j.contains("stages")) {
        if (!j.at("stages").is_array())
            throw UsageError("config: 'stages' must be an array");
        for (const json& s : j.at("stages")) {
            check_keys(s, "stage", {"id", "scenes", "threshold", "budget"});
            rl::StageConfig st;
            read(s, "id", st.id);
            read(s, "scenes", st.scenes);
            read(s, "threshold", st.threshold);
            read(s, "budget", st.budget);
            c.stages.push_back(std::move(st));
        }
    }
    if (!j.contains("policy") || !j.at("policy").contains("scan_width"))
        c.policy.scan_width = c.sensing.width();
    c.validate();
    return c;
}

rl::TrainConfig load_train_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    rl::TrainConfig c = train_config_from_json(j);
    const std::filesystem::path base = path.parent_path();
    for (auto& stage : c.stages)
        for (auto& scene : stage.scenes)
            if (std::filesystem::path(scene).is_relative())
                scene = (base / scene).lexically_normal().string();
    return c;
}

std::uint64_t config_hash(const rl::TrainConfig& c) { return nn::fnv1a64(to_json(c).dump()); }

std::string hash_hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace plnav
