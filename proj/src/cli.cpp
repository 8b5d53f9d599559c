#include "plnav/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "plnav/config.hpp"
#include "plnav/error.hpp"
#include "plnav/eval.hpp"
#include "plnav/image_io.hpp"
#include "plnav/nn/checkpoint.hpp"
#include "plnav/rl/curriculum.hpp"
#include "plnav/trajectory.hpp"

namespace plnav {

namespace {

/// Options shared by the evaluation-style subcommands.
struct CommonEval {
    std::string config;
    std::string variant;
    std::string checkpoint;
    std::string controller;
    std::uint64_t seed = 0;
};

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw IoError("cannot open " + path + " for writing");
    return f;
}

rl::TrainConfig config_or_default(const std::string& path)
{
    return path.empty() ? rl::TrainConfig{} : load_train_config(path);
}

EvalOptions eval_options(const CommonEval& c)
{
    const rl::TrainConfig cfg = config_or_default(c.config);
    EvalOptions opts;
    opts.env = cfg.env;
    opts.sensing = cfg.sensing;
    if (!c.variant.empty())
        opts.sensing.variant = sensing_variant_from_string(c.variant);
    return opts;
}

std::unique_ptr<Controller> make_controller(const CommonEval& c)
{
    if (!c.checkpoint.empty() && !c.controller.empty())
        throw UsageError("give either --checkpoint or --controller, not both");
    if (!c.checkpoint.empty()) {
        auto net = std::make_shared<const nn::PolicyNet>(nn::restore_policy(nn::load_checkpoint(c.checkpoint)));
        return std::make_unique<PolicyController>(std::move(net), std::filesystem::path(c.checkpoint).stem().string());
    }
    if (c.controller == "straight")
        return std::make_unique<ScriptedController>(ScriptedKind::GoStraight);
    if (c.controller == "zero")
        return std::make_unique<ScriptedController>(ScriptedKind::Zero);
    if (c.controller == "random")
        return std::make_unique<ScriptedController>(ScriptedKind::Random);
    throw UsageError("a --checkpoint or --controller (straight|zero|random) is required");
}

Pose parse_pose(const std::string& text)
{
    Pose p;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &p.position.x, &p.position.y, &p.heading, &extra) != 3)
        throw UsageError("--pose expects x,y,theta");
    return p;
}

Pose scenario_pose(const Scenario& s, int agent, const std::string& pose_text)
{
    if (!pose_text.empty())
        return parse_pose(pose_text);
    if (agent < 0 || static_cast<std::size_t>(agent) >= s.agents.size())
        throw UsageError("scenario has no agent #" + std::to_string(agent) + "; pass --pose x,y,theta");
    return s.agents[static_cast<std::size_t>(agent)].pose();
}

void add_noise_flags(CLI::App* cmd, NoiseConfig& noise)
{
    cmd->add_option("--alpha", noise.alpha, "Boundary threshold in metres")->capture_default_str();
    cmd->add_option("--radius", noise.radius, "Boundary neighbourhood half-width in beams")->capture_default_str();
    cmd->add_option("--scale", noise.scale, "Gaussian noise scale relative to the range")->capture_default_str();
}

void write_scan(std::ostream& out, const PseudoLaser& scan)
{
    char buf[32];
    for (double r : scan.ranges) {
        std::snprintf(buf, sizeof buf, "%.6f", r);
        out << buf << '\n';
    }
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Vision-based collision avoidance lab: simulator, pseudo-laser extraction and PPO training", "plnav"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // train
    std::string train_config, train_out, train_resume;
    std::optional<std::uint64_t> train_seed;
    bool quiet = false;
    auto* train = app.add_subcommand("train", "Run the curriculum described by a config file");
    train->add_option("--config", train_config, "Training config (JSON)")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "Output directory for log, manifest and checkpoints")->required();
    train->add_option("--seed", train_seed, "Override the config seed");
    train->add_option("--resume", train_resume, "Stage checkpoint to continue after")->check(CLI::ExistingFile);
    train->add_flag("--quiet", quiet, "Suppress per-update progress");

    // eval
    CommonEval ev;
    std::string ev_scenario, ev_out, ev_traj, ev_svg;
    int ev_trials = 100;
    auto* eval = app.add_subcommand("eval", "Success rate and average time of one model in one scene");
    eval->add_option("--scenario", ev_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    eval->add_option("--checkpoint", ev.checkpoint, "Policy checkpoint")->check(CLI::ExistingFile);
    eval->add_option("--controller", ev.controller, "Scripted controller instead of a checkpoint")
        ->check(CLI::IsMember({"straight", "zero", "random"}));
    eval->add_option("--config", ev.config, "Config supplying env and sensing settings")->check(CLI::ExistingFile);
    eval->add_option("--variant", ev.variant, "Sensing variant override");
    eval->add_option("--trials", ev_trials, "Number of trials")->capture_default_str()->check(CLI::PositiveNumber);
    eval->add_option("--seed", ev.seed, "Master seed")->capture_default_str();
    eval->add_option("--out", ev_out, "Report CSV (default: stdout)");
    eval->add_option("--traj", ev_traj, "Trajectory CSV");
    eval->add_option("--svg", ev_svg, "Trajectory SVG");

    // ablate
    std::vector<std::string> ab_models, ab_scenes;
    std::string ab_config, ab_out;
    int ab_trials = 100;
    std::uint64_t ab_seed = 0;
    auto* ablate = app.add_subcommand("ablate", "Evaluate sensing variants across scenes");
    ablate->add_option("--model", ab_models, "variant=checkpoint (repeatable)")->required();
    ablate->add_option("--scenario", ab_scenes, "Scenario file (repeatable)")->required()->check(CLI::ExistingFile);
    ablate->add_option("--config", ab_config, "Config supplying env and camera settings")->check(CLI::ExistingFile);
    ablate->add_option("--trials", ab_trials, "Trials per cell")->capture_default_str()->check(CLI::PositiveNumber);
    ablate->add_option("--seed", ab_seed, "Master seed")->capture_default_str();
    ablate->add_option("--out", ab_out, "CSV report (the text table always goes to stdout)");

    // render-sensors
    std::string rs_scenario, rs_config, rs_pose, rs_out;
    int rs_agent = 0;
    auto* render = app.add_subcommand("render-sensors", "Write the depth PGM and semantic PBM seen from a pose");
    render->add_option("--scenario", rs_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    render->add_option("--config", rs_config, "Config supplying the camera")->check(CLI::ExistingFile);
    render->add_option("--agent", rs_agent, "Declared agent whose pose is used")->capture_default_str();
    render->add_option("--pose", rs_pose, "Explicit pose x,y,theta");
    render->add_option("--out", rs_out, "Output prefix: <out>_depth.pgm, <out>_mask.pbm")->required();

    // pseudo-laser
    std::string pl_depth, pl_mask, pl_out;
    std::optional<int> pl_row;
    std::optional<double> pl_max_range;
    bool pl_augment = false;
    std::uint64_t pl_seed = 0;
    NoiseConfig pl_noise;
    auto* pseudo = app.add_subcommand("pseudo-laser", "Convert a depth PGM and mask PBM into a scan");
    pseudo->add_option("--depth", pl_depth, "Depth graymap")->required()->check(CLI::ExistingFile);
    pseudo->add_option("--mask", pl_mask, "Semantic bitmap")->required()->check(CLI::ExistingFile);
    pseudo->add_option("--max-range", pl_max_range, "Range of full scale when the PGM does not record it");
    pseudo->add_option("--naive-row", pl_row, "Slice a single row instead of pooling");
    pseudo->add_flag("--augment", pl_augment, "Apply boundary interpolation and Gaussian noise");
    pseudo->add_option("--seed", pl_seed, "Noise seed")->capture_default_str();
    add_noise_flags(pseudo, pl_noise);
    pseudo->add_option("--out", pl_out, "Output file, one range per line (default: stdout)");

    // augment-demo
    std::string ad_scenario, ad_config, ad_pose, ad_out;
    int ad_agent = 0;
    std::uint64_t ad_seed = 0;
    NoiseConfig ad_noise;
    auto* demo = app.add_subcommand("augment-demo", "Clean and augmented pseudo-laser side by side (CSV)");
    demo->add_option("--scenario", ad_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    demo->add_option("--config", ad_config, "Config supplying the camera")->check(CLI::ExistingFile);
    demo->add_option("--agent", ad_agent, "Declared agent whose pose is used")->capture_default_str();
    demo->add_option("--pose", ad_pose, "Explicit pose x,y,theta");
    demo->add_option("--seed", ad_seed, "Noise seed")->capture_default_str();
    add_noise_flags(demo, ad_noise);
    demo->add_option("--out", ad_out, "CSV output (default: stdout)");

    // export-traj
    CommonEval ex;
    std::string ex_scenario, ex_out, ex_svg;
    int ex_episodes = 1;
    auto* exp = app.add_subcommand("export-traj", "Roll out episodes and export trajectories");
    exp->add_option("--scenario", ex_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    exp->add_option("--checkpoint", ex.checkpoint, "Policy checkpoint")->check(CLI::ExistingFile);
    exp->add_option("--controller", ex.controller, "Scripted controller instead of a checkpoint")
        ->check(CLI::IsMember({"straight", "zero", "random"}));
    exp->add_option("--config", ex.config, "Config supplying env and sensing settings")->check(CLI::ExistingFile);
    exp->add_option("--variant", ex.variant, "Sensing variant override");
    exp->add_option("--episodes", ex_episodes, "Episodes to roll out")->capture_default_str()->check(CLI::PositiveNumber);
    exp->add_option("--seed", ex.seed, "Master seed")->capture_default_str();
    exp->add_option("--out", ex_out, "Trajectory CSV")->required();
    exp->add_option("--svg", ex_svg, "Trajectory SVG");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (!args.empty())
            err << "error: " << e.what() << "\n\n";
        err << app.help();
        return 2;
    }

    try {
        if (*train) {
            rl::TrainConfig cfg = load_train_config(train_config);
            if (train_seed)
                cfg.seed = *train_seed;
            rl::TrainOptions opts;
            if (!train_resume.empty())
                opts.resume = train_resume;
            opts.progress = quiet ? nullptr : &err;
            const rl::TrainResult result = rl::train_curriculum(cfg, train_out, opts);
            for (const auto& s : result.stages)
                out << "stage " << s.id << ": " << s.steps << " steps, success " << s.success_rate << ", reward "
                    << s.mean_reward << (s.reached_threshold ? "" : " (budget exhausted)") << " -> "
                    << s.checkpoint.string() << '\n';
        } else if (*eval) {
            const EvalOptions base = eval_options(ev);
            EvalOptions opts = base;
            opts.record_trajectories = !ev_traj.empty() || !ev_svg.empty();
            const auto controller = make_controller(ev);
            auto scenario = std::make_shared<const Scenario>(load_scenario(ev_scenario));
            const EvalReport report = evaluate(*controller, scenario, std::filesystem::path(ev_scenario).stem().string(),
                                               ev_trials, ev.seed, opts);
            if (ev_out.empty()) {
                write_report_csv(out, std::span(&report, 1));
            } else {
                auto f = open_out(ev_out);
                write_report_csv(f, std::span(&report, 1));
            }
            if (!ev_traj.empty())
                export_trajectories(report.trajectories, ev_traj);
            if (!ev_svg.empty())
                export_trajectory_svg(*scenario, report.trajectories, ev_svg);
        } else if (*ablate) {
            CommonEval c;
            c.config = ab_config;
            const EvalOptions opts = eval_options(c);
            std::vector<AblationModel> models;
            for (const auto& model_arg : ab_models) {
                const auto eq = model_arg.find('=');
                if (eq == std::string::npos)
                    throw UsageError("--model expects variant=checkpoint, got '" + model_arg + "'");
                const std::string variant = model_arg.substr(0, eq);
                models.push_back({variant, sensing_variant_from_string(variant), model_arg.substr(eq + 1)});
            }
            std::vector<std::filesystem::path> scenes(ab_scenes.begin(), ab_scenes.end());
            const auto rows = run_ablation(models, scenes, ab_trials, ab_seed, opts, &err);
            write_ablation_table(out, rows);
            if (!ab_out.empty()) {
                auto f = open_out(ab_out);
                write_ablation_csv(f, rows);
            }
        } else if (*render) {
            const rl::TrainConfig cfg = config_or_default(rs_config);
            const Scenario s = load_scenario(rs_scenario);
            const Pose pose = scenario_pose(s, rs_agent, rs_pose);
            const CameraFrames frames = render_camera(s, pose, cfg.sensing.camera);
            write_depth_pgm(rs_out + "_depth.pgm", frames.depth);
            write_mask_pbm(rs_out + "_mask.pbm", frames.mask);
            out << "wrote " << rs_out << "_depth.pgm and " << rs_out << "_mask.pbm\n";
        } else if (*pseudo) {
            const DepthFrame depth = read_depth_pgm(pl_depth, pl_max_range);
            const SemanticMask mask = read_mask_pbm(pl_mask);
            const SemanticDepth sd = apply_mask(depth, mask);
            if (pl_row && *pl_row < 0)
                throw UsageError("--naive-row must be non-negative");
            PseudoLaser scan = pl_row ? naive_row_slice(sd, static_cast<std::size_t>(*pl_row), depth.max_range)
                                      : slice_min_pool(sd, depth.max_range);
            if (pl_augment) {
                pl_noise.validate();
                Rng rng(pl_seed);
                scan = augment(scan, pl_noise, rng);
            }
            if (pl_out.empty()) {
                write_scan(out, scan);
            } else {
                auto f = open_out(pl_out);
                write_scan(f, scan);
            }
        } else if (*demo) {
            const rl::TrainConfig cfg = config_or_default(ad_config);
            const Scenario s = load_scenario(ad_scenario);
            const Pose pose = scenario_pose(s, ad_agent, ad_pose);
            SensingModel sensing = cfg.sensing;
            sensing.variant = SensingVariant::DepthPoolSem;
            const PseudoLaser clean = perceive(sensing, s, pose);
            ad_noise.validate();
            Rng rng(ad_seed);
            const PseudoLaser noisy = augment(clean, ad_noise, rng);
            const PseudoLaser interpolated = interpolate_boundaries(clean, ad_noise);
            std::ostringstream csv;
            csv << "beam,clean,interpolated,augmented\n";
            char buf[128];
            for (std::size_t j = 0; j < clean.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f\n", j, clean.ranges[j], interpolated.ranges[j],
                              noisy.ranges[j]);
                csv << buf;
            }
            if (ad_out.empty()) {
                out << csv.str();
            } else {
                auto f = open_out(ad_out);
                f << csv.str();
            }
        } else if (*exp) {
            EvalOptions opts = eval_options(ex);
            opts.record_trajectories = true;
            const auto controller = make_controller(ex);
            auto scenario = std::make_shared<const Scenario>(load_scenario(ex_scenario));
            const EvalReport report = evaluate(*controller, scenario, std::filesystem::path(ex_scenario).stem().string(),
                                               ex_episodes, ex.seed, opts);
            export_trajectories(report.trajectories, ex_out);
            if (!ex_svg.empty())
                export_trajectory_svg(*scenario, report.trajectories, ex_svg);
            out << "wrote " << report.trajectories.rows.size() << " rows to " << ex_out << '\n';
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int cli_main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

} // namespace plnav
