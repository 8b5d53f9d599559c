// Acceptance checks: one PASS/FAIL line per criterion. Arguments select a subset by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gae_oracle.hpp"
#include "plnav/cli.hpp"
#include "plnav/config.hpp"
#include "plnav/eval.hpp"
#include "plnav/nn/checkpoint.hpp"
#include "plnav/pseudolaser.hpp"
#include "plnav/rl/advantages.hpp"
#include "plnav/rl/curriculum.hpp"
#include "plnav/sensing.hpp"
#include "reference_policy.hpp"
#include "reward_table.hpp"
#include "test_helpers.hpp"

using namespace plnav;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::filesystem::path work_dir(const std::string& name)
{
    auto dir = std::filesystem::current_path() / "acceptance_work" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------- 1

Outcome reward_exactness()
{
    const RewardConfig rc;
    const bool constants = rc.r_arrival == 15.0 && rc.w_goal == 2.5 && rc.r_collision == -15.0 &&
                           rc.w_rotation == -0.1 && rc.goal_radius == 0.1 && rc.rotation_threshold == 0.7;
    const Scenario s = test::reward_scene();
    const auto cases = test::reward_cases();
    double worst = 0.0;
    std::string worst_case;
    for (const auto& c : cases) {
        const double err = std::abs(test::library_reward(c, s, rc) - c.expected);
        if (err >= worst) {
            worst = err;
            worst_case = c.name;
        }
    }
    return {constants && cases.size() == 20 && worst <= 1e-9,
            fmt("%zu cases, max |error| %.3g (%s), constants %s", cases.size(), worst, worst_case.c_str(),
                constants ? "match" : "differ")};
}

// ---------------------------------------------------------------------------- 2

std::vector<double> brute_pool(const Grid<double>& g, double max_range)
{
    std::vector<double> out;
    const std::size_t first = (g.rows() + 1) / 2;
    for (std::size_t c = 0; c < g.cols(); ++c) {
        double best = max_range;
        bool any = false;
        for (std::size_t r = first; r < g.rows(); ++r) {
            const double v = g(r, c);
            if (v != 0.0 && (!any || v < best)) {
                best = v;
                any = true;
            }
        }
        out.push_back(best);
    }
    return out;
}

Outcome pooling_oracle()
{
    Rng rng(2024);
    int mismatches = 0;
    const int grids = 1000;
    for (int k = 0; k < grids; ++k) {
        const auto rows = static_cast<std::size_t>(uniform(rng, 8.0, 65.0));
        const auto cols = static_cast<std::size_t>(uniform(rng, 8.0, 257.0));
        Grid<double> depth(rows, cols);
        Grid<std::uint8_t> mask(rows, cols);
        for (double& v : depth.data())
            v = uniform(rng, 0.05, 10.0);
        const double keep = uniform(rng, 0.0, 1.0);
        for (auto& m : mask.data())
            m = uniform(rng, 0.0, 1.0) < keep ? 1 : 0;
        const SemanticDepth sd = apply_mask({depth, 10.0}, {mask});
        if (slice_min_pool(sd, 10.0).ranges != brute_pool(sd.values, 10.0))
            ++mismatches;
    }
    // Empty column, a column with content only in the upper half, and an odd row count.
    Grid<double> g(5, 3, 0.0);
    g(0, 0) = 1.0;
    g(1, 0) = 2.0;
    g(2, 1) = 3.0;
    g(4, 1) = 2.5;
    const auto conv = slice_min_pool({g}, 10.0).ranges;
    const bool convention = conv == std::vector<double>{10.0, 2.5, 10.0};
    return {mismatches == 0 && convention,
            fmt("%d/%d random grids differ from brute force; empty-column convention %s", mismatches, grids,
                convention ? "holds" : "broken")};
}

// ---------------------------------------------------------------------------- 3

Outcome irregular_obstacle()
{
    const auto t0 = Clock::now();
    const Scenario s = load_scenario(test::scene_path("table.scene"));
    const Pose pose = s.agents.at(0).pose();
    SensingModel camera;
    camera.variant = SensingVariant::DepthPoolSem;
    camera.camera.mount_height = 0.8;
    SensingModel laser = camera;
    laser.variant = SensingVariant::BtmLaser;
    laser.bottom_laser_z = 0.3;
    const PseudoLaser pseudo = perceive(camera, s, pose);
    const PseudoLaser bottom = perceive(laser, s, pose);

    const int w = camera.width();
    double pseudo_max = 0.0;
    for (int j = w / 2 - 4; j < w / 2 + 4; ++j)
        pseudo_max = std::max(pseudo_max, pseudo.ranges[static_cast<std::size_t>(j)]);
    // Beams that stay clear of the legs across the table's depth.
    double laser_min = 1e9;
    int between = 0;
    for (int b = 0; b < w; ++b) {
        const double bearing = beam_bearing(b, w, camera.camera.hfov_deg);
        if (std::abs(std::tan(bearing)) * 2.5 < 1.15) {
            laser_min = std::min(laser_min, bottom.ranges[static_cast<std::size_t>(b)]);
            ++between;
        }
    }
    const double elapsed = seconds_since(t0);
    return {pseudo_max <= 1.6 && laser_min >= 2.4 && between > 0 && elapsed < 1.0,
            fmt("pseudo-laser centre beams max %.3f m (<= 1.6); bottom laser min %.3f m over %d beams between the "
                "legs (>= 2.4); %.3f s",
                pseudo_max, laser_min, between, elapsed)};
}

// ---------------------------------------------------------------------------- 4

Outcome semantic_hazard()
{
    const Scenario wet = load_scenario(test::scene_path("water.scene"));
    Scenario dry = wet;
    dry.hazards.clear();
    const Pose pose = wet.agents.at(0).pose();
    SensingModel model;
    model.variant = SensingVariant::DepthPoolSem;
    const CameraModel& cam = model.camera;
    const PseudoLaser before = perceive(model, dry, pose);
    const PseudoLaser after = perceive(model, wet, pose);
    SensingModel laser_model = model;
    laser_model.variant = SensingVariant::BtmLaser;
    const bool laser_same = perceive(laser_model, dry, pose).ranges == perceive(laser_model, wet, pose).ranges;

    // Ground ray of column j reaches the water's near edge (2 m ahead) at forward distance 2;
    // the pooled value is the first pixel row past it, so allow one row's depth step.
    const auto& patch = wet.hazards.at(0).region;
    const double near_edge = std::min({patch[0].x, patch[1].x, patch[2].x, patch[3].x}) - pose.position.x;
    const double h = cam.mount_height;
    const double fx = 0.5 * cam.width / std::tan(0.5 * cam.hfov_deg * std::numbers::pi / 180.0);
    const double fy = 0.5 * cam.height / std::tan(0.5 * cam.vfov_deg * std::numbers::pi / 180.0);
    int affected = 0;
    int background = 0;
    double worst_excess = -1e9;
    double centre = 0.0;
    for (int j = 0; j < cam.width; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (after.ranges[k] == before.ranges[k])
            continue;
        ++affected;
        if (before.ranges[k] > 5.0)
            ++background;
        const double left = -(j + 0.5 - 0.5 * cam.width) / fx;
        const double ideal = std::sqrt(near_edge * near_edge * (1.0 + left * left) + h * h);
        // Ray length of row i's ground hit; rows further down hit closer.
        auto ground = [&](int i) {
            const double drop = (i + 0.5 - 0.5 * cam.height) / fy;
            const double s = h / drop;
            return std::pair{s, s * std::sqrt(1.0 + left * left + drop * drop)};
        };
        double step = 0.0;
        for (int i = (cam.height + 1) / 2; i + 1 < cam.height; ++i)
            if (ground(i).first >= near_edge && ground(i + 1).first < near_edge)
                step = ground(i).second - ground(i + 1).second;
        worst_excess = std::max(worst_excess, std::abs(after.ranges[k] - ideal) - step);
        if (j == cam.width / 2)
            centre = after.ranges[k];
    }
    const bool pass = laser_same && affected > 0 && background == affected && worst_excess <= 0.0;
    return {pass, fmt("%d beams changed (all from background: %s), centre beam %.3f m, max deviation beyond one "
                      "pixel %.3f m; true laser %s",
                      affected, background == affected ? "yes" : "no", centre, std::max(worst_excess, 0.0),
                      laser_same ? "unchanged" : "changed")};
}

// ---------------------------------------------------------------------------- 5

Outcome augmentation_statistics()
{
    NoiseConfig cfg;
    cfg.alpha = 0.5;
    cfg.radius = 8;
    cfg.scale = 0.07;
    Rng rng(77);

    const std::size_t width = 128;
    const PseudoLaser flat{std::vector<double>(width, 2.0), 10.0};
    std::vector<double> sum(width, 0.0), sum_sq(width, 0.0);
    const int samples = 100000;
    for (int n = 0; n < samples; ++n) {
        const PseudoLaser out = augment(flat, cfg, rng);
        for (std::size_t k = 0; k < width; ++k) {
            const double d = out.ranges[k] - 2.0;
            sum[k] += d;
            sum_sq[k] += d * d;
        }
    }
    double std_lo = 1e9, std_hi = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
        const double mean = sum[k] / samples;
        const double sd = std::sqrt((sum_sq[k] - samples * mean * mean) / (samples - 1));
        std_lo = std::min(std_lo, sd);
        std_hi = std::max(std_hi, sd);
    }
    const bool std_ok = std_lo >= 0.135 && std_hi <= 0.145;

    // Step of 3 m at index 63: window [56, 71], endpoints 55 and 72.
    std::vector<double> step(width);
    for (std::size_t k = 0; k < width; ++k)
        step[k] = k < 64 ? 1.0 : 4.0;
    bool linear = true;
    for (int trial = 0; trial < 100; ++trial) {
        const PseudoLaser out = augment({step, 10.0}, cfg, rng);
        for (std::size_t k = 56; k <= 71; ++k)
            linear = linear && out.ranges[k] == 1.0 + 3.0 * static_cast<double>(k - 55) / 17.0;
    }

    bool identity = true;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> r(width);
        for (double& v : r)
            v = uniform(rng, 0.1, 9.9);
        NoiseConfig off = cfg;
        off.interpolate = false;
        off.gaussian = false;
        NoiseConfig zero = cfg;
        zero.interpolate = false;
        zero.scale = 0.0;
        identity = identity && augment({r, 10.0}, off, rng).ranges == r && augment({r, 10.0}, zero, rng).ranges == r;
    }
    return {std_ok && linear && identity,
            fmt("per-entry std over %d samples in [%.4f, %.4f] (target 0.140 +- 0.005); windows exactly linear: %s; "
                "zero config identity: %s",
                samples, std_lo, std_hi, linear ? "yes" : "no", identity ? "yes" : "no")};
}

// ---------------------------------------------------------------------------- 6

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-7}); }

struct GradCheck {
    std::size_t checked = 0;
    double worst = 0.0;
    std::string worst_name;
};

// Central differences of the loop reference against the library backward. `pick` selects
// which scalar indices of each tensor are checked.
GradCheck finite_difference_check(nn::PolicyNet& net, const test::RefInput& in, const test::TestLoss& loss,
                                  const std::function<std::vector<std::size_t>(std::size_t)>& pick)
{
    const nn::PolicyConfig& cfg = net.config();
    nn::PolicyTrace trace;
    const nn::PolicyOutput out = net.forward(test::to_policy_batch(cfg, in), &trace);
    net.params().zero_grad();
    net.backward(loss.grad(out), trace);

    const double eps = 1e-5;
    GradCheck r;
    for (auto& param : net.params().params()) {
        auto values = param.value.data();
        for (std::size_t i : pick(values.size())) {
            // Long double forward and the exact perturbation actually applied keep the
            // difference quotient free of double rounding.
            const double keep = values[i];
            values[i] = keep + eps;
            const long double x_up = values[i];
            const long double up = loss(test::reference_forward<long double>(net, in));
            values[i] = keep - eps;
            const long double x_down = values[i];
            const long double down = loss(test::reference_forward<long double>(net, in));
            values[i] = keep;
            const auto fd = static_cast<double>((up - down) / (x_up - x_down));
            const double err = rel_error(param.grad.data()[i], fd);
            ++r.checked;
            if (err > r.worst) {
                r.worst = err;
                r.worst_name = param.name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return r;
}

Outcome gradient_check()
{
    const auto t0 = Clock::now();
    // Every parameter of an architecture-identical reduced network, both attention merges.
    GradCheck reduced;
    for (nn::AttentionMerge merge : {nn::AttentionMerge::Add, nn::AttentionMerge::Max}) {
        nn::PolicyConfig cfg;
        cfg.scan_width = 32;
        cfg.conv1_filters = 6;
        cfg.conv2_filters = 6;
        cfg.feature_dim = 10;
        cfg.hidden_dim = 8;
        cfg.attention_merge = merge;
        nn::PolicyNet net(cfg, 41);
        Rng rng(42);
        test::randomize_parameters(net.params(), rng);
        const test::RefInput in = test::random_ref_input(cfg, 3, 2, rng);
        const test::TestLoss loss(6, rng);
        const GradCheck g = finite_difference_check(net, in, loss, [](std::size_t n) {
            std::vector<std::size_t> all(n);
            for (std::size_t k = 0; k < n; ++k)
                all[k] = k;
            return all;
        });
        reduced.checked += g.checked;
        if (g.worst >= reduced.worst) {
            reduced.worst = g.worst;
            reduced.worst_name = g.worst_name;
        }
    }

    // Default-size network: a random sample from every tensor.
    const nn::PolicyConfig full;
    nn::PolicyNet net(full, 43);
    Rng rng(44);
    const test::RefInput in = test::random_ref_input(full, 3, 1, rng);
    const test::TestLoss loss(3, rng);
    const GradCheck sampled = finite_difference_check(net, in, loss, [&rng](std::size_t n) {
        std::vector<std::size_t> ids;
        const std::size_t want = std::min<std::size_t>(n, 400);
        std::set<std::size_t> seen;
        while (ids.size() < want) {
            const auto k = std::min(n - 1, static_cast<std::size_t>(uniform(rng, 0.0, static_cast<double>(n))));
            if (seen.insert(k).second)
                ids.push_back(k);
        }
        return ids;
    });
    const double elapsed = seconds_since(t0);
    const bool pass = reduced.worst < 1e-4 && sampled.worst < 1e-4 && elapsed < 300.0;
    return {pass, fmt("reduced network: all %zu parameters, worst %.2e (%s); default network (%zu parameters): %zu "
                      "sampled, worst %.2e (%s); %.0f s",
                      reduced.checked, reduced.worst, reduced.worst_name.c_str(), net.params().scalar_count(),
                      sampled.checked, sampled.worst, sampled.worst_name.c_str(), elapsed)};
}

// ---------------------------------------------------------------------------- 7

Outcome advantage_oracle()
{
    Rng rng(7007);
    int mismatched = 0;
    for (int trial = 0; trial < 100; ++trial) {
        rl::RolloutBuffer b = test::random_buffer(rng);
        const double gamma = uniform(rng, 0.5, 1.0), lambda = uniform(rng, 0.0, 1.0);
        rl::compute_advantages(b, gamma, lambda);
        const auto expected = test::oracle_advantages(b, gamma, lambda);
        bool same = true;
        for (std::size_t i = 0; i < b.size(); ++i)
            same = same && b.advantages[i] == expected[i] && (b.bootstrap_only[i] || b.returns[i] == expected[i] + b.values[i]);
        mismatched += same ? 0 : 1;
    }
    int telescoping_failures = 0;
    for (int k = 0; k < 1000; ++k) {
        const double r = uniform(rng, -15, 15), v0 = uniform(rng, -20, 20), v1 = uniform(rng, -20, 20);
        const std::vector<double> rewards{r}, values{v0, v1};
        const std::vector<unsigned char> done{0};
        const auto out = rl::gae(rewards, values, done, 1.0, 1.0);
        telescoping_failures += out.advantages[0] == r + v1 - v0 ? 0 : 1;
    }
    return {mismatched == 0 && telescoping_failures == 0,
            fmt("%d/100 random buffers differ from the hand recursion; %d/1000 telescoping failures", mismatched,
                telescoping_failures)};
}

// ---------------------------------------------------------------------------- 8-10

EvalOptions options_for(const rl::TrainConfig& cfg)
{
    EvalOptions o;
    o.env = cfg.env;
    o.sensing = cfg.sensing;
    return o;
}

EvalReport evaluate_checkpoint(const std::filesystem::path& ckpt, const rl::TrainConfig& cfg,
                               const std::string& scene, int trials, std::uint64_t seed)
{
    auto net = std::make_shared<const nn::PolicyNet>(nn::restore_policy(nn::load_checkpoint(ckpt)));
    const PolicyController controller(net);
    auto scenario = std::make_shared<const Scenario>(load_scenario(test::scene_path(scene)));
    return evaluate(controller, scenario, scene, trials, seed, options_for(cfg));
}

Outcome training_smoke()
{
    const auto t0 = Clock::now();
    const rl::TrainConfig cfg = load_train_config(test::source_dir() / "configs" / "stage1.json");
    const auto dir = work_dir("stage1");
    const rl::TrainResult trained = rl::train_curriculum(cfg, dir);
    const double train_s = seconds_since(t0);

    const EvalReport policy = evaluate_checkpoint(trained.stages.back().checkpoint, cfg, "stage1.scene", 100, 7);
    const ScriptedController random(ScriptedKind::Random);
    const EvalReport baseline =
        evaluate(random, std::make_shared<const Scenario>(load_scenario(test::scene_path("stage1.scene"))),
                 "stage1.scene", 100, 7, options_for(cfg));
    const double elapsed = seconds_since(t0);
    const bool pass = policy.success_rate >= 0.8 && policy.mean_reward >= baseline.mean_reward + 10.0 &&
                      elapsed < 3600.0;
    return {pass, fmt("%lld steps; success %.2f (>= 0.80), %d collisions, %d timeouts; mean reward %.2f vs random "
                      "%.2f (margin >= 10); train %.0f s, total %.0f s",
                      trained.stages.back().steps, policy.success_rate, policy.collisions, policy.timeouts,
                      policy.mean_reward, baseline.mean_reward, train_s, elapsed)};
}

Outcome ablation_direction()
{
    const auto t0 = Clock::now();
    const rl::TrainConfig base = load_train_config(test::source_dir() / "configs" / "table.json");
    std::vector<std::pair<SensingVariant, double>> success;
    std::string detail;
    for (SensingVariant v : {SensingVariant::DepthPoolSem, SensingVariant::BtmLaser, SensingVariant::Depth1d}) {
        rl::TrainConfig cfg = base;
        cfg.sensing.variant = v;
        const auto dir = work_dir("table_" + std::string(to_string(v)));
        const rl::TrainResult trained = rl::train_curriculum(cfg, dir);
        const EvalReport r = evaluate_checkpoint(trained.stages.back().checkpoint, cfg, "table_room.scene", 100, 7);
        success.emplace_back(v, r.success_rate);
        detail += fmt("%s %.2f (%d coll, %d t/o); ", std::string(to_string(v)).c_str(), r.success_rate, r.collisions,
                      r.timeouts);
    }
    const double sem = success[0].second;
    const bool pass = sem > success[1].second && sem > success[2].second;
    return {pass, detail + fmt("%.0f s", seconds_since(t0))};
}

Outcome reproducibility()
{
    const auto dir = work_dir("repro");
    const nlohmann::json config = {
        {"seed", 11},
        {"sensing", {{"variant", "depth-pool-sem"}, {"camera", {{"width", 32}, {"height", 16}}}}},
        {"policy", {{"scan_width", 32}, {"conv1_filters", 6}, {"conv2_filters", 6}, {"feature_dim", 24}, {"hidden_dim", 16}}},
        {"ppo", {{"batch_size", 256}, {"epochs", 2}, {"minibatches", 2}}},
        {"num_envs", 2},
        {"stages",
         {{{"id", "1"}, {"scenes", {test::scene_path("stage1.scene").string()}}, {"threshold", 1.0}, {"budget", 1024}},
          {{"id", "2"}, {"scenes", {test::scene_path("stage2.scene").string()}}, {"threshold", 1.0}, {"budget", 1024}}}},
    };
    const auto config_path = dir / "config.json";
    std::ofstream(config_path) << config.dump(2);

    ::setenv("PLNAV_THREADS", "1", 1);
    std::vector<std::string> compared;
    bool codes_ok = true;
    for (const char* run : {"a", "b"}) {
        const auto out = dir / run;
        std::ostringstream sink, err;
        codes_ok = codes_ok && cli_main({"train", "--config", config_path.string(), "--out", out.string(), "--quiet"},
                                        sink, err) == 0;
        codes_ok = codes_ok && cli_main({"eval", "--scenario", test::scene_path("stage2.scene").string(),
                                         "--checkpoint", (out / "stage_2.ckpt").string(), "--config",
                                         config_path.string(), "--trials", "20", "--seed", "5", "--out",
                                         (out / "report.csv").string(), "--traj", (out / "traj.csv").string()},
                                        sink, err) == 0;
    }
    ::unsetenv("PLNAV_THREADS");
    int differing = 0;
    for (const char* f : {"train_log.csv", "manifest.json", "stage_1.ckpt", "stage_2.ckpt", "report.csv", "traj.csv"}) {
        const std::string a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
        if (a.empty() || a != b)
            ++differing;
        compared.push_back(f);
    }
    std::string names;
    for (const auto& n : compared)
        names += (names.empty() ? "" : ", ") + n;
    return {codes_ok && differing == 0,
            fmt("%d of %zu artefacts differ between two runs (%s); exit codes %s", differing, compared.size(),
                names.c_str(), codes_ok ? "ok" : "non-zero")};
}

struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "reward exactness", reward_exactness},
    {2, "pooling oracle", pooling_oracle},
    {3, "irregular obstacle", irregular_obstacle},
    {4, "semantic hazard", semantic_hazard},
    {5, "augmentation statistics", augmentation_statistics},
    {6, "gradient check", gradient_check},
    {7, "advantage oracle", advantage_oracle},
    {8, "desk-scale training", training_smoke},
    {9, "ablation direction", ablation_direction},
    {10, "reproducibility", reproducibility},
};

} // namespace

int main(int argc, char** argv)
{
    std::set<int> selected;
    for (int k = 1; k < argc; ++k)
        selected.insert(std::atoi(argv[k]));
    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (!selected.empty() && !selected.contains(c.id))
            continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
