#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "plnav/cli.hpp"
#include "plnav/config.hpp"
#include "plnav/env.hpp"
#include "plnav/error.hpp"
#include "plnav/eval.hpp"
#include "plnav/nn/checkpoint.hpp"
#include "plnav/pseudolaser.hpp"
#include "plnav/rl/curriculum.hpp"
#include "plnav/sensing.hpp"

namespace py = pybind11;
using namespace plnav;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T>
py::array_t<T> to_array(const Grid<T>& g)
{
    py::array_t<T> out({g.rows(), g.cols()});
    std::copy(g.data().begin(), g.data().end(), out.mutable_data());
    return out;
}

py::array_t<double> to_array(const std::vector<double>& v)
{
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Grid<double> to_grid(const DoubleArray& a)
{
    if (a.ndim() != 2)
        throw ShapeError("expected a 2-D array");
    const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
    return Grid<double>(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

PseudoLaser to_scan(const DoubleArray& a, double max_range)
{
    if (a.ndim() != 1)
        throw ShapeError("expected a 1-D array");
    return {std::vector<double>(a.data(), a.data() + a.shape(0)), max_range};
}

SensingModel sensing_model(const std::string& variant, int width, int height, double mount_height)
{
    SensingModel m;
    m.variant = sensing_variant_from_string(variant);
    m.camera.width = width;
    m.camera.height = height;
    m.camera.mount_height = mount_height;
    m.camera.validate();
    return m;
}

py::dict report_dict(const EvalReport& r)
{
    py::dict d;
    d["model"] = r.model;
    d["scene"] = r.scene;
    d["trials"] = r.trials;
    d["successes"] = r.successes;
    d["success_rate"] = r.success_rate;
    d["avg_time_s"] = r.avg_time_s;
    d["collisions"] = r.collisions;
    d["timeouts"] = r.timeouts;
    d["mean_reward"] = r.mean_reward;
    return d;
}

std::unique_ptr<Controller> controller_for(const std::string& name)
{
    if (name == "straight")
        return std::make_unique<ScriptedController>(ScriptedKind::GoStraight);
    if (name == "zero")
        return std::make_unique<ScriptedController>(ScriptedKind::Zero);
    if (name == "random")
        return std::make_unique<ScriptedController>(ScriptedKind::Random);
    auto net = std::make_shared<const nn::PolicyNet>(nn::restore_policy(nn::load_checkpoint(name)));
    return std::make_unique<PolicyController>(std::move(net));
}

} // namespace

PYBIND11_MODULE(_plnav, m)
{
    m.doc() = "Vision-based collision-avoidance lab: simulation, sensing, pseudo-laser and evaluation";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<SamplingExhaustedError>(m, "SamplingExhaustedError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<Pose>(m, "Pose")
        .def(py::init([](double x, double y, double heading) { return Pose{{x, y}, heading}; }), py::arg("x"),
             py::arg("y"), py::arg("heading"))
        .def_property_readonly("x", [](const Pose& p) { return p.position.x; })
        .def_property_readonly("y", [](const Pose& p) { return p.position.y; })
        .def_readonly("heading", &Pose::heading);

    py::class_<Scenario, std::shared_ptr<Scenario>>(m, "Scenario")
        .def_property_readonly("bounds",
                               [](const Scenario& s) {
                                   return py::make_tuple(s.bounds.x0, s.bounds.y0, s.bounds.x1, s.bounds.y1);
                               })
        .def_property_readonly("obstacle_count", [](const Scenario& s) { return s.obstacles.size(); })
        .def_property_readonly("hazard_count", [](const Scenario& s) { return s.hazards.size(); })
        .def_property_readonly("agent_poses",
                               [](const Scenario& s) {
                                   std::vector<Pose> out;
                                   for (const Agent& a : s.agents)
                                       out.push_back(a.pose());
                                   return out;
                               })
        .def_property_readonly("goals",
                               [](const Scenario& s) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const Agent& a : s.agents)
                                       out.emplace_back(a.goal.x, a.goal.y);
                                   return out;
                               })
        .def("point_in_obstacle",
             [](const Scenario& s, double x, double y, double z) { return point_in_obstacle({x, y}, z, s); });

    m.def("parse_scenario", [](const std::string& text) { return std::make_shared<Scenario>(parse_scenario(text)); });
    m.def("load_scenario",
          [](const std::filesystem::path& p) { return std::make_shared<Scenario>(load_scenario(p)); });

    m.def("denormalize", [](double a1, double a2) {
        const Velocity v = denormalize(a1, a2);
        return py::make_tuple(v.v, v.w);
    });
    m.def(
        "reward_goal",
        [](std::pair<double, double> prev, std::pair<double, double> cur, std::pair<double, double> goal) {
            return reward_goal({prev.first, prev.second}, {cur.first, cur.second}, {goal.first, goal.second}, {});
        },
        py::arg("prev"), py::arg("cur"), py::arg("goal"));
    m.def("reward_rotational", [](double w) { return reward_rotational(w, {}); });

    m.def("sensing_variants", [] {
        std::vector<std::string> out;
        for (SensingVariant v : all_sensing_variants())
            out.emplace_back(to_string(v));
        return out;
    });
    m.def(
        "render_camera",
        [](const Scenario& s, const Pose& pose, int width, int height, double mount_height) {
            CameraModel cam;
            cam.width = width;
            cam.height = height;
            cam.mount_height = mount_height;
            const CameraFrames f = render_camera(s, pose, cam);
            return py::make_tuple(to_array(f.depth.values), to_array(f.mask.values));
        },
        py::arg("scenario"), py::arg("pose"), py::arg("width") = 128, py::arg("height") = 48,
        py::arg("mount_height") = 0.5);
    m.def(
        "perceive",
        [](const Scenario& s, const Pose& pose, const std::string& variant, int width, int height,
           double mount_height) {
            return to_array(perceive(sensing_model(variant, width, height, mount_height), s, pose).ranges);
        },
        py::arg("scenario"), py::arg("pose"), py::arg("variant") = "depth-pool-sem", py::arg("width") = 128,
        py::arg("height") = 48, py::arg("mount_height") = 0.5);
    m.def(
        "slice_min_pool",
        [](const DoubleArray& masked_depth, double max_range) {
            return to_array(slice_min_pool({to_grid(masked_depth)}, max_range).ranges);
        },
        py::arg("masked_depth"), py::arg("max_range") = 10.0);
    m.def(
        "augment",
        [](const DoubleArray& ranges, double alpha, int radius, double scale, std::uint64_t seed, double max_range) {
            NoiseConfig cfg;
            cfg.alpha = alpha;
            cfg.radius = radius;
            cfg.scale = scale;
            cfg.validate();
            Rng rng(seed);
            return to_array(augment(to_scan(ranges, max_range), cfg, rng).ranges);
        },
        py::arg("ranges"), py::arg("alpha") = 0.5, py::arg("radius") = 8, py::arg("scale") = 0.07,
        py::arg("seed") = 0, py::arg("max_range") = 10.0);

    py::class_<Environment>(m, "Environment")
        .def(py::init([](std::shared_ptr<Scenario> s, bool randomize) {
                 EnvConfig cfg;
                 cfg.randomize = randomize;
                 return Environment(std::move(s), cfg);
             }),
             py::arg("scenario"), py::arg("randomize") = false)
        .def("reset",
             [](Environment& env, std::uint64_t seed) {
                 Rng rng(seed);
                 env.reset(rng);
             },
             py::arg("seed") = 0)
        .def(
            "step",
            [](Environment& env, const std::vector<std::optional<std::pair<double, double>>>& actions) {
                std::vector<std::optional<Action>> acts;
                for (const auto& a : actions)
                    acts.push_back(a ? std::optional(Action::from_normalized(a->first, a->second)) : std::nullopt);
                const StepOutcome out = env.step(acts);
                std::vector<std::string> statuses;
                for (AgentStatus s : out.statuses)
                    statuses.emplace_back(to_string(s));
                return py::make_tuple(out.rewards, statuses);
            },
            py::arg("actions"))
        .def_property_readonly("poses",
                               [](const Environment& env) {
                                   std::vector<Pose> out;
                                   for (const AgentState& a : env.agents())
                                       out.push_back(a.agent.pose());
                                   return out;
                               })
        .def_property_readonly("step_count", &Environment::step_count)
        .def_property_readonly("done", &Environment::done);

    m.def(
        "evaluate",
        [](const std::string& controller, const std::filesystem::path& scenario, int trials, std::uint64_t seed,
           const std::optional<std::filesystem::path>& config, int threads) {
            const rl::TrainConfig cfg = config ? load_train_config(*config) : rl::TrainConfig{};
            EvalOptions opts;
            opts.env = cfg.env;
            opts.sensing = cfg.sensing;
            opts.threads = threads;
            const auto ctl = controller_for(controller);
            py::gil_scoped_release release;
            const EvalReport r = evaluate(*ctl, std::make_shared<const Scenario>(load_scenario(scenario)),
                                          scenario.stem().string(), trials, seed, opts);
            py::gil_scoped_acquire acquire;
            return report_dict(r);
        },
        py::arg("controller"), py::arg("scenario"), py::arg("trials") = 100, py::arg("seed") = 0,
        py::arg("config") = std::nullopt, py::arg("threads") = 0,
        "controller is 'straight', 'zero', 'random' or a checkpoint path");

    m.def(
        "train",
        [](const std::filesystem::path& config, const std::filesystem::path& out_dir) {
            const rl::TrainConfig cfg = load_train_config(config);
            py::gil_scoped_release release;
            const rl::TrainResult r = rl::train_curriculum(cfg, out_dir);
            py::gil_scoped_acquire acquire;
            py::list stages;
            for (const auto& s : r.stages) {
                py::dict d;
                d["id"] = s.id;
                d["steps"] = s.steps;
                d["success_rate"] = s.success_rate;
                d["mean_reward"] = s.mean_reward;
                d["checkpoint"] = s.checkpoint;
                stages.append(d);
            }
            return stages;
        },
        py::arg("config"), py::arg("out_dir"));

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli_main(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr)");
}
