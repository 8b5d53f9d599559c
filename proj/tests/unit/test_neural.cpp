#include <doctest.h>

#include <cmath>
#include <fstream>

#include "reference_policy.hpp"
#include "plnav/error.hpp"
#include "plnav/nn/adam.hpp"
#include "plnav/nn/checkpoint.hpp"
#include "test_helpers.hpp"

using namespace plnav;
using namespace plnav::nn;
using namespace plnav::test;

namespace {

PolicyConfig tiny_config(AttentionMerge merge = AttentionMerge::Add)
{
    PolicyConfig c;
    c.scan_width = 16;
    c.conv1_filters = 3;
    c.conv2_filters = 4;
    c.feature_dim = 6;
    c.hidden_dim = 5;
    c.attention_merge = merge;
    return c;
}

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-7}); }

} // namespace

TEST_CASE("default policy has the reference parameter count")
{
    const PolicyConfig cfg;
    CHECK(cfg.conv1_length() == 62);
    CHECK(cfg.conv2_length() == 30);
    CHECK(cfg.flat_dim() == 960);
    CHECK(cfg.parameter_count() == 777846);
    const PolicyNet net(cfg, 1);
    CHECK(net.params().scalar_count() == 777846);
    CHECK(tiny_config().parameter_count() == PolicyNet(tiny_config(), 1).params().scalar_count());
}

TEST_CASE("initialization")
{
    const PolicyNet net(PolicyConfig{}, 3);
    const RefParams p(net.params());
    const int H = 256;
    for (int j = 0; j < H; ++j) {
        CHECK(p.at("lstm.bias", static_cast<std::size_t>(H + j)) == 1.0);
        CHECK(p.at("lstm.bias", static_cast<std::size_t>(j)) == 0.0);
    }
    CHECK(p.at("actor.log_std", 0) == doctest::Approx(std::log(0.5)));
    // Uniform(-a, a) with a = gain * sqrt(3 / fan_in).
    const double actor_bound = 0.01 * std::sqrt(3.0 / H);
    for (double v : p.tensor("actor.weight").data())
        CHECK(std::abs(v) <= actor_bound);
    // Conv-feature columns scale with the full fan-in, goal/velocity columns with their own four.
    const double fusion_bound = std::sqrt(2.0) * std::sqrt(3.0 / 964);
    const double behavior_bound = std::sqrt(2.0) * std::sqrt(3.0 / 4);
    const Tensor& fw = p.tensor("fusion.weight");
    double max_abs = 0;
    double max_behavior = 0;
    for (std::size_t r = 0; r < 256; ++r) {
        for (std::size_t col = 0; col < 960; ++col)
            max_abs = std::max(max_abs, std::abs(p.at("fusion.weight", r, col)));
        for (std::size_t col = 960; col < 964; ++col)
            max_behavior = std::max(max_behavior, std::abs(p.at("fusion.weight", r, col)));
    }
    CHECK(fw.cols() == 964);
    CHECK(max_abs <= fusion_bound);
    CHECK(max_abs > 0.9 * fusion_bound);
    CHECK(max_behavior <= behavior_bound);
    CHECK(max_behavior > 0.9 * behavior_bound);
    // Same seed, same network.
    CHECK(PolicyNet(PolicyConfig{}, 3).params()[0].value.data()[5] == net.params()[0].value.data()[5]);
}

TEST_CASE("policy config validation")
{
    PolicyConfig c;
    c.scan_width = 4;
    CHECK_THROWS_AS(c.validate(), InvariantError);
    c = {};
    c.hidden_dim = 0;
    CHECK_THROWS_AS(c.validate(), InvariantError);
}

TEST_CASE("linear and conv layers match loop references")
{
    Rng rng(1);
    ParameterStore store;
    const Linear lin(store, "fc", 5, 3);
    const Conv1d conv(store, "conv", 2, 4, 3, 2);
    randomize_parameters(store, rng);

    Matrix x(5, 2);
    for (double& v : std::span(x.data(), 10))
        v = uniform(rng, -1, 1);
    const Matrix y = lin.forward(store, x);
    const RefParams p(store);
    for (int n = 0; n < 2; ++n)
        for (std::size_t o = 0; o < 3; ++o) {
            double acc = p.at("fc.bias", o);
            for (std::size_t i = 0; i < 5; ++i)
                acc += p.at("fc.weight", o, i) * x(static_cast<Eigen::Index>(i), n);
            CHECK(y(static_cast<Eigen::Index>(o), n) == doctest::Approx(acc).epsilon(1e-14));
        }

    const int len = 9;
    Matrix signal(2, len * 2);
    for (double& v : std::span(signal.data(), static_cast<std::size_t>(signal.size())))
        v = uniform(rng, -1, 1);
    const Matrix out = conv.forward(store, signal, len);
    CHECK(conv.output_length(len) == 4);
    for (int n = 0; n < 2; ++n) {
        std::vector<std::vector<double>> xs(2, std::vector<double>(len));
        for (int ch = 0; ch < 2; ++ch)
            for (int l = 0; l < len; ++l)
                xs[static_cast<std::size_t>(ch)][static_cast<std::size_t>(l)] = signal(ch, n * len + l);
        const auto ref = ref_conv(p, "conv", xs, 3, 2);
        for (int o = 0; o < 4; ++o)
            for (int l = 0; l < 4; ++l)
                CHECK(out(o, n * 4 + l) == doctest::Approx(ref[static_cast<std::size_t>(o)][static_cast<std::size_t>(l)]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(conv.forward(store, Matrix(3, 9), 9), ShapeError);
}

TEST_CASE("lstm matches a scalar hand computation")
{
    ParameterStore store;
    const Lstm lstm(store, "lstm", 1, 1);
    // Gates i, f, g, o.
    const double wx[4] = {0.5, -0.3, 0.8, 0.2};
    const double wh[4] = {0.1, 0.4, -0.6, 0.7};
    const double bias[4] = {0.05, 1.0, -0.1, 0.3};
    for (int g = 0; g < 4; ++g) {
        store.value(lstm.input_weight())(g, 0) = wx[g];
        store.value(lstm.hidden_weight())(g, 0) = wh[g];
        store.value(lstm.bias())(g, 0) = bias[g];
    }
    const double xs[3] = {1.0, -2.0, 0.5};
    double h = 0.2, c = -0.1;
    Matrix inputs(1, 3);
    inputs << xs[0], xs[1], xs[2];
    Matrix h0(1, 1), c0(1, 1), h_last, c_last;
    h0 << h;
    c0 << c;
    const Matrix out = lstm.forward(store, inputs, 3, h0, c0, h_last, c_last);
    for (int t = 0; t < 3; ++t) {
        const double i = ref_sigmoid(wx[0] * xs[t] + wh[0] * h + bias[0]);
        const double f = ref_sigmoid(wx[1] * xs[t] + wh[1] * h + bias[1]);
        const double g = std::tanh(wx[2] * xs[t] + wh[2] * h + bias[2]);
        const double o = ref_sigmoid(wx[3] * xs[t] + wh[3] * h + bias[3]);
        c = f * c + i * g;
        h = o * std::tanh(c);
        CHECK(out(0, t) == doctest::Approx(h).epsilon(1e-14));
    }
    CHECK(h_last(0, 0) == doctest::Approx(h).epsilon(1e-14));
    CHECK(c_last(0, 0) == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("policy forward matches the loop reference")
{
    for (AttentionMerge merge : {AttentionMerge::Add, AttentionMerge::Max}) {
        const PolicyConfig cfg = tiny_config(merge);
        PolicyNet net(cfg, 5);
        Rng rng(6);
        randomize_parameters(net.params(), rng);
        const RefInput in = random_ref_input(cfg, 3, 2, rng);
        const PolicyOutput out = net.forward(to_policy_batch(cfg, in));
        const RefOutput ref = reference_forward(net, in);
        for (std::size_t k = 0; k < ref.mean.size(); ++k) {
            const auto col = static_cast<Eigen::Index>(k);
            CHECK(out.mean(0, col) == doctest::Approx(ref.mean[k][0]).epsilon(1e-12));
            CHECK(out.mean(1, col) == doctest::Approx(ref.mean[k][1]).epsilon(1e-12));
            CHECK(out.value(0, col) == doctest::Approx(ref.value[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("default-size policy forward matches the loop reference")
{
    const PolicyConfig cfg;
    PolicyNet net(cfg, 8);
    Rng rng(9);
    const RefInput in = random_ref_input(cfg, 2, 1, rng);
    const PolicyOutput out = net.forward(to_policy_batch(cfg, in));
    const RefOutput ref = reference_forward(net, in);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(out.mean(0, static_cast<Eigen::Index>(k)) == doctest::Approx(ref.mean[k][0]).epsilon(1e-10));
        CHECK(out.value(0, static_cast<Eigen::Index>(k)) == doctest::Approx(ref.value[k]).epsilon(1e-10));
    }
}

TEST_CASE("every policy parameter matches central finite differences")
{
    for (AttentionMerge merge : {AttentionMerge::Add, AttentionMerge::Max}) {
        const PolicyConfig cfg = tiny_config(merge);
        PolicyNet net(cfg, 10);
        Rng rng(11);
        randomize_parameters(net.params(), rng);
        const RefInput in = random_ref_input(cfg, 3, 2, rng);
        const TestLoss loss(6, rng);

        PolicyTrace trace;
        const PolicyOutput out = net.forward(to_policy_batch(cfg, in), &trace);
        net.params().zero_grad();
        net.backward(loss.grad(out), trace);

        const double eps = 1e-5;
        double worst = 0.0;
        std::string worst_name;
        for (auto& param : net.params().params()) {
            auto values = param.value.data();
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double keep = values[i];
                values[i] = keep + eps;
                const double up = loss(reference_forward(net, in));
                values[i] = keep - eps;
                const double down = loss(reference_forward(net, in));
                values[i] = keep;
                const double err = rel_error(param.grad.data()[i], (up - down) / (2 * eps));
                if (err > worst) {
                    worst = err;
                    worst_name = param.name + "[" + std::to_string(i) + "]";
                }
            }
        }
        CAPTURE(worst_name);
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("backward requires a recorded trace and matching shapes")
{
    PolicyNet net(tiny_config(), 1);
    PolicyGradOutput g{Matrix::Zero(2, 1), Vector::Zero(2), Matrix::Zero(1, 1)};
    CHECK_THROWS_AS(net.backward(g, PolicyTrace{}), UsageError);
    PolicyBatch bad(tiny_config(), 1, 1);
    bad.behavior = Matrix::Zero(3, 1);
    CHECK_THROWS_AS(net.forward(bad), ShapeError);
}

TEST_CASE("zero network outputs zero means and values")
{
    const PolicyNet net = PolicyNet::zeros(tiny_config());
    Rng rng(1);
    const auto out = net.forward(to_policy_batch(tiny_config(), random_ref_input(tiny_config(), 2, 2, rng)));
    CHECK(out.mean.cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.value.cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.log_std(0) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("adam step follows the bias-corrected update")
{
    ParameterStore store;
    store.add("w", {2});
    store[0].value[0] = 1.0;
    store[0].value[1] = -1.0;
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    Adam adam(store, cfg);
    store[0].grad[0] = 0.5;
    store[0].grad[1] = -2.0;
    adam.step(store);
    // First step: m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
    CHECK(store[0].value[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
    CHECK(store[0].value[1] == doctest::Approx(-1.0 + 0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-14));
    store[0].grad[0] = 0.0;
    adam.step(store);
    const double m = 0.9 * 0.05, v = 0.999 * 0.00025;
    const double expected = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.998001)) + 1e-8);
    CHECK(store[0].value[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(adam.steps() == 2);
}

TEST_CASE("gradient clipping helpers")
{
    ParameterStore store;
    store.add("a", {2});
    store.add("b", {1});
    store[0].grad[0] = 3;
    store[0].grad[1] = 0;
    store[1].grad[0] = 4;
    CHECK(store.grad_norm() == 5.0);
    store.scale_grad(0.1);
    CHECK(store.grad_norm() == doctest::Approx(0.5));
    store[1].grad[0] = std::nan("");
    CHECK_FALSE(store.grads_finite());
}

TEST_CASE("checkpoint round trip restores an identical network and optimizer")
{
    const auto dir = test::scratch_dir("neural");
    PolicyNet net(tiny_config(AttentionMerge::Max), 21);
    Adam adam(net.params(), {});
    Rng rng(2);
    for (auto& p : net.params().params())
        for (double& g : p.grad.data())
            g = uniform(rng, -1, 1);
    adam.step(net.params());

    save_checkpoint(dir / "a.ckpt", make_checkpoint(net, 0xabcdef, &adam));
    const Checkpoint ck = load_checkpoint(dir / "a.ckpt");
    CHECK(ck.config_hash == 0xabcdef);
    CHECK(ck.policy == net.config());
    const PolicyNet back = restore_policy(ck);
    for (std::size_t k = 0; k < net.params().size(); ++k) {
        CHECK(back.params()[k].name == net.params()[k].name);
        CHECK(std::equal(back.params()[k].value.data().begin(), back.params()[k].value.data().end(),
                         net.params()[k].value.data().begin()));
    }
    Adam fresh(back.params(), {});
    CHECK(restore_optimizer(ck, fresh));
    CHECK(fresh.steps() == 1);
    CHECK(fresh.second_moments()[3].data()[0] == adam.second_moments()[3].data()[0]);

    // Serialization is byte-stable.
    CHECK(serialize_checkpoint(ck) == serialize_checkpoint(make_checkpoint(back, 0xabcdef, &fresh)));
}

TEST_CASE("corrupted checkpoints are rejected")
{
    const PolicyNet net(tiny_config(), 1);
    std::string bytes = serialize_checkpoint(make_checkpoint(net, 1));
    CHECK_NOTHROW(deserialize_checkpoint(bytes));
    std::string flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x20;
    CHECK_THROWS_AS(deserialize_checkpoint(flipped), IoError);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), IoError);
    std::string magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_checkpoint(magic), IoError);
    CHECK_THROWS_AS(load_checkpoint(test::scratch_dir("neural_missing") / "none.ckpt"), IoError);
    // A checkpoint without optimizer state leaves the optimizer alone.
    Adam adam(net.params(), {});
    CHECK_FALSE(restore_optimizer(deserialize_checkpoint(bytes), adam));
}

TEST_CASE("fnv1a64 reference values")
{
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
