#include "plnav/nn/policy.hpp"

#include <cmath>

#include "plnav/error.hpp"

namespace plnav::nn {

void PolicyConfig::validate() const
{
    if (scan_width < 1 || conv1_filters < 1 || conv2_filters < 1 || feature_dim < 1 || hidden_dim < 1)
        throw InvariantError("policy config: all dimensions must be positive");
    if (conv1_kernel < 1 || conv1_stride < 1 || conv2_kernel < 1 || conv2_stride < 1)
        throw InvariantError("policy config: kernels and strides must be positive");
    if (attention_reduction < 1 || conv2_filters % attention_reduction != 0)
        throw InvariantError("policy config: attention reduction must divide conv2 filters");
    if (scan_width < conv1_kernel || conv1_length() < conv2_kernel)
        throw InvariantError("policy config: scan width " + std::to_string(scan_width) + " too short for the conv stack");
    if (!std::isfinite(init_log_std))
        throw InvariantError("policy config: init_log_std must be finite");
}

int PolicyConfig::conv1_length() const { return (scan_width - conv1_kernel) / conv1_stride + 1; }

int PolicyConfig::conv2_length() const { return (conv1_length() - conv2_kernel) / conv2_stride + 1; }

std::size_t PolicyConfig::parameter_count() const
{
    auto linear = [](std::size_t in, std::size_t out) { return in * out + out; };
    const std::size_t c1 = conv1_filters, c2 = conv2_filters, h = hidden_dim, f = feature_dim;
    const std::size_t bottleneck = c2 / attention_reduction;
    std::size_t n = 0;
    n += linear(static_cast<std::size_t>(conv1_kernel) * 3, c1);
    n += linear(static_cast<std::size_t>(conv2_kernel) * c1, c2);
    n += linear(c2, bottleneck) + linear(bottleneck, c2) + linear(c2, 1);
    n += linear(static_cast<std::size_t>(flat_dim()) + kBehaviorDims, f);
    n += 4 * h * (f + h) + 4 * h;
    n += linear(h, kActionDims) + kActionDims;
    n += linear(h, 1);
    return n;
}

PolicyBatch::PolicyBatch(const PolicyConfig& cfg, int steps_, int batch_) : steps(steps_), batch(batch_)
{
    if (steps < 1 || batch < 1)
        throw ShapeError("policy batch: steps and batch must be positive");
    const Eigen::Index tb = static_cast<Eigen::Index>(steps) * batch;
    scans = Matrix::Zero(kStackedScans, cfg.scan_width * tb);
    behavior = Matrix::Zero(kBehaviorDims, tb);
    h0 = Matrix::Zero(cfg.hidden_dim, batch);
    c0 = Matrix::Zero(cfg.hidden_dim, batch);
}

void PolicyBatch::set_observation(int t, int b, const Observation& obs)
{
    const Eigen::Index width = scans.cols() / (static_cast<Eigen::Index>(steps) * batch);
    if (static_cast<Eigen::Index>(obs.width) != width || obs.scans.size() != kStackedScans * obs.width)
        throw ShapeError("policy batch: observation width " + std::to_string(obs.width) + ", expected " +
                         std::to_string(width));
    if (t < 0 || t >= steps || b < 0 || b >= batch)
        throw ShapeError("policy batch: slot out of range");
    const Eigen::Index n = static_cast<Eigen::Index>(t) * batch + b;
    for (std::size_t k = 0; k < kStackedScans; ++k)
        for (Eigen::Index j = 0; j < width; ++j)
            scans(static_cast<Eigen::Index>(k), n * width + j) = obs.scans[k * obs.width + static_cast<std::size_t>(j)];
    behavior.col(n) << obs.goal_distance, obs.goal_bearing, obs.v, obs.w;
}

void PolicyBatch::set_hidden(int b, const HiddenState& state)
{
    if (state.h.size() != h0.rows() || state.c.size() != c0.rows())
        throw ShapeError("policy batch: hidden state size mismatch");
    h0.col(b) = state.h;
    c0.col(b) = state.c;
}

PolicyNet::PolicyNet(const PolicyConfig& config, std::uint64_t seed) : PolicyNet(config, std::optional(seed)) {}

PolicyNet PolicyNet::zeros(const PolicyConfig& config) { return PolicyNet(config, std::nullopt); }

PolicyNet::PolicyNet(const PolicyConfig& config, std::optional<std::uint64_t> seed) : config_(config)
{
    config_.validate();
    const auto& c = config_;
    conv1_ = Conv1d(store_, "conv1", static_cast<int>(kStackedScans), c.conv1_filters, c.conv1_kernel, c.conv1_stride);
    conv2_ = Conv1d(store_, "conv2", c.conv1_filters, c.conv2_filters, c.conv2_kernel, c.conv2_stride);
    attention_ = ScseAttention(store_, "attention", c.conv2_filters, c.attention_reduction, c.attention_merge);
    fusion_ = Linear(store_, "fusion", c.flat_dim() + kBehaviorDims, c.feature_dim);
    lstm_ = Lstm(store_, "lstm", c.feature_dim, c.hidden_dim);
    actor_ = Linear(store_, "actor", c.hidden_dim, kActionDims);
    log_std_ = store_.add("actor.log_std", {static_cast<std::size_t>(kActionDims)});
    critic_ = Linear(store_, "critic", c.hidden_dim, 1);

    if (seed)
        initialize(*seed);
    store_[log_std_].value.fill(c.init_log_std);
}

void PolicyNet::initialize(std::uint64_t seed)
{
    Rng rng(seed);
    const double relu_gain = std::sqrt(2.0);
    auto init = [&](std::size_t index, double gain) {
        Tensor& w = store_[index].value;
        init_scaled_uniform(w, w.cols(), gain, rng);
    };
    init(conv1_.weight(), relu_gain);
    init(conv2_.weight(), relu_gain);
    init(attention_.squeeze_fc().weight(), relu_gain);
    init(attention_.excite_fc().weight(), 1.0);
    init(attention_.spatial_weight(), 1.0);
    init(fusion_.weight(), relu_gain);
    {
        // Goal and velocity columns use their own fan-in so four inputs are not drowned by the conv features.
        auto w = store_.value(fusion_.weight());
        const double a = relu_gain * std::sqrt(3.0 / kBehaviorDims);
        std::uniform_real_distribution<double> dist(-a, a);
        for (Eigen::Index col = config_.flat_dim(); col < w.cols(); ++col)
            for (Eigen::Index row = 0; row < w.rows(); ++row)
                w(row, col) = dist(rng);
    }
    init(lstm_.input_weight(), 1.0);
    init(lstm_.hidden_weight(), 1.0);
    init(actor_.weight(), 0.01);
    init(critic_.weight(), 1.0);

    // Forget-gate bias of one keeps early gradients flowing through the cell.
    auto bias = store_.value(lstm_.bias());
    bias.block(config_.hidden_dim, 0, config_.hidden_dim, 1).setOnes();
}

Matrix PolicyNet::conv_encode(const Matrix& scans) const
{
    const Matrix a1 = relu(conv1_.forward(store_, scans, config_.scan_width));
    return relu(conv2_.forward(store_, a1, config_.conv1_length()));
}

Matrix PolicyNet::attend(const Matrix& features) const
{
    return attention_.forward(store_, features, config_.conv2_length());
}

PolicyOutput PolicyNet::forward(const PolicyBatch& in, PolicyTrace* trace) const
{
    const auto& c = config_;
    const Eigen::Index tb = static_cast<Eigen::Index>(in.steps) * in.batch;
    if (in.scans.rows() != static_cast<Eigen::Index>(kStackedScans) || in.scans.cols() != c.scan_width * tb)
        throw ShapeError("policy: scans must be 3 x " + std::to_string(c.scan_width * tb) + ", got " +
                         std::to_string(in.scans.rows()) + " x " + std::to_string(in.scans.cols()));
    if (in.behavior.rows() != kBehaviorDims || in.behavior.cols() != tb)
        throw ShapeError("policy: behaviour block shape mismatch");
    if (in.h0.rows() != c.hidden_dim || in.h0.cols() != in.batch || in.c0.rows() != c.hidden_dim ||
        in.c0.cols() != in.batch)
        throw ShapeError("policy: hidden state shape mismatch");

    Matrix cols1, cols2;
    Matrix pre1 = conv1_.forward(store_, in.scans, c.scan_width, &cols1);
    Matrix pre2 = conv2_.forward(store_, relu(pre1), c.conv1_length(), &cols2);
    ScseAttention::Cache att_cache;
    const Matrix attended = attention_.forward(store_, relu(pre2), c.conv2_length(), trace ? &att_cache : nullptr);

    Matrix fusion_in(c.flat_dim() + kBehaviorDims, tb);
    fusion_in.topRows(c.flat_dim()) = ConstMatrixMap(attended.data(), c.flat_dim(), tb);
    fusion_in.bottomRows(kBehaviorDims) = in.behavior;
    Matrix fusion_pre = fusion_.forward(store_, fusion_in);

    PolicyOutput out;
    Lstm::Cache lstm_cache;
    Matrix lstm_out = lstm_.forward(store_, relu(fusion_pre), in.steps, in.h0, in.c0, out.h_last, out.c_last,
                                    trace ? &lstm_cache : nullptr);
    out.mean = actor_.forward(store_, lstm_out).array().tanh().matrix();
    out.value = critic_.forward(store_, lstm_out);
    out.log_std = store_.value(log_std_).col(0);

    if (trace) {
        trace->recorded = true;
        trace->steps = in.steps;
        trace->batch = in.batch;
        trace->conv1_cols = std::move(cols1);
        trace->conv1_pre = std::move(pre1);
        trace->conv2_cols = std::move(cols2);
        trace->conv2_pre = std::move(pre2);
        trace->attention = std::move(att_cache);
        trace->fusion_in = std::move(fusion_in);
        trace->fusion_pre = std::move(fusion_pre);
        trace->lstm = std::move(lstm_cache);
        trace->lstm_out = std::move(lstm_out);
        trace->mean = out.mean;
    }
    return out;
}

void PolicyNet::backward(const PolicyGradOutput& grad, const PolicyTrace& trace)
{
    if (!trace.recorded)
        throw UsageError("policy backward called without a recorded forward trace");
    const auto& c = config_;
    const Eigen::Index tb = static_cast<Eigen::Index>(trace.steps) * trace.batch;
    if (grad.mean.rows() != kActionDims || grad.mean.cols() != tb || grad.value.rows() != 1 ||
        grad.value.cols() != tb || grad.log_std.size() != kActionDims)
        throw ShapeError("policy backward: output gradient shape mismatch");

    const Matrix grad_actor_pre = (grad.mean.array() * (1.0 - trace.mean.array().square())).matrix();
    Matrix grad_lstm_out = actor_.backward(store_, grad_actor_pre, trace.lstm_out);
    grad_lstm_out += critic_.backward(store_, grad.value, trace.lstm_out);
    store_.grad(log_std_).col(0) += grad.log_std;

    const Matrix grad_fused = lstm_.backward(store_, grad_lstm_out, trace.lstm);
    const Matrix grad_fusion_in =
        fusion_.backward(store_, relu_backward(grad_fused, trace.fusion_pre), trace.fusion_in);

    const Matrix grad_flat = grad_fusion_in.topRows(c.flat_dim());
    const Matrix grad_attended = ConstMatrixMap(grad_flat.data(), c.conv2_filters, c.conv2_length() * tb);
    const Matrix grad_a2 = attention_.backward(store_, grad_attended, trace.attention, c.conv2_length());
    const Matrix grad_a1 =
        conv2_.backward(store_, relu_backward(grad_a2, trace.conv2_pre), trace.conv2_cols, c.conv1_length());
    conv1_.backward(store_, relu_backward(grad_a1, trace.conv1_pre), trace.conv1_cols, c.scan_width);
}

} // namespace plnav::nn
