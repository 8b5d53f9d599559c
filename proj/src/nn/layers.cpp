#include "plnav/nn/layers.hpp"

#include <cmath>

#include "plnav/error.hpp"

namespace plnav::nn {

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& grad, const Matrix& pre)
{
    return (pre.array() > 0.0).select(grad, 0.0);
}

Matrix sigmoid(const Matrix& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

namespace {

// Fixed summation order; Eigen's vectorized reductions peel by pointer alignment.
void add_row_sums(MatrixMap target, const Matrix& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            acc += m(r, c);
        target(r, 0) += acc;
    }
}

} // namespace

void init_scaled_uniform(Tensor& t, std::size_t fan_in, double gain, Rng& rng)
{
    const double a = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-a, a);
    for (double& v : t.data())
        v = dist(rng);
}

// ---------------------------------------------------------------------------- Linear

Linear::Linear(ParameterStore& store, const std::string& name, int in_features, int out_features)
    : in_(in_features), out_(out_features)
{
    weight_ = store.add(name + ".weight", {static_cast<std::size_t>(out_features), static_cast<std::size_t>(in_features)});
    bias_ = store.add(name + ".bias", {static_cast<std::size_t>(out_features)});
}

Matrix Linear::forward(const ParameterStore& store, const Matrix& x) const
{
    if (x.rows() != in_)
        throw ShapeError("linear: expected " + std::to_string(in_) + " input rows, got " + std::to_string(x.rows()));
    Matrix y = store.value(weight_) * x;
    y.colwise() += store.value(bias_).col(0);
    return y;
}

Matrix Linear::backward(ParameterStore& store, const Matrix& grad_out, const Matrix& x) const
{
    store.grad(weight_).noalias() += grad_out * x.transpose();
    add_row_sums(store.grad(bias_), grad_out);
    return store.value(weight_).transpose() * grad_out;
}

// ---------------------------------------------------------------------------- Conv1d

Conv1d::Conv1d(ParameterStore& store, const std::string& name, int in_channels, int out_channels, int kernel, int stride)
    : in_(in_channels), out_(out_channels), kernel_(kernel), stride_(stride)
{
    if (kernel < 1 || stride < 1)
        throw InvariantError("conv1d: kernel and stride must be positive");
    weight_ = store.add(name + ".weight",
                        {static_cast<std::size_t>(out_channels), static_cast<std::size_t>(kernel * in_channels)});
    bias_ = store.add(name + ".bias", {static_cast<std::size_t>(out_channels)});
}

int Conv1d::output_length(int input_length) const
{
    if (input_length < kernel_)
        throw ShapeError("conv1d: input length " + std::to_string(input_length) + " shorter than kernel");
    return (input_length - kernel_) / stride_ + 1;
}

Matrix Conv1d::unfold(const Matrix& x, int length) const
{
    if (x.rows() != in_ || length <= 0 || x.cols() % length != 0)
        throw ShapeError("conv1d: input is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                         ", expected " + std::to_string(in_) + " channels of length " + std::to_string(length));
    const int out_len = output_length(length);
    const Eigen::Index n = x.cols() / length;
    Matrix cols(static_cast<Eigen::Index>(kernel_) * in_, out_len * n);
    for (Eigen::Index s = 0; s < n; ++s)
        for (int l = 0; l < out_len; ++l)
            for (int k = 0; k < kernel_; ++k)
                cols.block(k * in_, s * out_len + l, in_, 1) = x.col(s * length + l * stride_ + k);
    return cols;
}

Matrix Conv1d::forward(const ParameterStore& store, const Matrix& x, int length, Matrix* cols_out) const
{
    Matrix cols = unfold(x, length);
    Matrix y = store.value(weight_) * cols;
    y.colwise() += store.value(bias_).col(0);
    if (cols_out)
        *cols_out = std::move(cols);
    return y;
}

Matrix Conv1d::backward(ParameterStore& store, const Matrix& grad_out, const Matrix& cols, int length) const
{
    store.grad(weight_).noalias() += grad_out * cols.transpose();
    add_row_sums(store.grad(bias_), grad_out);
    const Matrix grad_cols = store.value(weight_).transpose() * grad_out;

    const int out_len = output_length(length);
    const Eigen::Index n = grad_out.cols() / out_len;
    Matrix grad_x = Matrix::Zero(in_, length * n);
    for (Eigen::Index s = 0; s < n; ++s)
        for (int l = 0; l < out_len; ++l)
            for (int k = 0; k < kernel_; ++k)
                grad_x.col(s * length + l * stride_ + k) += grad_cols.block(k * in_, s * out_len + l, in_, 1);
    return grad_x;
}

// ---------------------------------------------------------------------------- ScseAttention

ScseAttention::ScseAttention(ParameterStore& store, const std::string& name, int channels, int reduction,
                             AttentionMerge merge)
    : channels_(channels), merge_(merge)
{
    if (reduction < 1 || channels % reduction != 0)
        throw InvariantError("attention: reduction must divide the channel count");
    fc1_ = Linear(store, name + ".squeeze", channels, channels / reduction);
    fc2_ = Linear(store, name + ".excite", channels / reduction, channels);
    spatial_w_ = store.add(name + ".spatial.weight", {1, static_cast<std::size_t>(channels)});
    spatial_b_ = store.add(name + ".spatial.bias", {1});
}

Matrix ScseAttention::forward(const ParameterStore& store, const Matrix& f, int length, Cache* cache) const
{
    if (f.rows() != channels_ || length <= 0 || f.cols() % length != 0)
        throw ShapeError("attention: feature map shape mismatch");
    const Eigen::Index n = f.cols() / length;

    Matrix squeeze(channels_, n);
    for (Eigen::Index s = 0; s < n; ++s)
        squeeze.col(s) = f.middleCols(s * length, length).rowwise().mean();
    Matrix hidden_pre = fc1_.forward(store, squeeze);
    Matrix channel_gate = sigmoid(fc2_.forward(store, relu(hidden_pre)));

    Matrix spatial_pre = store.value(spatial_w_) * f;
    spatial_pre.array() += store.value(spatial_b_)(0, 0);
    Matrix spatial_gate = sigmoid(spatial_pre);

    Matrix out(f.rows(), f.cols());
    for (Eigen::Index s = 0; s < n; ++s) {
        const auto block = f.middleCols(s * length, length);
        const auto q = spatial_gate.middleCols(s * length, length);
        const Matrix by_channel = block.array().colwise() * channel_gate.col(s).array();
        const Matrix by_position = block.array().rowwise() * q.row(0).array();
        if (merge_ == AttentionMerge::Add)
            out.middleCols(s * length, length) = by_channel + by_position;
        else
            out.middleCols(s * length, length) = by_channel.cwiseMax(by_position);
    }

    if (cache) {
        cache->input = f;
        cache->squeeze = std::move(squeeze);
        cache->hidden_pre = std::move(hidden_pre);
        cache->channel_gate = std::move(channel_gate);
        cache->spatial_gate = std::move(spatial_gate);
    }
    return out;
}

Matrix ScseAttention::backward(ParameterStore& store, const Matrix& grad_out, const Cache& cache, int length) const
{
    const Matrix& f = cache.input;
    const Matrix& s = cache.channel_gate;
    const Matrix& q = cache.spatial_gate;
    const Eigen::Index n = f.cols() / length;

    Matrix grad_f(f.rows(), f.cols());
    Matrix grad_s = Matrix::Zero(channels_, n);
    Matrix grad_q = Matrix::Zero(1, f.cols());
    for (Eigen::Index smp = 0; smp < n; ++smp) {
        for (int l = 0; l < length; ++l) {
            const Eigen::Index col = smp * length + l;
            const double ql = q(0, col);
            for (int c = 0; c < channels_; ++c) {
                const double g = grad_out(c, col);
                const double fv = f(c, col);
                const double sc = s(c, smp);
                if (merge_ == AttentionMerge::Add) {
                    grad_f(c, col) = g * (sc + ql);
                    grad_s(c, smp) += g * fv;
                    grad_q(0, col) += g * fv;
                } else if (fv * sc >= fv * ql) {
                    grad_f(c, col) = g * sc;
                    grad_s(c, smp) += g * fv;
                } else {
                    grad_f(c, col) = g * ql;
                    grad_q(0, col) += g * fv;
                }
            }
        }
    }

    // Channel branch.
    const Matrix grad_excite_pre = (grad_s.array() * s.array() * (1.0 - s.array())).matrix();
    const Matrix hidden = relu(cache.hidden_pre);
    const Matrix grad_hidden = fc2_.backward(store, grad_excite_pre, hidden);
    const Matrix grad_squeeze = fc1_.backward(store, relu_backward(grad_hidden, cache.hidden_pre), cache.squeeze);
    for (Eigen::Index smp = 0; smp < n; ++smp)
        grad_f.middleCols(smp * length, length).colwise() += grad_squeeze.col(smp) / static_cast<double>(length);

    // Spatial branch.
    const Matrix grad_spatial_pre = (grad_q.array() * q.array() * (1.0 - q.array())).matrix();
    store.grad(spatial_w_).noalias() += grad_spatial_pre * f.transpose();
    add_row_sums(store.grad(spatial_b_), grad_spatial_pre);
    grad_f.noalias() += store.value(spatial_w_).transpose() * grad_spatial_pre;
    return grad_f;
}

// ---------------------------------------------------------------------------- Lstm

Lstm::Lstm(ParameterStore& store, const std::string& name, int input_size, int hidden_size)
    : in_(input_size), hidden_(hidden_size)
{
    const auto h4 = static_cast<std::size_t>(4 * hidden_size);
    wx_ = store.add(name + ".input_weight", {h4, static_cast<std::size_t>(input_size)});
    wh_ = store.add(name + ".hidden_weight", {h4, static_cast<std::size_t>(hidden_size)});
    b_ = store.add(name + ".bias", {h4});
}

Matrix Lstm::forward(const ParameterStore& store, const Matrix& inputs, int steps, const Matrix& h0, const Matrix& c0,
                     Matrix& h_last, Matrix& c_last, Cache* cache) const
{
    const int H = hidden_;
    if (inputs.rows() != in_ || steps <= 0 || inputs.cols() % steps != 0)
        throw ShapeError("lstm: input shape mismatch");
    const Eigen::Index batch = inputs.cols() / steps;
    if (h0.rows() != H || c0.rows() != H || h0.cols() != batch || c0.cols() != batch)
        throw ShapeError("lstm: hidden state shape mismatch");

    Matrix pre_x = store.value(wx_) * inputs;
    pre_x.colwise() += store.value(b_).col(0);
    const auto wh = store.value(wh_);

    Matrix outputs(H, inputs.cols());
    if (cache) {
        cache->steps = steps;
        cache->batch = static_cast<int>(batch);
        cache->inputs = inputs;
        cache->gates.resize(4 * H, inputs.cols());
        cache->cells.resize(H, inputs.cols());
        cache->cell_tanh.resize(H, inputs.cols());
        cache->h_prev.resize(H, inputs.cols());
        cache->c_prev.resize(H, inputs.cols());
    }

    Matrix h = h0;
    Matrix c = c0;
    Matrix gates(4 * H, batch);
    for (int t = 0; t < steps; ++t) {
        gates = pre_x.middleCols(t * batch, batch);
        gates.noalias() += wh * h;
        gates.topRows(2 * H) = sigmoid(gates.topRows(2 * H));
        gates.middleRows(2 * H, H) = gates.middleRows(2 * H, H).array().tanh().matrix();
        gates.bottomRows(H) = sigmoid(gates.bottomRows(H));

        if (cache) {
            cache->h_prev.middleCols(t * batch, batch) = h;
            cache->c_prev.middleCols(t * batch, batch) = c;
        }
        c = (gates.middleRows(H, H).array() * c.array() + gates.topRows(H).array() * gates.middleRows(2 * H, H).array())
                .matrix();
        const Matrix tc = c.array().tanh().matrix();
        h = (gates.bottomRows(H).array() * tc.array()).matrix();
        outputs.middleCols(t * batch, batch) = h;
        if (cache) {
            cache->gates.middleCols(t * batch, batch) = gates;
            cache->cells.middleCols(t * batch, batch) = c;
            cache->cell_tanh.middleCols(t * batch, batch) = tc;
        }
    }
    h_last = std::move(h);
    c_last = std::move(c);
    return outputs;
}

Matrix Lstm::backward(ParameterStore& store, const Matrix& grad_hidden, const Cache& cache) const
{
    const int H = hidden_;
    const Eigen::Index batch = cache.batch;
    const auto wh = store.value(wh_);

    Matrix grad_pre(4 * H, grad_hidden.cols());
    Matrix dh_next = Matrix::Zero(H, batch);
    Matrix dc_next = Matrix::Zero(H, batch);
    for (int t = cache.steps - 1; t >= 0; --t) {
        const Eigen::Index c0 = t * batch;
        const auto gates = cache.gates.middleCols(c0, batch);
        const auto i = gates.topRows(H).array();
        const auto f = gates.middleRows(H, H).array();
        const auto g = gates.middleRows(2 * H, H).array();
        const auto o = gates.bottomRows(H).array();
        const auto tc = cache.cell_tanh.middleCols(c0, batch).array();
        const auto c_prev = cache.c_prev.middleCols(c0, batch).array();

        const Matrix dh = grad_hidden.middleCols(c0, batch) + dh_next;
        const auto dha = dh.array();
        const Matrix dc = (dha * o * (1.0 - tc * tc) + dc_next.array()).matrix();
        const auto dca = dc.array();

        auto block = grad_pre.middleCols(c0, batch);
        block.topRows(H) = (dca * g * i * (1.0 - i)).matrix();
        block.middleRows(H, H) = (dca * c_prev * f * (1.0 - f)).matrix();
        block.middleRows(2 * H, H) = (dca * i * (1.0 - g * g)).matrix();
        block.bottomRows(H) = (dha * tc * o * (1.0 - o)).matrix();

        dc_next = (dca * f).matrix();
        dh_next.noalias() = wh.transpose() * block;
    }
    store.grad(wh_).noalias() += grad_pre * cache.h_prev.transpose();
    store.grad(wx_).noalias() += grad_pre * cache.inputs.transpose();
    add_row_sums(store.grad(b_), grad_pre);
    return store.value(wx_).transpose() * grad_pre;
}

} // namespace plnav::nn
