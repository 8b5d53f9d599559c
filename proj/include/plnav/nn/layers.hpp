#pragma once

#include <string>

#include "plnav/nn/tensor.hpp"
#include "plnav/rng.hpp"

namespace plnav::nn {

// Batched layers. A batch of 1-D feature maps with C channels and length L is a
// C x (L*N) matrix: sample n occupies columns [n*L, (n+1)*L). Vector batches are D x N.
// Forward passes optionally fill a cache; backward passes accumulate parameter
// gradients into the store and return the gradient with respect to the input.

Matrix relu(const Matrix& x);
/// grad * 1[pre > 0]
Matrix relu_backward(const Matrix& grad, const Matrix& pre);
Matrix sigmoid(const Matrix& x);

/// Uniform(-a, a) with a = gain * sqrt(3 / fan_in), i.e. variance gain^2 / fan_in.
void init_scaled_uniform(Tensor& t, std::size_t fan_in, double gain, Rng& rng);

class Linear {
public:
    Linear() = default;
    Linear(ParameterStore& store, const std::string& name, int in_features, int out_features);

    Matrix forward(const ParameterStore& store, const Matrix& x) const;
    Matrix backward(ParameterStore& store, const Matrix& grad_out, const Matrix& x) const;

    std::size_t weight() const noexcept { return weight_; }
    std::size_t bias() const noexcept { return bias_; }
    int in_features() const noexcept { return in_; }
    int out_features() const noexcept { return out_; }

private:
    std::size_t weight_ = 0; ///< out x in
    std::size_t bias_ = 0;   ///< out
    int in_ = 0;
    int out_ = 0;
};

/// Valid (unpadded) strided 1-D convolution.
class Conv1d {
public:
    Conv1d() = default;
    Conv1d(ParameterStore& store, const std::string& name, int in_channels, int out_channels, int kernel, int stride);

    int output_length(int input_length) const;

    /// `cols` receives the unfolded input patches (in*kernel) x (out_len*N) when non-null.
    Matrix forward(const ParameterStore& store, const Matrix& x, int length, Matrix* cols = nullptr) const;
    Matrix backward(ParameterStore& store, const Matrix& grad_out, const Matrix& cols, int length) const;

    std::size_t weight() const noexcept { return weight_; }
    std::size_t bias() const noexcept { return bias_; }
    int in_channels() const noexcept { return in_; }
    int out_channels() const noexcept { return out_; }
    int kernel() const noexcept { return kernel_; }
    int stride() const noexcept { return stride_; }

private:
    Matrix unfold(const Matrix& x, int length) const;

    std::size_t weight_ = 0; ///< out x (kernel*in); patch row = tap*in + channel
    std::size_t bias_ = 0;
    int in_ = 0;
    int out_ = 0;
    int kernel_ = 1;
    int stride_ = 1;
};

enum class AttentionMerge { Add, Max };

/// Concurrent spatial and channel squeeze-and-excitation.
///   channel gate s = sigmoid(W2 relu(W1 mean_L(f) + b1) + b2)       (per sample, per channel)
///   spatial gate q = sigmoid(w_s . f[:, l] + b_s)                     (per position)
///   out = merge(f * s, f * q)
class ScseAttention {
public:
    struct Cache {
        Matrix input;        ///< C x LN
        Matrix squeeze;      ///< C x N
        Matrix hidden_pre;   ///< (C/r) x N
        Matrix channel_gate; ///< C x N
        Matrix spatial_gate; ///< 1 x LN
    };

    ScseAttention() = default;
    ScseAttention(ParameterStore& store, const std::string& name, int channels, int reduction, AttentionMerge merge);

    Matrix forward(const ParameterStore& store, const Matrix& f, int length, Cache* cache = nullptr) const;
    Matrix backward(ParameterStore& store, const Matrix& grad_out, const Cache& cache, int length) const;

    const Linear& squeeze_fc() const noexcept { return fc1_; }
    const Linear& excite_fc() const noexcept { return fc2_; }
    std::size_t spatial_weight() const noexcept { return spatial_w_; }
    std::size_t spatial_bias() const noexcept { return spatial_b_; }
    int channels() const noexcept { return channels_; }
    AttentionMerge merge() const noexcept { return merge_; }

private:
    Linear fc1_;
    Linear fc2_;
    std::size_t spatial_w_ = 0; ///< 1 x C
    std::size_t spatial_b_ = 0; ///< 1
    int channels_ = 0;
    AttentionMerge merge_ = AttentionMerge::Add;
};

/// LSTM with gate order (input, forget, cell candidate, output) and a single bias.
class Lstm {
public:
    struct Cache {
        int steps = 0;
        int batch = 0;
        Matrix inputs; ///< I x TB
        Matrix gates;  ///< 4H x TB, post-activation
        Matrix cells;  ///< H x TB
        Matrix cell_tanh;
        Matrix h_prev; ///< H x TB
        Matrix c_prev; ///< H x TB
    };

    Lstm() = default;
    Lstm(ParameterStore& store, const std::string& name, int input_size, int hidden_size);

    /// inputs are time-major: column t*B + b. h0, c0: H x B. Returns H x TB hidden outputs.
    Matrix forward(const ParameterStore& store, const Matrix& inputs, int steps, const Matrix& h0, const Matrix& c0,
                   Matrix& h_last, Matrix& c_last, Cache* cache = nullptr) const;

    /// Back-propagation through time over the cached window; gradients do not flow into h0/c0.
    Matrix backward(ParameterStore& store, const Matrix& grad_hidden, const Cache& cache) const;

    std::size_t input_weight() const noexcept { return wx_; }
    std::size_t hidden_weight() const noexcept { return wh_; }
    std::size_t bias() const noexcept { return b_; }
    int input_size() const noexcept { return in_; }
    int hidden_size() const noexcept { return hidden_; }

private:
    std::size_t wx_ = 0; ///< 4H x I
    std::size_t wh_ = 0; ///< 4H x H
    std::size_t b_ = 0;  ///< 4H
    int in_ = 0;
    int hidden_ = 0;
};

} // namespace plnav::nn
