#pragma once

#include <cstdint>
#include <optional>

#include "plnav/nn/layers.hpp"
#include "plnav/pseudolaser.hpp"

namespace plnav::nn {

/// Goal distance, goal bearing, v, w.
inline constexpr int kBehaviorDims = 4;
inline constexpr int kActionDims = 2;

struct PolicyConfig {
    int scan_width = 128;
    int conv1_filters = 32;
    int conv1_kernel = 5;
    int conv1_stride = 2;
    int conv2_filters = 32;
    int conv2_kernel = 3;
    int conv2_stride = 2;
    int attention_reduction = 2;
    AttentionMerge attention_merge = AttentionMerge::Add;
    int feature_dim = 256; ///< fusion output, LSTM input
    int hidden_dim = 256;  ///< LSTM state
    double init_log_std = -0.6931471805599453; ///< log(0.5)

    void validate() const;
    int conv1_length() const;
    int conv2_length() const;
    int flat_dim() const { return conv2_filters * conv2_length(); }
    std::size_t parameter_count() const;

    bool operator==(const PolicyConfig&) const = default;
};

struct HiddenState {
    Vector h;
    Vector c;

    static HiddenState zeros(int dim) { return {Vector::Zero(dim), Vector::Zero(dim)}; }
};

/// Inputs for `steps` time steps of `batch` parallel sequences, time-major (column t*B + b).
struct PolicyBatch {
    int steps = 1;
    int batch = 1;
    Matrix scans;    ///< 3 x (W * T*B); sample n occupies columns [n*W, (n+1)*W)
    Matrix behavior; ///< 4 x T*B
    Matrix h0;       ///< H x B
    Matrix c0;       ///< H x B

    PolicyBatch() = default;
    PolicyBatch(const PolicyConfig& cfg, int steps, int batch);

    void set_observation(int t, int b, const Observation& obs);
    void set_hidden(int b, const HiddenState& state);
};

struct PolicyOutput {
    Matrix mean;    ///< 2 x TB, tanh-squashed
    Vector log_std; ///< 2
    Matrix value;   ///< 1 x TB
    Matrix h_last;  ///< H x B
    Matrix c_last;  ///< H x B
};

/// Everything the backward pass needs from a forward pass.
struct PolicyTrace {
    bool recorded = false;
    int steps = 0;
    int batch = 0;
    Matrix conv1_cols, conv1_pre;
    Matrix conv2_cols, conv2_pre;
    ScseAttention::Cache attention;
    Matrix fusion_in, fusion_pre;
    Lstm::Cache lstm;
    Matrix lstm_out;
    Matrix mean;
};

/// Loss gradients with respect to the policy outputs.
struct PolicyGradOutput {
    Matrix mean;    ///< 2 x TB
    Vector log_std; ///< 2
    Matrix value;   ///< 1 x TB
};

/// Actor-critic: conv encoder, scSE attention, fusion with behaviour, LSTM, Gaussian actor
/// with a state-independent log-std, and a value head.
class PolicyNet {
public:
    explicit PolicyNet(const PolicyConfig& config, std::uint64_t seed = 0);
    /// All parameters zero except log_std.
    static PolicyNet zeros(const PolicyConfig& config);

    const PolicyConfig& config() const noexcept { return config_; }
    ParameterStore& params() noexcept { return store_; }
    const ParameterStore& params() const noexcept { return store_; }

    PolicyOutput forward(const PolicyBatch& in, PolicyTrace* trace = nullptr) const;
    /// Accumulates parameter gradients. Throws if `trace` was not recorded.
    void backward(const PolicyGradOutput& grad, const PolicyTrace& trace);

    /// conv1 -> relu -> conv2 -> relu over a 3 x (W*N) batch.
    Matrix conv_encode(const Matrix& scans) const;
    Matrix attend(const Matrix& features) const;

    const Conv1d& conv1() const noexcept { return conv1_; }
    const Conv1d& conv2() const noexcept { return conv2_; }
    const ScseAttention& attention() const noexcept { return attention_; }
    const Linear& fusion() const noexcept { return fusion_; }
    const Lstm& lstm() const noexcept { return lstm_; }
    const Linear& actor() const noexcept { return actor_; }
    const Linear& critic() const noexcept { return critic_; }
    std::size_t log_std_index() const noexcept { return log_std_; }

private:
    PolicyNet(const PolicyConfig& config, std::optional<std::uint64_t> seed);
    void initialize(std::uint64_t seed);

    PolicyConfig config_;
    ParameterStore store_;
    Conv1d conv1_;
    Conv1d conv2_;
    ScseAttention attention_;
    Linear fusion_;
    Lstm lstm_;
    Linear actor_;
    std::size_t log_std_ = 0;
    Linear critic_;
};

} // namespace plnav::nn
