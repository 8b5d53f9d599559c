#pragma once

#include <cstdint>
#include <vector>

#include "plnav/nn/tensor.hpp"

namespace plnav::nn {

struct AdamConfig {
    double learning_rate = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam over every parameter of a store; moments are kept in store order.
class Adam {
public:
    Adam(const ParameterStore& store, AdamConfig config);

    void step(ParameterStore& store);

    const AdamConfig& config() const noexcept { return config_; }
    void set_learning_rate(double lr) noexcept { config_.learning_rate = lr; }
    std::int64_t steps() const noexcept { return t_; }

    std::vector<Tensor>& first_moments() noexcept { return m_; }
    std::vector<Tensor>& second_moments() noexcept { return v_; }
    const std::vector<Tensor>& first_moments() const noexcept { return m_; }
    const std::vector<Tensor>& second_moments() const noexcept { return v_; }
    void set_steps(std::int64_t t) noexcept { t_ = t; }

private:
    AdamConfig config_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::int64_t t_ = 0;
};

} // namespace plnav::nn
