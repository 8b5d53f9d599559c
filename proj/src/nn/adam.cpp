#include "plnav/nn/adam.hpp"

#include <cmath>

#include "plnav/error.hpp"

namespace plnav::nn {

Adam::Adam(const ParameterStore& store, AdamConfig config) : config_(config)
{
    if (!(config.learning_rate > 0.0) || config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 ||
        config.beta2 >= 1.0 || !(config.epsilon > 0.0))
        throw InvariantError("adam: invalid hyperparameters");
    for (const Parameter& p : store.params()) {
        m_.emplace_back(p.value.shape());
        v_.emplace_back(p.value.shape());
    }
}

void Adam::step(ParameterStore& store)
{
    if (store.size() != m_.size())
        throw ShapeError("adam: parameter store layout changed");
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const double lr = config_.learning_rate;
    for (std::size_t k = 0; k < store.size(); ++k) {
        auto value = store[k].value.data();
        auto grad = store[k].grad.data();
        auto m = m_[k].data();
        auto v = v_[k].data();
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
            value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
        }
    }
}

} // namespace plnav::nn
