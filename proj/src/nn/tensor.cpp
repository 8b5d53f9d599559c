#include "plnav/nn/tensor.hpp"

#include <cmath>
#include <numeric>

#include "plnav/error.hpp"

namespace plnav::nn {

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape))
{
    const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
    data_.assign(n, fill);
}

MatrixMap Tensor::matrix() noexcept
{
    return MatrixMap(data_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(size() / std::max<std::size_t>(rows(), 1)));
}

ConstMatrixMap Tensor::matrix() const noexcept
{
    return ConstMatrixMap(data_.data(), static_cast<Eigen::Index>(rows()),
                          static_cast<Eigen::Index>(size() / std::max<std::size_t>(rows(), 1)));
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept
{
    for (double v : data_)
        if (!std::isfinite(v))
            return false;
    return true;
}

std::size_t ParameterStore::add(std::string name, std::vector<std::size_t> shape)
{
    Parameter p;
    p.name = std::move(name);
    p.value = Tensor(shape);
    p.grad = Tensor(std::move(shape));
    params_.push_back(std::move(p));
    return params_.size() - 1;
}

std::size_t ParameterStore::scalar_count() const noexcept
{
    std::size_t n = 0;
    for (const Parameter& p : params_)
        n += p.value.size();
    return n;
}

void ParameterStore::zero_grad() noexcept
{
    for (Parameter& p : params_)
        p.grad.fill(0.0);
}

double ParameterStore::grad_norm() const noexcept
{
    double sq = 0.0;
    for (const Parameter& p : params_)
        for (double g : p.grad.data())
            sq += g * g;
    return std::sqrt(sq);
}

void ParameterStore::scale_grad(double factor) noexcept
{
    for (Parameter& p : params_)
        for (double& g : p.grad.data())
            g *= factor;
}

bool ParameterStore::grads_finite() const noexcept
{
    for (const Parameter& p : params_)
        if (!p.grad.all_finite())
            return false;
    return true;
}

void ParameterStore::copy_values_from(const ParameterStore& other)
{
    if (other.params_.size() != params_.size())
        throw ShapeError("parameter stores differ in tensor count");
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (other.params_[i].value.shape() != params_[i].value.shape())
            throw ShapeError("parameter '" + params_[i].name + "' differs in shape");
        params_[i].value = other.params_[i].value;
    }
}

} // namespace plnav::nn
