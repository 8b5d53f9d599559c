#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plnav::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// Dense double tensor. Two-dimensional tensors are stored column-major so they can be
/// viewed as Eigen matrices without copying.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const noexcept { return shape_.size() < 2 ? 1 : shape_[1]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    MatrixMap matrix() noexcept;
    ConstMatrixMap matrix() const noexcept;

    void fill(double value) noexcept;
    bool all_finite() const noexcept;

private:
    std::vector<std::size_t> shape_;
    // Aligned so Eigen's vectorized kernels take the same path for every allocation.
    std::vector<double, Eigen::aligned_allocator<double>> data_;
};

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
};

/// Ordered parameter list; the order is the checkpoint order.
class ParameterStore {
public:
    std::size_t add(std::string name, std::vector<std::size_t> shape);

    Parameter& operator[](std::size_t i) noexcept { return params_[i]; }
    const Parameter& operator[](std::size_t i) const noexcept { return params_[i]; }
    std::size_t size() const noexcept { return params_.size(); }
    std::size_t scalar_count() const noexcept;

    std::span<Parameter> params() noexcept { return params_; }
    std::span<const Parameter> params() const noexcept { return params_; }

    MatrixMap value(std::size_t i) noexcept { return params_[i].value.matrix(); }
    ConstMatrixMap value(std::size_t i) const noexcept { return params_[i].value.matrix(); }
    MatrixMap grad(std::size_t i) noexcept { return params_[i].grad.matrix(); }

    void zero_grad() noexcept;
    double grad_norm() const noexcept;
    void scale_grad(double factor) noexcept;
    bool grads_finite() const noexcept;

    /// Copies parameter values from another store of identical layout.
    void copy_values_from(const ParameterStore& other);

private:
    std::vector<Parameter> params_;
};

} // namespace plnav::nn
