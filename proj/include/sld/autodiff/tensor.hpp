// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sld::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string shape_str(const Shape& shape);

/// Dense row-major f64 array. Value type: copies are deep.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value) { return Tensor({}, {value}); }
    static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double* ptr() noexcept { return data_.data(); }
    const double* ptr() const noexcept { return data_.data(); }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    /// Rank-2 element access.
    double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

    std::span<const double> row(std::size_t r) const;
    std::span<double> row(std::size_t r);

    /// Value of a one-element tensor.
    double item() const;

    /// Same data under a new shape with the same element count.
    Tensor reshaped(Shape shape) const&;
    Tensor reshaped(Shape shape) &&;

    bool all_finite() const noexcept;

    /// Release storage (used by tape truncation).
    void release() noexcept;

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

}  // namespace sld::ad
