// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/autodiff/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "sld/util/error.hpp"

namespace sld::ad {

std::size_t numel(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            s += ",";
        }
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(numel(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (numel(shape_) != data_.size()) {
        throw ShapeError("tensor: shape " + shape_str(shape_) + " does not match " +
                         std::to_string(data_.size()) + " elements");
    }
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    return Tensor({rows, cols}, std::vector<double>(values));
}

std::span<const double> Tensor::row(std::size_t r) const {
    const std::size_t cols = shape_.at(1);
    return std::span<const double>(data_).subspan(r * cols, cols);
}

std::span<double> Tensor::row(std::size_t r) {
    const std::size_t cols = shape_.at(1);
    return std::span<double>(data_).subspan(r * cols, cols);
}

double Tensor::item() const {
    if (data_.size() != 1) {
        throw ShapeError("tensor: item() on shape " + shape_str(shape_));
    }
    return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const& {
    Tensor t = *this;
    return std::move(t).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
    if (numel(shape) != data_.size()) {
        throw ShapeError("reshape: cannot view " + shape_str(shape_) + " as " + shape_str(shape));
    }
    shape_ = std::move(shape);
    return std::move(*this);
}

bool Tensor::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

void Tensor::release() noexcept {
    std::vector<double>().swap(data_);
}

}  // namespace sld::ad
