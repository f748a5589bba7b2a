// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sld/autodiff/ops.hpp"
#include "sld/util/error.hpp"

namespace sld::nn {

using ad::Tensor;
using ad::Var;

namespace {

void check_tau(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ConfigError("soft_ce_loss: temperature must be positive, got " + std::to_string(tau));
    }
}

}  // namespace

Var soft_ce_loss(const Var& logits, const Var& targets, double tau) {
    check_tau(tau);
    if (logits.shape() != targets.shape() || logits.value().rank() != 2) {
        throw ShapeError("soft_ce_loss: logits " + ad::shape_str(logits.shape()) + " vs targets " +
                         ad::shape_str(targets.shape()));
    }
    const double batch = static_cast<double>(logits.shape()[0]);
    Var z = tau == 1.0 ? logits : ad::scale(logits, 1.0 / tau);
    return ad::scale(ad::sum(ad::mul(targets, ad::log_softmax(z))), -1.0 / batch);
}

Var soft_ce_loss(const Var& logits, const Tensor& targets, double tau) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0.0) {
            throw DataError("soft_ce_loss: negative target " + std::to_string(targets[i]) + " at flat index " +
                            std::to_string(i));
        }
    }
    return soft_ce_loss(logits, logits.tape().constant(targets), tau);
}

Tensor one_hot(std::span<const int> labels, std::size_t num_classes) {
    Tensor t({labels.size(), num_classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw DataError("one_hot: label " + std::to_string(labels[i]) + " outside [0," +
                            std::to_string(num_classes) + ")");
        }
        t.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
    }
    return t;
}

Var hard_ce_loss(const Var& logits, std::span<const int> labels) {
    if (logits.value().rank() != 2 || logits.shape()[0] != labels.size()) {
        throw ShapeError("hard_ce_loss: logits " + ad::shape_str(logits.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
    }
    return soft_ce_loss(logits, one_hot(labels, logits.shape()[1]));
}

std::vector<double> per_row_ce(const Tensor& logits, std::span<const int> labels) {
    const std::size_t r = logits.dim(0), c = logits.dim(1);
    if (labels.size() != r) {
        throw ShapeError("per_row_ce: " + std::to_string(r) + " rows vs " + std::to_string(labels.size()) + " labels");
    }
    std::vector<double> out(r);
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = logits.ptr() + i * c;
        const double mx = *std::max_element(row, row + c);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            s += std::exp(row[j] - mx);
        }
        out[i] = mx + std::log(s) - row[labels[i]];
    }
    return out;
}

Tensor softmax_rows(const Tensor& logits, double tau) {
    check_tau(tau);
    if (logits.rank() != 2) {
        throw ShapeError("softmax_rows: expected rank 2, got " + ad::shape_str(logits.shape()));
    }
    const std::size_t r = logits.dim(0), c = logits.dim(1);
    Tensor out(logits.shape());
    for (std::size_t i = 0; i < r; ++i) {
        const double* z = logits.ptr() + i * c;
        double* y = out.ptr() + i * c;
        double mx = z[0] / tau;
        for (std::size_t j = 1; j < c; ++j) {
            mx = std::max(mx, z[j] / tau);
        }
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            y[j] = std::exp(z[j] / tau - mx);
            s += y[j];
        }
        for (std::size_t j = 0; j < c; ++j) {
            y[j] /= s;
        }
    }
    return out;
}

}  // namespace sld::nn
