// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// ConvNet (conv3x3 -> instance norm -> relu -> avgpool2 blocks, linear head)
// and MLP classifiers over NCHW inputs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sld/autodiff/tape.hpp"
#include "sld/data/dataset.hpp"

namespace sld::nn {

enum class Arch { mlp, convnet };

struct ModelSpec {
    Arch arch = Arch::mlp;
    data::ImageShape input;
    std::size_t num_classes = 10;
    std::vector<std::size_t> hidden;  // mlp
    std::size_t depth = 3;            // convnet blocks
    std::size_t width = 128;          // convnet channels

    static ModelSpec mlp(data::ImageShape input, std::vector<std::size_t> hidden, std::size_t num_classes);
    static ModelSpec convnet(data::ImageShape input, std::size_t depth, std::size_t width, std::size_t num_classes);

    /// e.g. "mlp[1x28x28:64:10]", "convnet[d3,w128,3x32x32:10]"
    std::string describe() const;
    std::string to_json() const;
    static ModelSpec from_json(const std::string& text);
    void validate() const;

    bool operator==(const ModelSpec&) const = default;
};

struct ParamInfo {
    std::string name;
    ad::Shape shape;
};

std::vector<ParamInfo> param_layout(const ModelSpec& spec);
std::size_t param_count(const ModelSpec& spec);

using Params = std::vector<ad::Tensor>;

/// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); norm scale 1, shift 0.
Params init_params(const ModelSpec& spec, std::uint64_t seed);

std::vector<double> flatten(const Params& params);
Params unflatten(const ModelSpec& spec, std::span<const double> flat);

/// Logits [N, num_classes] for x [N, C, H, W].
ad::Var forward(const ModelSpec& spec, std::span<const ad::Var> params, const ad::Var& x);

/// Value-only forward in chunks of `chunk` rows.
ad::Tensor predict_logits(const ModelSpec& spec, const Params& params, const ad::Tensor& x, std::size_t chunk = 500);

/// Row argmax, ties to the lowest index.
std::vector<int> argmax_rows(const ad::Tensor& m);

}  // namespace sld::nn
