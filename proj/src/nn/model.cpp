// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/nn/model.hpp"

#include <cmath>

#include <json.hpp>

#include "sld/autodiff/ops.hpp"
#include "sld/util/error.hpp"
#include "sld/util/rng.hpp"

namespace sld::nn {

using ad::Shape;
using ad::Tensor;
using ad::Var;

ModelSpec ModelSpec::mlp(data::ImageShape input, std::vector<std::size_t> hidden, std::size_t num_classes) {
    ModelSpec s;
    s.arch = Arch::mlp;
    s.input = input;
    s.hidden = std::move(hidden);
    s.num_classes = num_classes;
    s.validate();
    return s;
}

ModelSpec ModelSpec::convnet(data::ImageShape input, std::size_t depth, std::size_t width, std::size_t num_classes) {
    ModelSpec s;
    s.arch = Arch::convnet;
    s.input = input;
    s.depth = depth;
    s.width = width;
    s.num_classes = num_classes;
    s.validate();
    return s;
}

namespace {

std::string shape3(const data::ImageShape& s) {
    return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

// Spatial extent after the conv blocks.
std::pair<std::size_t, std::size_t> conv_out_hw(const ModelSpec& s) {
    std::size_t h = s.input.height, w = s.input.width;
    for (std::size_t b = 0; b < s.depth; ++b) {
        h /= 2;
        w /= 2;
    }
    return {h, w};
}

}  // namespace

void ModelSpec::validate() const {
    if (input.size() == 0 || num_classes < 2) {
        throw ConfigError("model: empty input or fewer than 2 classes");
    }
    if (arch == Arch::convnet) {
        if (depth == 0 || width == 0) {
            throw ConfigError("model: convnet needs depth >= 1 and width >= 1");
        }
        std::size_t h = input.height, w = input.width;
        for (std::size_t b = 0; b < depth; ++b) {
            if (h < 2 || w < 2) {
                throw ConfigError("model: input " + shape3(input) + " too small for " + std::to_string(depth) +
                                  " pooling blocks");
            }
            h /= 2;
            w /= 2;
        }
    }
    for (std::size_t h : hidden) {
        if (h == 0) {
            throw ConfigError("model: zero-width hidden layer");
        }
    }
}

std::string ModelSpec::describe() const {
    if (arch == Arch::mlp) {
        std::string s = "mlp[" + shape3(input);
        for (std::size_t h : hidden) {
            s += ":" + std::to_string(h);
        }
        return s + ":" + std::to_string(num_classes) + "]";
    }
    return "convnet[d" + std::to_string(depth) + ",w" + std::to_string(width) + "," + shape3(input) + ":" +
           std::to_string(num_classes) + "]";
}

std::string ModelSpec::to_json() const {
    nlohmann::ordered_json j;
    j["arch"] = arch == Arch::mlp ? "mlp" : "convnet";
    j["input"] = {input.channels, input.height, input.width};
    j["num_classes"] = num_classes;
    if (arch == Arch::mlp) {
        j["hidden"] = hidden;
    } else {
        j["depth"] = depth;
        j["width"] = width;
    }
    return j.dump();
}

ModelSpec ModelSpec::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        const auto in = j.at("input").get<std::vector<std::size_t>>();
        if (in.size() != 3) {
            throw FormatError("model layout: input must have 3 extents");
        }
        const data::ImageShape shape{in[0], in[1], in[2]};
        const std::string arch = j.at("arch").get<std::string>();
        const auto classes = j.at("num_classes").get<std::size_t>();
        if (arch == "mlp") {
            return mlp(shape, j.at("hidden").get<std::vector<std::size_t>>(), classes);
        }
        if (arch == "convnet") {
            return convnet(shape, j.at("depth").get<std::size_t>(), j.at("width").get<std::size_t>(), classes);
        }
        throw FormatError("model layout: unknown arch '" + arch + "'");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model layout: ") + e.what());
    }
}

std::vector<ParamInfo> param_layout(const ModelSpec& spec) {
    std::vector<ParamInfo> out;
    if (spec.arch == Arch::mlp) {
        std::size_t in = spec.input.size();
        std::vector<std::size_t> widths = spec.hidden;
        widths.push_back(spec.num_classes);
        for (std::size_t l = 0; l < widths.size(); ++l) {
            out.push_back({"fc" + std::to_string(l) + ".weight", {widths[l], in}});
            out.push_back({"fc" + std::to_string(l) + ".bias", {widths[l]}});
            in = widths[l];
        }
        return out;
    }
    std::size_t cin = spec.input.channels;
    for (std::size_t b = 0; b < spec.depth; ++b) {
        const std::string p = "block" + std::to_string(b);
        out.push_back({p + ".conv.weight", {spec.width, cin, 3, 3}});
        out.push_back({p + ".norm.weight", {spec.width}});
        out.push_back({p + ".norm.bias", {spec.width}});
        cin = spec.width;
    }
    const auto [h, w] = conv_out_hw(spec);
    out.push_back({"head.weight", {spec.num_classes, spec.width * h * w}});
    out.push_back({"head.bias", {spec.num_classes}});
    return out;
}

std::size_t param_count(const ModelSpec& spec) {
    std::size_t n = 0;
    for (const auto& p : param_layout(spec)) {
        n += ad::numel(p.shape);
    }
    return n;
}

Params init_params(const ModelSpec& spec, std::uint64_t seed) {
    Rng rng(derive_seed(seed, {0x696e6974ULL}));
    Params out;
    const auto layout = param_layout(spec);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& info = layout[i];
        Tensor t(info.shape);
        const bool norm = info.name.find(".norm.") != std::string::npos;
        if (norm) {
            if (info.name.ends_with(".weight")) {
                t = Tensor::full(info.shape, 1.0);
            }
        } else {
            // Biases share the fan-in of the weight listed just before them.
            const Shape& ws = info.name.ends_with(".bias") ? layout[i - 1].shape : info.shape;
            const std::size_t fan_in = ad::numel(ws) / ws[0];
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            for (double& v : t.data()) {
                v = rng.uniform(-bound, bound);
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<double> flatten(const Params& params) {
    std::vector<double> out;
    for (const auto& p : params) {
        out.insert(out.end(), p.data().begin(), p.data().end());
    }
    return out;
}

Params unflatten(const ModelSpec& spec, std::span<const double> flat) {
    const auto layout = param_layout(spec);
    Params out;
    std::size_t off = 0;
    for (const auto& info : layout) {
        const std::size_t n = ad::numel(info.shape);
        if (off + n > flat.size()) {
            throw ShapeError("unflatten: " + std::to_string(flat.size()) + " values for " + spec.describe() +
                             " (needs " + std::to_string(param_count(spec)) + ")");
        }
        out.emplace_back(info.shape, std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(off),
                                                         flat.begin() + static_cast<std::ptrdiff_t>(off + n)));
        off += n;
    }
    if (off != flat.size()) {
        throw ShapeError("unflatten: " + std::to_string(flat.size()) + " values for " + spec.describe() +
                         " (needs " + std::to_string(off) + ")");
    }
    return out;
}

namespace {

Var linear(const Var& h, const Var& w, const Var& b) {
    const std::size_t n = h.shape()[0];
    const std::size_t out = w.shape()[0];
    return ad::add(ad::matmul(h, w, false, true), ad::broadcast_rows(ad::reshape(b, {1, out}), n));
}

// Per-channel affine over a [C, rest] view.
Var channel_affine(const Var& y, const Var& gamma, const Var& beta) {
    const std::size_t c = y.shape()[0];
    const std::size_t rest = y.shape()[1];
    Var g = ad::broadcast_cols(ad::reshape(gamma, {c, 1}), rest);
    Var b = ad::broadcast_cols(ad::reshape(beta, {c, 1}), rest);
    return ad::add(ad::mul(y, g), b);
}

constexpr double kNormEps = 1e-5;

}  // namespace

Var forward(const ModelSpec& spec, std::span<const Var> params, const Var& x) {
    const auto layout = param_layout(spec);
    if (params.size() != layout.size()) {
        throw ShapeError("forward: " + std::to_string(params.size()) + " parameter tensors for " + spec.describe() +
                         " (expects " + std::to_string(layout.size()) + ")");
    }
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (params[i].shape() != layout[i].shape) {
            throw ShapeError("forward: parameter " + layout[i].name + " has shape " +
                             ad::shape_str(params[i].shape()) + ", expected " + ad::shape_str(layout[i].shape));
        }
    }
    const Shape& xs = x.shape();
    if (xs.size() != 4 || xs[1] != spec.input.channels || xs[2] != spec.input.height || xs[3] != spec.input.width) {
        throw ShapeError("forward: input " + ad::shape_str(xs) + " does not match " + spec.describe());
    }
    const std::size_t n = xs[0];
    if (spec.arch == Arch::mlp) {
        Var h = ad::reshape(x, {n, spec.input.size()});
        const std::size_t layers = params.size() / 2;
        for (std::size_t l = 0; l < layers; ++l) {
            h = linear(h, params[2 * l], params[2 * l + 1]);
            if (l + 1 < layers) {
                h = ad::relu(h);
            }
        }
        return h;
    }
    // Internal layout is [C, N, H, W] so that one matmul covers the batch.
    Var h = ad::swap01(x);
    std::size_t cin = spec.input.channels, hh = spec.input.height, ww = spec.input.width;
    for (std::size_t b = 0; b < spec.depth; ++b) {
        const Var& w = params[3 * b];
        const std::size_t cout = spec.width;
        Var cols = ad::im2col(h, 3, 1);
        Var y = ad::matmul(ad::reshape(w, {cout, cin * 9}), cols);  // [Cout, N*H*W]
        const std::size_t plane = hh * ww;
        const double inv = 1.0 / static_cast<double>(plane);
        Var rows = ad::reshape(y, {cout * n, plane});
        Var mean = ad::scale(ad::sum_rows(rows), inv);
        Var centered = ad::sub(rows, ad::broadcast_cols(mean, plane));
        Var var = ad::scale(ad::sum_rows(ad::mul(centered, centered)), inv);
        Var normed = ad::mul(centered, ad::broadcast_cols(ad::rsqrt(ad::add_scalar(var, kNormEps)), plane));
        Var affine = channel_affine(ad::reshape(normed, {cout, n * plane}), params[3 * b + 1], params[3 * b + 2]);
        Var act = ad::relu(affine);
        Var pooled = ad::avgpool2(ad::reshape(act, {cout * n, hh, ww}));
        hh /= 2;
        ww /= 2;
        h = ad::reshape(pooled, {cout, n, hh, ww});
        cin = cout;
    }
    Var feat = ad::reshape(ad::swap01(h), {n, cin * hh * ww});
    return linear(feat, params[params.size() - 2], params[params.size() - 1]);
}

Tensor predict_logits(const ModelSpec& spec, const Params& params, const Tensor& x, std::size_t chunk) {
    if (x.rank() != 4) {
        throw ShapeError("predict_logits: expected [N,C,H,W], got " + ad::shape_str(x.shape()));
    }
    const std::size_t n = x.dim(0);
    const std::size_t per = x.size() / std::max<std::size_t>(n, 1);
    Tensor out({n, spec.num_classes});
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t m = std::min(chunk, n - start);
        ad::Tape tape;
        ad::NoGradGuard guard(tape);
        std::vector<Var> p;
        p.reserve(params.size());
        for (const auto& t : params) {
            p.push_back(tape.constant(t));
        }
        Shape s = x.shape();
        s[0] = m;
        Tensor xb(s, std::vector<double>(x.data().begin() + static_cast<std::ptrdiff_t>(start * per),
                                         x.data().begin() + static_cast<std::ptrdiff_t>((start + m) * per)));
        Var logits = forward(spec, p, tape.constant(std::move(xb)));
        std::copy(logits.value().data().begin(), logits.value().data().end(),
                  out.data().begin() + static_cast<std::ptrdiff_t>(start * spec.num_classes));
    }
    return out;
}

std::vector<int> argmax_rows(const Tensor& m) {
    if (m.rank() != 2) {
        throw ShapeError("argmax_rows: expected rank 2, got " + ad::shape_str(m.shape()));
    }
    const std::size_t r = m.dim(0), c = m.dim(1);
    std::vector<int> out(r);
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = m.ptr() + i * c;
        std::size_t best = 0;
        for (std::size_t j = 1; j < c; ++j) {
            if (row[j] > row[best]) {
                best = j;
            }
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

}  // namespace sld::nn
