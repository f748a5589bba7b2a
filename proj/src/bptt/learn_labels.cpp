// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/bptt/learn_labels.hpp"

#include <cmath>
#include <numbers>

#include "sld/autodiff/ops.hpp"
#include "sld/nn/loss.hpp"
#include "sld/util/error.hpp"
#include "sld/util/rng.hpp"

namespace sld::bptt {

using ad::Tensor;
using ad::Var;

void BpttConfig::validate() const {
    if (window == 0) {
        throw ConfigError("bptt: window M must be at least 1 (no accumulation window)");
    }
    if (window > unroll_steps) {
        throw ConfigError("bptt: window M=" + std::to_string(window) + " exceeds unroll steps T=" +
                          std::to_string(unroll_steps));
    }
    if (!(inner_lr > 0.0) || label_lr < 0.0 || !(clip_norm > 0.0) || target_batch == 0 || distilled_batch == 0) {
        throw ConfigError("bptt: need inner_lr > 0, label_lr >= 0, clip_norm > 0, positive batch sizes");
    }
}

Tensor init_logits(std::span<const int> labels, std::size_t num_classes, double scale) {
    Tensor t = nn::one_hot(labels, num_classes);
    for (double& v : t.data()) {
        v *= scale;
    }
    return t;
}

namespace {

Tensor gather(const Tensor& src, std::span<const std::size_t> rows) {
    ad::Shape s = src.shape();
    const std::size_t per = src.size() / s[0];
    s[0] = rows.size();
    Tensor out(s);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(src.ptr() + rows[i] * per, per, out.ptr() + i * per);
    }
    return out;
}

}  // namespace

MetaGradient meta_gradient(const Tensor& label_logits, const nn::Params& student_init, const Tensor& distilled_images,
                           const std::vector<std::vector<std::size_t>>& inner_batches, const Tensor& target_images,
                           std::span<const int> target_labels, const nn::ModelSpec& spec, const BpttConfig& config) {
    config.validate();
    const std::size_t steps = config.unroll_steps;
    if (!inner_batches.empty() && inner_batches.size() != steps) {
        throw ConfigError("meta_gradient: " + std::to_string(inner_batches.size()) + " inner batches for T=" +
                          std::to_string(steps));
    }
    if (label_logits.rank() != 2 || label_logits.dim(0) != distilled_images.dim(0) ||
        label_logits.dim(1) != spec.num_classes) {
        throw ShapeError("meta_gradient: label logits " + ad::shape_str(label_logits.shape()) + " vs images " +
                         ad::shape_str(distilled_images.shape()));
    }
    ad::Tape tape;
    Var y = tape.leaf(label_logits);
    std::vector<Var> theta;
    for (const auto& p : student_init) {
        theta.push_back(tape.leaf(p));
    }
    const Var x_all = tape.constant(distilled_images);
    const std::size_t start = steps - config.window;
    for (std::size_t n = 0; n < steps; ++n) {
        if (n == start) {
            // Start accumulating gradients: earlier history is dropped.
            theta = tape.truncate(theta);
        }
        const bool full = inner_batches.empty() || inner_batches[n].empty();
        Var xb = full ? x_all : tape.constant(gather(distilled_images, inner_batches[n]));
        Var yb = full ? y : ad::take_rows(y, inner_batches[n]);
        Var loss;
        std::vector<Var> g;
        if (n < start) {
            Tensor targets = nn::softmax_rows(yb.value());
            loss = nn::soft_ce_loss(nn::forward(spec, theta, xb), targets);
            g = tape.grad(loss, theta, false);
        } else {
            loss = nn::soft_ce_loss(nn::forward(spec, theta, xb), ad::softmax(yb));
            g = tape.grad(loss, theta, true);
        }
        ad::Tape::UpdateScope update(tape);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            theta[i] = ad::sub(theta[i], ad::scale(g[i], config.inner_lr));
        }
    }
    Var outer = nn::hard_ce_loss(nn::forward(spec, theta, tape.constant(target_images)), target_labels);
    const Var wrt[] = {y};
    auto grads = tape.grad(outer, wrt, false);
    return MetaGradient{grads[0].value(), outer.value().item()};
}

BpttResult learn_labels(const data::Dataset& target, const Tensor& distilled_images,
                        std::span<const int> distilled_labels, const nn::ModelSpec& spec, const BpttConfig& config) {
    config.validate();
    const std::size_t m = distilled_images.dim(0);
    if (distilled_labels.size() != m) {
        throw ShapeError("learn_labels: " + std::to_string(distilled_labels.size()) + " labels for " +
                         std::to_string(m) + " images");
    }
    if (target.empty()) {
        throw DataError("learn_labels: empty target dataset");
    }
    BpttResult r;
    r.logits = init_logits(distilled_labels, spec.num_classes, config.init_scale);
    double best_loss = INFINITY;
    std::size_t best_iter = 0;
    for (std::size_t it = 0; it < config.outer_iters; ++it) {
        Rng rng(derive_seed(config.seed, {0x6f75746572ULL, it}));
        // Target batch without replacement.
        std::vector<std::size_t> pool(target.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
            pool[i] = i;
        }
        const std::size_t tb = std::min(config.target_batch, pool.size());
        for (std::size_t i = 0; i < tb; ++i) {
            std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
        }
        pool.resize(tb);
        const Tensor tx = target.images(pool);
        const auto ty = target.labels(pool);
        std::vector<std::vector<std::size_t>> batches;
        if (m > config.distilled_batch) {
            for (std::size_t n = 0; n < config.unroll_steps; ++n) {
                std::vector<std::size_t> all(m);
                for (std::size_t i = 0; i < m; ++i) {
                    all[i] = i;
                }
                for (std::size_t i = 0; i < config.distilled_batch; ++i) {
                    std::swap(all[i], all[i + rng.uniform_index(m - i)]);
                }
                all.resize(config.distilled_batch);
                batches.push_back(std::move(all));
            }
        }
        TraceRow row;
        row.outer_iter = it;
        MetaGradient mg;
        for (int attempt = 0;; ++attempt) {
            // Fresh student per outer iteration; a retry draws another one.
            const auto init = nn::init_params(spec, derive_seed(config.seed, {0x73747564ULL, it, std::uint64_t(attempt)}));
            try {
                mg = meta_gradient(r.logits, init, distilled_images, batches, tx, ty, spec, config);
                if (mg.grad.all_finite()) {
                    break;
                }
            } catch (const NumericError&) {
            }
            if (attempt == 1) {
                throw NumericError("bptt: non-finite meta-gradient at outer iteration " + std::to_string(it) +
                                   " after one retry");
            }
            row.retried = true;
        }
        double norm = 0.0;
        for (double v : mg.grad.data()) {
            norm += v * v;
        }
        norm = std::sqrt(norm);
        row.target_loss = mg.target_loss;
        row.metagrad_norm = norm;
        double factor = 1.0;
        if (norm > config.clip_norm) {
            factor = config.clip_norm / norm;
            row.clipped = true;
        }
        double lr = config.label_lr;
        if (config.cosine) {
            lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(it) / static_cast<double>(config.outer_iters)));
        }
        for (std::size_t i = 0; i < r.logits.size(); ++i) {
            r.logits[i] -= lr * factor * mg.grad[i];
        }
        r.trace.push_back(row);
        if (config.plateau_patience > 0) {
            if (mg.target_loss < best_loss - config.plateau_tol) {
                best_loss = mg.target_loss;
                best_iter = it;
            } else if (it - best_iter >= config.plateau_patience) {
                break;
            }
        }
    }
    r.labels.scores = nn::softmax_rows(r.logits);
    r.labels.provenance = labels::provenance::bptt();
    r.labels.temperature = 1.0;
    return r;
}

csv::Table trace_table(const std::vector<TraceRow>& trace) {
    csv::Table t;
    t.header = {"outer_iter", "target_loss", "metagrad_norm", "clipped"};
    for (const auto& r : trace) {
        t.rows.push_back({std::to_string(r.outer_iter), csv::fixed(r.target_loss, 8), csv::num(r.metagrad_norm),
                          r.clipped ? "1" : "0"});
    }
    return t;
}

}  // namespace sld::bptt
