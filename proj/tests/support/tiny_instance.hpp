// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// The 2-class, 1-hidden-unit, IPC=1 label-learning instance in both library
// and oracle form, plus a full-unroll meta-gradient taped without truncation.

#pragma once

#include <vector>

#include "oracle/tiny_mlp.hpp"
#include "sld/autodiff/ops.hpp"
#include "sld/bptt/learn_labels.hpp"
#include "sld/nn/loss.hpp"
#include "sld/nn/model.hpp"

namespace sld::test {

struct TinyInstance {
    nn::ModelSpec spec = nn::ModelSpec::mlp({1, 1, 2}, {1}, 2);
    nn::Params init;
    ad::Tensor distilled;  // [2,1,1,2]
    ad::Tensor logits;     // [2,2]
    ad::Tensor target;     // [6,1,1,2]
    std::vector<int> target_labels;
    bptt::BpttConfig cfg;

    TinyInstance() {
        init = {ad::Tensor({1, 2}, {0.8, 0.6}), ad::Tensor({1}, {0.5}), ad::Tensor({2, 1}, {0.7, -0.4}),
                ad::Tensor({2}, {0.1, -0.2})};
        distilled = ad::Tensor({2, 1, 1, 2}, {1.0, 0.5, -0.3, 1.2});
        logits = ad::Tensor({2, 2}, {1.0, -0.5, 0.2, 0.9});
        target = ad::Tensor({6, 1, 1, 2}, {0.9, 0.2, 1.4, -0.1, 0.3, 0.8, -0.2, 1.5, 0.6, 0.6, 1.1, 1.0});
        target_labels = {0, 0, 1, 1, 0, 1};
        cfg.unroll_steps = 3;
        cfg.window = 3;
        cfg.inner_lr = 0.5;
    }

    oracle::TinyMlp oracle_params() const {
        oracle::TinyMlp p;
        p.w1 = {init[0][0], init[0][1]};
        p.b1 = init[1][0];
        p.w2 = {init[2][0], init[2][1]};
        p.b2 = {init[3][0], init[3][1]};
        return p;
    }

    static std::vector<oracle::Row> rows(const ad::Tensor& x) {
        std::vector<oracle::Row> r(x.dim(0));
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i].x = {x[2 * i], x[2 * i + 1]};
        }
        return r;
    }

    std::vector<double> fd(double h) const {
        return oracle::fd_meta_gradient(oracle_params(), rows(distilled),
                                        std::vector<double>(logits.data().begin(), logits.data().end()),
                                        cfg.unroll_steps, cfg.inner_lr, rows(target), target_labels, h);
    }

    double oracle_loss() const {
        return oracle::outer_loss(oracle_params(), rows(distilled),
                                  std::vector<double>(logits.data().begin(), logits.data().end()), cfg.unroll_steps,
                                  cfg.inner_lr, rows(target), target_labels);
    }
};

/// Differentiates the whole T-step unroll on one tape, no truncation marker.
inline ad::Tensor full_unroll_meta_gradient(const ad::Tensor& logits, const nn::Params& init,
                                            const ad::Tensor& distilled, const ad::Tensor& target,
                                            const std::vector<int>& labels, const nn::ModelSpec& spec,
                                            std::size_t steps, double lr) {
    ad::Tape tape;
    ad::Var y = tape.leaf(logits);
    std::vector<ad::Var> theta;
    for (const auto& p : init) {
        theta.push_back(tape.leaf(p));
    }
    const ad::Var x = tape.constant(distilled);
    for (std::size_t n = 0; n < steps; ++n) {
        ad::Var loss = nn::soft_ce_loss(nn::forward(spec, theta, x), ad::softmax(y));
        auto g = tape.grad(loss, theta, true);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            theta[i] = ad::sub(theta[i], ad::scale(g[i], lr));
        }
    }
    ad::Var outer = nn::hard_ce_loss(nn::forward(spec, theta, tape.constant(target)), labels);
    const ad::Var wrt[] = {y};
    return tape.gradients(outer, wrt)[0];
}

}  // namespace sld::test
