// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Plain-double reference for a 2-input, 1-hidden-unit (relu), 2-class MLP
// trained by plain SGD on softmax(label logits). Shares no code with the
// library beyond the parameter values it is handed.

#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace sld::oracle {

struct TinyMlp {
    std::array<double, 2> w1{};  // hidden <- inputs
    double b1 = 0.0;
    std::array<double, 2> w2{};  // classes <- hidden
    std::array<double, 2> b2{};
};

struct Row {
    std::array<double, 2> x{};
};

inline std::array<double, 2> softmax2(double z0, double z1) {
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

inline double hidden(const TinyMlp& p, const Row& r) {
    const double a = p.w1[0] * r.x[0] + p.w1[1] * r.x[1] + p.b1;
    return a > 0.0 ? a : 0.0;
}

inline std::array<double, 2> probs(const TinyMlp& p, const Row& r) {
    const double h = hidden(p, r);
    return softmax2(p.w2[0] * h + p.b2[0], p.w2[1] * h + p.b2[1]);
}

/// One SGD step on mean soft cross-entropy against `targets`.
inline TinyMlp sgd_step(const TinyMlp& p, const std::vector<Row>& rows,
                        const std::vector<std::array<double, 2>>& targets, double lr) {
    TinyMlp g;
    const double n = static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double a = p.w1[0] * rows[i].x[0] + p.w1[1] * rows[i].x[1] + p.b1;
        const double h = a > 0.0 ? a : 0.0;
        const auto q = softmax2(p.w2[0] * h + p.b2[0], p.w2[1] * h + p.b2[1]);
        const double mass = targets[i][0] + targets[i][1];
        double dh = 0.0;
        for (int c = 0; c < 2; ++c) {
            const double dz = (q[c] * mass - targets[i][c]) / n;
            g.w2[c] += dz * h;
            g.b2[c] += dz;
            dh += dz * p.w2[c];
        }
        const double da = a > 0.0 ? dh : 0.0;
        g.w1[0] += da * rows[i].x[0];
        g.w1[1] += da * rows[i].x[1];
        g.b1 += da;
    }
    TinyMlp out = p;
    for (int k = 0; k < 2; ++k) {
        out.w1[k] -= lr * g.w1[k];
        out.w2[k] -= lr * g.w2[k];
        out.b2[k] -= lr * g.b2[k];
    }
    out.b1 -= lr * g.b1;
    return out;
}

/// Hard cross-entropy on the target batch after `steps` inner steps on
/// softmax(logits) (logits row-major [rows, 2]).
inline double outer_loss(TinyMlp p, const std::vector<Row>& distilled, const std::vector<double>& logits,
                         std::size_t steps, double lr, const std::vector<Row>& target, const std::vector<int>& labels) {
    std::vector<std::array<double, 2>> t(distilled.size());
    for (std::size_t i = 0; i < distilled.size(); ++i) {
        t[i] = softmax2(logits[2 * i], logits[2 * i + 1]);
    }
    for (std::size_t s = 0; s < steps; ++s) {
        p = sgd_step(p, distilled, t, lr);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        loss -= std::log(probs(p, target[i])[static_cast<std::size_t>(labels[i])]);
    }
    return loss / static_cast<double>(target.size());
}

/// Central differences of outer_loss over every logit.
inline std::vector<double> fd_meta_gradient(const TinyMlp& p, const std::vector<Row>& distilled,
                                            std::vector<double> logits, std::size_t steps, double lr,
                                            const std::vector<Row>& target, const std::vector<int>& labels,
                                            double h) {
    std::vector<double> g(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        const double v = logits[k];
        logits[k] = v + h;
        const double fp = outer_loss(p, distilled, logits, steps, lr, target, labels);
        logits[k] = v - h;
        const double fm = outer_loss(p, distilled, logits, steps, lr, target, labels);
        logits[k] = v;
        g[k] = (fp - fm) / (2 * h);
    }
    return g;
}

}  // namespace sld::oracle
