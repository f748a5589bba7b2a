// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central-difference helpers shared by the gradient tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sld/autodiff/ops.hpp"
#include "sld/autodiff/tape.hpp"
#include "sld/autodiff/tensor.hpp"
#include "sld/util/rng.hpp"

namespace sld::test {

inline ad::Tensor random_tensor(ad::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    ad::Tensor t(std::move(shape));
    Rng rng(seed);
    for (double& v : t.data()) {
        v = rng.uniform(lo, hi);
    }
    return t;
}

// |a - n| / max(|a|, |n|, floor)
inline double rel_error(double a, double n, double floor = 1e-4) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

/// f maps a fresh tape and leaf inputs to a scalar.
using ScalarFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

inline double eval(const ScalarFn& f, const std::vector<ad::Tensor>& inputs) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) {
        vars.push_back(tape.leaf(t));
    }
    return f(tape, vars).value().item();
}

/// Largest relative error between reverse-mode and central differences over
/// every element of every input.
inline double max_grad_error(const ScalarFn& f, std::vector<ad::Tensor> inputs, double h = 1e-5) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) {
        vars.push_back(tape.leaf(t));
    }
    const auto grads = tape.gradients(f(tape, vars), vars);
    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (std::size_t i = 0; i < inputs[k].size(); ++i) {
            const double x0 = inputs[k][i];
            inputs[k][i] = x0 + h;
            const double fp = eval(f, inputs);
            inputs[k][i] = x0 - h;
            const double fm = eval(f, inputs);
            inputs[k][i] = x0;
            worst = std::max(worst, rel_error(grads[k][i], (fp - fm) / (2 * h)));
        }
    }
    return worst;
}

/// Hessian-vector product through create_graph against differences of the
/// first gradient along v.
inline double max_hvp_error(const ScalarFn& f, const ad::Tensor& x, const ad::Tensor& v, double h = 1e-5) {
    auto grad_at = [&](const ad::Tensor& at) {
        ad::Tape tape;
        std::vector<ad::Var> vars{tape.leaf(at)};
        return tape.gradients(f(tape, vars), vars)[0];
    };
    ad::Tape tape;
    std::vector<ad::Var> vars{tape.leaf(x)};
    auto g = tape.grad(f(tape, vars), vars, true)[0];
    auto vv = tape.constant(v);
    const auto hv = tape.gradients(ad::sum(ad::mul(g, vv)), vars)[0];
    ad::Tensor xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] += h * v[i];
        xm[i] -= h * v[i];
    }
    const auto gp = grad_at(xp), gm = grad_at(xm);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, rel_error(hv[i], (gp[i] - gm[i]) / (2 * h)));
    }
    return worst;
}

}  // namespace sld::test
