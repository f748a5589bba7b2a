// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "check.hpp"
#include "sld/autodiff/ops.hpp"
#include "sld/bptt/learn_labels.hpp"
#include "sld/nn/loss.hpp"
#include "sld/util/error.hpp"
#include "support/tiny_instance.hpp"

using namespace sld;
using ad::Tensor;
using ad::Var;

namespace {

// Meta-gradient of a T-step unroll of linear regression (weights w, bias b)
// toward targets y; outer loss is squared error on fixed data.
struct LinearUnroll {
    Tensor x = Tensor::matrix(3, 2, {1.0, 0.5, -0.7, 0.2, 0.3, -1.1});
    Tensor xo = Tensor::matrix(2, 2, {0.4, 0.9, -0.5, 0.1});
    Tensor yo = Tensor::matrix(2, 1, {0.3, -0.2});
    Tensor w0 = Tensor::matrix(2, 1, {0.1, -0.3});
    Tensor b0 = Tensor::matrix(1, 1, {0.05});

    Var predict(ad::Tape& tape, const Var& w, const Var& b, const Tensor& in) const {
        return ad::add(ad::matmul(tape.constant(in), w), ad::broadcast_rows(b, in.dim(0)));
    }

    Var inner(ad::Tape& tape, const Var& w, const Var& b, const Var& y) const {
        Var d = ad::sub(predict(tape, w, b, x), y);
        return ad::mean(ad::mul(d, d));
    }

    // Returns the outer loss as a function of y, taped through `steps` updates.
    Var unroll(ad::Tape& tape, const Var& y, std::size_t steps, double lr) const {
        Var w = tape.leaf(w0), b = tape.leaf(b0);
        for (std::size_t n = 0; n < steps; ++n) {
            const Var wrt[] = {w, b};
            auto g = tape.grad(inner(tape, w, b, y), wrt, true);
            ad::Tape::UpdateScope update(tape);
            w = ad::sub(w, ad::scale(g[0], lr));
            b = ad::sub(b, ad::scale(g[1], lr));
        }
        Var d = ad::sub(predict(tape, w, b, xo), tape.constant(yo));
        return ad::mean(ad::mul(d, d));
    }
};

}  // namespace

TEST_CASE("one-step unroll on a scalar quadratic has the closed form") {
    const double theta0 = 0.3, y0 = 1.7, t = -0.4, alpha = 0.25;
    ad::Tape tape;
    Var theta = tape.leaf(Tensor({1}, {theta0}));
    Var y = tape.leaf(Tensor({1}, {y0}));
    Var d = ad::sub(theta, y);
    Var inner = ad::scale(ad::sum(ad::mul(d, d)), 0.5);
    const Var wrt_theta[] = {theta};
    Var g = tape.grad(inner, wrt_theta, true)[0];
    Var theta1 = ad::sub(theta, ad::scale(g, alpha));
    Var e = ad::sub(theta1, tape.constant(Tensor({1}, {t})));
    const double th1 = theta0 - alpha * (theta0 - y0);
    const Var wrt_y[] = {y};
    const double dy = tape.gradients(ad::sum(ad::mul(e, e)), wrt_y)[0][0];
    CHECK(dy == doctest::Approx(2 * (th1 - t) * alpha).epsilon(1e-15));
}

TEST_CASE("three-step linear unroll matches central differences") {
    const LinearUnroll lu;
    const Tensor y0 = Tensor::matrix(3, 1, {0.6, -0.2, 0.9});
    const double lr = 0.2;
    ad::Tape tape;
    Var y = tape.leaf(y0);
    const Var wrt[] = {y};
    const Tensor g = tape.gradients(lu.unroll(tape, y, 3, lr), wrt)[0];
    const double h = 1e-5;
    for (std::size_t i = 0; i < 3; ++i) {
        Tensor yp = y0, ym = y0;
        yp[i] += h;
        ym[i] -= h;
        ad::Tape tp, tm;
        const double fp = lu.unroll(tp, tp.leaf(yp), 3, lr).value().item();
        const double fm = lu.unroll(tm, tm.leaf(ym), 3, lr).value().item();
        CHECK(test::rel_error(g[i], (fp - fm) / (2 * h)) < 1e-4);
    }
}

TEST_CASE("zero inner step size cuts the influence path") {
    const LinearUnroll lu;
    ad::Tape tape;
    Var y = tape.leaf(Tensor::matrix(3, 1, {0.6, -0.2, 0.9}));
    const Var wrt[] = {y};
    const Tensor g = tape.gradients(lu.unroll(tape, y, 3, 0.0), wrt)[0];
    for (double v : g.data()) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("one inner step: meta-gradient is linear in the inner step size") {
    // With a linear outer loss the one-step meta-gradient is -alpha * d2L/dtheta dy * c.
    const LinearUnroll lu;
    auto metagrad = [&](double alpha) {
        ad::Tape tape;
        Var y = tape.leaf(Tensor::matrix(3, 1, {0.6, -0.2, 0.9}));
        Var w = tape.leaf(lu.w0), b = tape.leaf(lu.b0);
        const Var wrt[] = {w, b};
        auto g = tape.grad(lu.inner(tape, w, b, y), wrt, true);
        w = ad::sub(w, ad::scale(g[0], alpha));
        b = ad::sub(b, ad::scale(g[1], alpha));
        Var outer = ad::add(ad::sum(ad::mul(w, tape.constant(Tensor::matrix(2, 1, {0.7, -1.3})))), ad::sum(b));
        const Var wy[] = {y};
        return tape.gradients(outer, wy)[0];
    };
    const Tensor g1 = metagrad(0.1), g2 = metagrad(0.2);
    for (std::size_t i = 0; i < g1.size(); ++i) {
        CHECK(g2[i] == doctest::Approx(2 * g1[i]).epsilon(1e-13));
    }
}

TEST_CASE("library meta-gradient matches the plain-double oracle") {
    const test::TinyInstance ti;
    const auto mg = bptt::meta_gradient(ti.logits, ti.init, ti.distilled, {}, ti.target, ti.target_labels, ti.spec, ti.cfg);
    CHECK(mg.target_loss == doctest::Approx(ti.oracle_loss()).epsilon(1e-12));
    const auto fd = ti.fd(1e-4);
    for (std::size_t k = 0; k < fd.size(); ++k) {
        CHECK(test::rel_error(mg.grad[k], fd[k], 1e-12) < 1e-3);
    }
}

TEST_CASE("full window equals the untruncated unroll bit for bit") {
    const test::TinyInstance ti;
    const auto mg = bptt::meta_gradient(ti.logits, ti.init, ti.distilled, {}, ti.target, ti.target_labels, ti.spec, ti.cfg);
    const Tensor full = test::full_unroll_meta_gradient(ti.logits, ti.init, ti.distilled, ti.target, ti.target_labels,
                                                        ti.spec, ti.cfg.unroll_steps, ti.cfg.inner_lr);
    CHECK(mg.grad == full);
}

TEST_CASE("shorter windows drop early influence") {
    test::TinyInstance ti;
    ti.cfg.window = 1;
    const auto short_w = bptt::meta_gradient(ti.logits, ti.init, ti.distilled, {}, ti.target, ti.target_labels, ti.spec, ti.cfg);
    ti.cfg.window = 3;
    const auto full = bptt::meta_gradient(ti.logits, ti.init, ti.distilled, {}, ti.target, ti.target_labels, ti.spec, ti.cfg);
    CHECK(short_w.target_loss == full.target_loss);  // same trajectory
    CHECK_FALSE(short_w.grad == full.grad);
}

TEST_CASE("config contract") {
    bptt::BpttConfig c;
    c.window = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.window = 21;
    c.unroll_steps = 20;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.window = 20;
    CHECK_NOTHROW(c.validate());
}

namespace {

data::Dataset toy_target() {
    Rng rng(5);
    std::vector<std::uint8_t> px(60 * 2);
    std::vector<int> y(60);
    for (std::size_t i = 0; i < 60; ++i) {
        y[i] = static_cast<int>(i % 2);
        px[2 * i] = static_cast<std::uint8_t>(y[i] ? 180 + rng.uniform(0, 40) : 40 + rng.uniform(0, 40));
        px[2 * i + 1] = static_cast<std::uint8_t>(rng.uniform(0, 255));
    }
    data::Dataset d("toy", data::Split::train, {1, 1, 2}, 2, px, y);
    d.normalize(data::compute_normalization(d));
    return d;
}

}  // namespace

TEST_CASE("learn_labels identities and determinism") {
    const auto target = toy_target();
    const std::vector<std::size_t> rows{0, 1};
    const Tensor x = target.images(rows);
    const std::vector<int> y = target.labels(rows);
    const auto spec = nn::ModelSpec::mlp({1, 1, 2}, {3}, 2);
    bptt::BpttConfig cfg;
    cfg.unroll_steps = 4;
    cfg.window = 2;
    cfg.inner_lr = 0.3;
    cfg.outer_iters = 5;
    cfg.target_batch = 16;
    cfg.seed = 9;
    const Tensor init = nn::softmax_rows(bptt::init_logits(y, 2, cfg.init_scale));

    auto frozen = cfg;
    frozen.label_lr = 0.0;
    CHECK(bptt::learn_labels(target, x, y, spec, frozen).labels.scores == init);
    auto none = cfg;
    none.outer_iters = 0;
    CHECK(bptt::learn_labels(target, x, y, spec, none).labels.scores == init);

    const auto a = bptt::learn_labels(target, x, y, spec, cfg);
    const auto b = bptt::learn_labels(target, x, y, spec, cfg);
    CHECK(a.logits == b.logits);
    CHECK(a.trace.size() == 5);
    CHECK(a.labels.provenance == "bptt");
    CHECK_NOTHROW(a.labels.validate(true));
    CHECK_FALSE(a.logits == bptt::init_logits(y, 2, cfg.init_scale));
}
