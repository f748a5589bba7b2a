// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "check.hpp"
#include "sld/autodiff/ops.hpp"
#include "sld/util/error.hpp"

using namespace sld;
using ad::Tensor;
using ad::Var;
using test::max_grad_error;

namespace {

// sum(op(x) * w) with a fixed random w so every output element matters.
test::ScalarFn weighted(std::function<Var(const Var&)> op, std::uint64_t seed = 99) {
    return [op, seed](ad::Tape& tape, const std::vector<Var>& in) {
        Var y = op(in[0]);
        Var w = tape.constant(test::random_tensor(y.shape(), seed));
        return ad::sum(ad::mul(y, w));
    };
}

constexpr double kTol = 1e-5;

}  // namespace

TEST_CASE("forward examples") {
    ad::Tape tape;
    auto eye = tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    auto m = tape.constant(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    const Tensor prod = ad::matmul(eye, m).value();  // copy: recording may move node storage
    CHECK(prod == m.value());

    auto r = ad::relu(tape.constant(Tensor({3}, {-1, 0, 2})));
    CHECK(r.value() == Tensor({3}, {0, 0, 2}));

    auto s = ad::softmax(tape.constant(Tensor::zeros({1, 4})));
    for (double v : s.value().data()) {
        CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    }
}

TEST_CASE("gradient examples") {
    ad::Tape tape;
    auto x = tape.leaf(Tensor({2}, {1, 2}));
    auto g = tape.gradients(ad::sum(ad::mul(x, x)), std::vector<Var>{x})[0];
    CHECK(g[0] == 2.0);
    CHECK(g[1] == 4.0);

    ad::Tape t2;
    auto y = t2.leaf(Tensor({3}, {1, 2, 3}));
    auto c = ad::sum(t2.constant(Tensor({2}, {5, 6})));
    auto gy = t2.gradients(ad::add(c, ad::scale(ad::sum(y), 0.0)), std::vector<Var>{y})[0];
    for (double v : gy.data()) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("backward stores leaf gradients and consumes the tape") {
    ad::Tape tape;
    auto x = tape.leaf(Tensor({2}, {3, -1}));
    tape.backward(ad::sum(ad::mul(x, x)));
    REQUIRE(x.grad().has_value());
    CHECK((*x.grad())[0] == 6.0);
    CHECK_THROWS_AS(tape.leaf(Tensor({1}, {0})), Error);
    tape.clear();
    CHECK_NOTHROW(tape.leaf(Tensor({1}, {0})));
}

TEST_CASE("elementwise primitives against central differences") {
    const Tensor x = test::random_tensor({3, 4}, 1);
    const Tensor pos = test::random_tensor({3, 4}, 2, 0.5, 2.0);
    const Tensor other = test::random_tensor({3, 4}, 3);
    CHECK(max_grad_error(
              [](ad::Tape&, const std::vector<Var>& in) { return ad::sum(ad::mul(ad::add(in[0], in[1]), in[0])); },
              {x, other}) < kTol);
    CHECK(max_grad_error(
              [](ad::Tape&, const std::vector<Var>& in) { return ad::sum(ad::mul(ad::sub(in[0], in[1]), in[1])); },
              {x, other}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::scale(a, -2.5); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::add_scalar(a, 0.3); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::exp(a); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::log(a); }), {pos}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::reciprocal(a); }), {pos}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::rsqrt(a); }), {pos}) < kTol);
    // Inputs kept away from the kink.
    Tensor away = x;
    for (double& v : away.data()) {
        v = v < 0 ? v - 0.1 : v + 0.1;
    }
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::relu(a); }), {away}) < kTol);
}

TEST_CASE("reductions and broadcasts against central differences") {
    const Tensor x = test::random_tensor({3, 4}, 4);
    CHECK(max_grad_error([](ad::Tape&, const std::vector<Var>& in) { return ad::exp(ad::mean(in[0])); }, {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::sum_rows(a); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::sum_cols(a); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::broadcast_cols(ad::sum_rows(a), 5); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::broadcast_rows(ad::sum_cols(a), 2); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::expand(ad::sum(a), {2, 2}); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::softmax(a); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::log_softmax(a); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::take_rows(a, {2, 0, 2}); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::scatter_rows(a, {4, 1, 4}, 6); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::reshape(a, {2, 6}); }), {x}) < kTol);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::swap01(ad::reshape(a, {3, 2, 2})); }), {x}) < kTol);
}

TEST_CASE("matmul against central differences in all transpose modes") {
    for (bool ta : {false, true}) {
        for (bool tb : {false, true}) {
            const Tensor a = test::random_tensor(ta ? ad::Shape{4, 3} : ad::Shape{3, 4}, 5);
            const Tensor b = test::random_tensor(tb ? ad::Shape{2, 4} : ad::Shape{4, 2}, 6);
            auto f = [ta, tb](ad::Tape& tape, const std::vector<Var>& in) {
                Var y = ad::matmul(in[0], in[1], ta, tb);
                return ad::sum(ad::mul(y, tape.constant(test::random_tensor(y.shape(), 7))));
            };
            CHECK(max_grad_error(f, {a, b}) < kTol);
        }
    }
}

TEST_CASE("image primitives against central differences") {
    const Tensor img = test::random_tensor({2, 3, 5, 5}, 8);  // [C,N,H,W]
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::im2col(a, 3, 1); }), {img}) < kTol);
    const Tensor cols = test::random_tensor({2 * 9, 3 * 25}, 9);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::col2im(a, {2, 3, 5, 5}, 3, 1); }), {cols}) < kTol);
    const Tensor maps = test::random_tensor({4, 5, 7}, 10);  // odd sizes floor
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::avgpool2(a); }), {maps}) < kTol);
    const Tensor pooled = test::random_tensor({4, 2, 3}, 11);
    CHECK(max_grad_error(weighted([](const Var& a) { return ad::avgpool2_adjoint(a, {4, 5, 7}); }), {pooled}) < kTol);
    const Tensor x = test::random_tensor({2, 2, 4, 4}, 12);  // NCHW
    const Tensor w = test::random_tensor({3, 2, 3, 3}, 13);
    CHECK(max_grad_error(
              [](ad::Tape& tape, const std::vector<Var>& in) {
                  Var y = ad::conv2d(in[0], in[1], 1);
                  return ad::sum(ad::mul(y, tape.constant(test::random_tensor(y.shape(), 14))));
              },
              {x, w}) < kTol);
}

TEST_CASE("conv2d matches a direct convolution") {
    const Tensor x = test::random_tensor({1, 2, 4, 4}, 15);
    const Tensor w = test::random_tensor({1, 2, 3, 3}, 16);
    ad::Tape tape;
    const Tensor y = ad::conv2d(tape.constant(x), tape.constant(w), 1).value();
    REQUIRE(y.shape() == ad::Shape{1, 1, 4, 4});
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double ref = 0.0;
            for (int c = 0; c < 2; ++c) {
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const int r = i + di, q = j + dj;
                        if (r < 0 || r >= 4 || q < 0 || q >= 4) {
                            continue;
                        }
                        ref += x[(c * 4 + r) * 4 + q] * w[(c * 3 + di + 1) * 3 + dj + 1];
                    }
                }
            }
            CHECK(y[i * 4 + j] == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("five-parameter MLP matches central differences within 1e-6") {
    // x[4,2] -> relu(x W1^T + b1) [4,1] -> h W2^T + b2 -> mean squared error.
    const Tensor x = Tensor::matrix(4, 2, {0.5, 1.0, -0.3, 0.8, 1.2, -0.4, 0.9, 0.7});
    const Tensor y = Tensor::matrix(4, 1, {0.2, -0.1, 0.4, 0.3});
    auto f = [&](ad::Tape& tape, const std::vector<Var>& p) {
        Var h = ad::relu(ad::add(ad::matmul(tape.constant(x), p[0], false, true), ad::broadcast_rows(p[1], 4)));
        Var out = ad::add(ad::matmul(h, p[2], false, true), ad::broadcast_rows(p[3], 4));
        Var d = ad::sub(out, tape.constant(y));
        return ad::mean(ad::mul(d, d));
    };
    std::vector<Tensor> params{Tensor::matrix(1, 2, {0.7, 0.4}), Tensor::matrix(1, 1, {0.1}),
                               Tensor::matrix(1, 1, {-0.6}), Tensor::matrix(1, 1, {0.05})};
    std::size_t count = 0;
    for (const auto& p : params) {
        count += p.size();
    }
    REQUIRE(count == 5);
    CHECK(max_grad_error(f, params, 1e-5) < 1e-6);
}

TEST_CASE("second-order: Hessian-vector products through create_graph") {
    const Tensor x = test::random_tensor({2, 5}, 20);
    const Tensor v = test::random_tensor({2, 5}, 21);
    const double tol = 1e-5;
    CHECK(test::max_hvp_error(weighted([](const Var& a) { return ad::softmax(a); }), x, v) < tol);
    CHECK(test::max_hvp_error(weighted([](const Var& a) { return ad::log_softmax(a); }), x, v) < tol);
    CHECK(test::max_hvp_error(weighted([](const Var& a) { return ad::exp(a); }), x, v) < tol);
    CHECK(test::max_hvp_error(weighted([](const Var& a) { return ad::mul(a, ad::mul(a, a)); }), x, v) < tol);
    const Tensor pos = test::random_tensor({2, 5}, 22, 0.5, 2.0);
    CHECK(test::max_hvp_error(weighted([](const Var& a) { return ad::rsqrt(a); }), pos, v) < tol);
    CHECK(test::max_hvp_error(weighted([](const Var& a) { return ad::log(a); }), pos, v) < tol);
    CHECK(test::max_hvp_error(
              [](ad::Tape& tape, const std::vector<Var>& in) {
                  Var w = tape.constant(test::random_tensor({5, 3}, 23));
                  Var z = ad::matmul(in[0], w);
                  return ad::sum(ad::mul(z, z));
              },
              x, v) < tol);
}

TEST_CASE("shape errors name the op and both shapes") {
    ad::Tape tape;
    auto a = tape.constant(Tensor::zeros({2, 3}));
    auto b = tape.constant(Tensor::zeros({4, 2}));
    try {
        ad::matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("matmul") != std::string::npos);
        CHECK(msg.find("[2,3]") != std::string::npos);
        CHECK(msg.find("[4,2]") != std::string::npos);
    }
    CHECK_THROWS_AS(ad::add(a, b), ShapeError);
}

TEST_CASE("non-finite values are rejected") {
    ad::Tape tape;
    CHECK_THROWS_AS(tape.leaf(Tensor({1}, {NAN})), NumericError);
    auto z = tape.constant(Tensor({1}, {0.0}));
    CHECK_THROWS_AS(ad::log(z), NumericError);
}

TEST_CASE("truncation keeps window leaves and refuses to run inside an update") {
    ad::Tape tape;
    auto w = tape.leaf(Tensor({1}, {2.0}));
    auto w1 = ad::scale(w, 3.0);  // history before the marker
    {
        ad::Tape::UpdateScope scope(tape);
        CHECK_THROWS_AS(tape.truncate(std::vector<Var>{w1}), Error);
    }
    auto kept = tape.truncate(std::vector<Var>{w1})[0];
    CHECK(kept.value()[0] == 6.0);
    auto loss = ad::sum(ad::mul(kept, kept));
    auto g = tape.gradients(loss, std::vector<Var>{kept, w});
    CHECK(g[0][0] == 12.0);
    CHECK(g[1][0] == 0.0);  // no path back through the marker
}
