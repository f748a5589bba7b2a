// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "check.hpp"
#include "sld/nn/checkpoint.hpp"
#include "sld/nn/loss.hpp"
#include "sld/nn/model.hpp"
#include "sld/nn/train.hpp"
#include "sld/util/error.hpp"

using namespace sld;
using ad::Tensor;
using ad::Var;

namespace {

// Two well separated classes of 2x2 single-channel images.
data::Dataset blobs(std::size_t n, std::uint64_t seed, data::Split split) {
    Rng rng(seed);
    std::vector<std::uint8_t> px(n * 4);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 2);
        for (std::size_t k = 0; k < 4; ++k) {
            const double centre = y[i] == 0 ? 60.0 : 190.0;
            px[i * 4 + k] = static_cast<std::uint8_t>(centre + rng.uniform(-40.0, 40.0));
        }
    }
    data::Dataset d("blobs", split, {1, 2, 2}, 2, std::move(px), std::move(y));
    d.normalize(data::Normalization{{0.5}, {0.25}});
    return d;
}

}  // namespace

TEST_CASE("soft cross-entropy hand values") {
    ad::Tape tape;
    auto logits = tape.constant(Tensor::matrix(1, 3, {2, 0, 0}));
    const double loss = nn::soft_ce_loss(logits, Tensor::matrix(1, 3, {1, 0, 0})).value().item();
    CHECK(loss == doctest::Approx(std::log(1 + 2 * std::exp(-2.0))).epsilon(1e-14));
    CHECK(loss == doctest::Approx(0.2395).epsilon(1e-4));
}

TEST_CASE("one-hot targets reduce to hard cross-entropy") {
    ad::Tape tape;
    const Tensor z = test::random_tensor({5, 4}, 3, -3, 3);
    const std::vector<int> y{0, 3, 1, 1, 2};
    auto logits = tape.constant(z);
    const double soft = nn::soft_ce_loss(logits, nn::one_hot(y, 4)).value().item();
    const double hard = nn::hard_ce_loss(logits, y).value().item();
    CHECK(soft == doctest::Approx(hard).epsilon(1e-14));
}

TEST_CASE("zero target rows contribute nothing; negative entries are rejected") {
    ad::Tape tape;
    auto logits = tape.constant(Tensor::matrix(2, 2, {1, -1, 0.5, 2}));
    const double both = nn::soft_ce_loss(logits, Tensor::matrix(2, 2, {1, 0, 0, 0})).value().item();
    auto first = tape.constant(Tensor::matrix(1, 2, {1, -1}));
    const double one = nn::soft_ce_loss(first, Tensor::matrix(1, 2, {1, 0})).value().item();
    CHECK(both * 2 == doctest::Approx(one).epsilon(1e-14));  // mean over 2 rows, one of them empty
    CHECK_THROWS_AS(nn::soft_ce_loss(logits, Tensor::matrix(2, 2, {1, -0.1, 0, 1})), DataError);
}

TEST_CASE("soft cross-entropy is differentiable in logits and targets") {
    const Tensor z = test::random_tensor({3, 4}, 5);
    const Tensor t = test::random_tensor({3, 4}, 6, 0.1, 1.0);
    CHECK(test::max_grad_error(
              [](ad::Tape&, const std::vector<Var>& in) { return nn::soft_ce_loss(in[0], in[1], 2.0); }, {z, t}) <
          1e-5);
}

TEST_CASE("parameter init and layout") {
    const auto spec = nn::ModelSpec::mlp({1, 4, 4}, {8}, 3);
    const auto layout = nn::param_layout(spec);
    REQUIRE(layout.size() == 4);
    CHECK(layout[0].shape == ad::Shape{8, 16});
    CHECK(nn::param_count(spec) == 8 * 16 + 8 + 3 * 8 + 3);
    const auto p = nn::init_params(spec, 11);
    for (double v : p[0].data()) {
        CHECK(std::abs(v) <= 1.0 / std::sqrt(16.0));
    }
    CHECK(nn::init_params(spec, 11) == p);
    CHECK(nn::unflatten(spec, nn::flatten(p)) == p);
    CHECK(nn::ModelSpec::from_json(spec.to_json()) == spec);
}

TEST_CASE("convnet forward shapes and gradients") {
    const auto spec = nn::ModelSpec::convnet({3, 8, 8}, 2, 4, 5);
    const auto params = nn::init_params(spec, 2);
    const Tensor x = test::random_tensor({2, 3, 8, 8}, 3);
    CHECK(nn::predict_logits(spec, params, x).shape() == ad::Shape{2, 5});
    auto f = [&](ad::Tape& tape, const std::vector<Var>& in) {
        std::vector<Var> vars;
        for (std::size_t i = 0; i < params.size(); ++i) {
            vars.push_back(i == 0 ? in[0] : tape.constant(params[i]));
        }
        return nn::hard_ce_loss(nn::forward(spec, vars, tape.constant(x)), std::vector<int>{1, 4});
    };
    CHECK(test::max_grad_error(f, {params[0]}) < 1e-4);
    CHECK_THROWS_AS(nn::ModelSpec::convnet({3, 2, 2}, 3, 4, 5).validate(), ConfigError);
}

TEST_CASE("evaluation: chance at init, deterministic") {
    const auto test_set = nn::EvalSet::from(blobs(400, 9, data::Split::test));
    const auto spec = nn::ModelSpec::mlp({1, 2, 2}, {4}, 2);
    const auto p = nn::init_params(spec, 5);
    const double a = nn::evaluate(spec, p, test_set);
    CHECK(a == nn::evaluate(spec, p, test_set));
    const auto ev = nn::evaluate_detailed(spec, p, test_set);
    CHECK(ev.class_count[0] == 200);
    CHECK((ev.class_accuracy[0] + ev.class_accuracy[1]) / 2 == doctest::Approx(ev.accuracy));
}

TEST_CASE("expert training checkpoints every epoch") {
    const auto train = blobs(200, 1, data::Split::train);
    const auto test_set = nn::EvalSet::from(blobs(100, 2, data::Split::test));
    const auto spec = nn::ModelSpec::mlp({1, 2, 2}, {4}, 2);
    nn::TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.batch_size = 32;
    cfg.seed = 3;
    cfg.epochs = 0;
    const auto zero = nn::train_expert(train, test_set, spec, cfg);
    REQUIRE(zero.checkpoints.size() == 1);
    CHECK(zero.checkpoints[0].epoch == 0);

    cfg.epochs = 5;
    std::size_t seen = 0;
    const auto run = nn::train_expert(train, test_set, spec, cfg, [&](const nn::Checkpoint&) { ++seen; });
    CHECK(seen == 6);
    CHECK(run.checkpoints.back().test_accuracy > 0.95);
    // Same config, same seed: identical parameters.
    const auto again = nn::train_expert(train, test_set, spec, cfg);
    CHECK(again.checkpoints.back().params == run.checkpoints.back().params);
}

TEST_CASE("student training") {
    const auto train = blobs(40, 1, data::Split::train);
    const auto test_set = nn::EvalSet::from(blobs(200, 2, data::Split::test));
    const auto spec = nn::ModelSpec::mlp({1, 2, 2}, {4}, 2);
    nn::StudentConfig cfg;
    cfg.lr = 0.1;
    const auto targets = nn::one_hot(train.labels(), 2);
    const auto r = nn::train_student(train.images(), targets, spec, cfg, test_set, 7);
    CHECK(r.best_accuracy > 0.95);
    CHECK(r.epochs_run <= cfg.max_epochs);
    CHECK(r.class_accuracy.size() == 2);
    const auto again = nn::train_student(train.images(), targets, spec, cfg, test_set, 7);
    CHECK(again.best_accuracy == r.best_accuracy);
    CHECK(again.params == r.params);

    Tensor empty = targets;
    empty.at(3, 0) = 0.0;
    empty.at(3, 1) = 0.0;
    CHECK_THROWS_AS(nn::train_student(train.images(), empty, spec, cfg, test_set, 7), DataError);
}

TEST_CASE("checkpoint round trip and epoch lookup") {
    const auto spec = nn::ModelSpec::mlp({1, 2, 2}, {3}, 2);
    nn::Checkpoint c{spec, nn::init_params(spec, 4), 7, 0.625, 0xabc, 4};
    const auto back = nn::decode_checkpoint(nn::encode_checkpoint(c));
    CHECK(back.params == c.params);
    CHECK(back.epoch == 7);
    CHECK(back.test_accuracy == 0.625);
    CHECK(back.spec == spec);
    std::string bytes = nn::encode_checkpoint(c);
    CHECK_THROWS_AS(nn::decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
    bytes[0] = 'X';
    CHECK_THROWS_AS(nn::decode_checkpoint(bytes), FormatError);

    const std::vector<nn::Checkpoint> run{c};
    try {
        nn::find_epoch(run, 3);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("7") != std::string::npos);
    }

    const auto dir = std::filesystem::temp_directory_path() / "sld_ckpt_test";
    std::filesystem::create_directories(dir);
    nn::save_checkpoint(nn::checkpoint_path(dir, 7), c);
    const auto loaded = nn::load_run(dir);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].params == c.params);
    std::filesystem::remove_all(dir);
}
