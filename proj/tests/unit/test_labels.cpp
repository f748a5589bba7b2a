// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "check.hpp"
#include "sld/labels/generate.hpp"
#include "sld/labels/io.hpp"
#include "sld/labels/metrics.hpp"
#include "sld/labels/soft_labels.hpp"
#include "sld/labels/transforms.hpp"
#include "sld/nn/train.hpp"
#include "sld/util/error.hpp"

using namespace sld;
using ad::Tensor;
using labels::SoftLabelSet;

namespace {

// Linear model whose logits are its bias for every input.
nn::Checkpoint constant_expert(std::vector<double> logits, std::size_t epoch = 3) {
    const std::size_t c = logits.size();
    const auto spec = nn::ModelSpec::mlp({1, 1, 2}, {}, c);
    nn::Params p{Tensor::zeros({c, 2}), Tensor({c}, std::move(logits))};
    return nn::Checkpoint{spec, std::move(p), epoch, 0.0, 0, 0};
}

SoftLabelSet random_labels(std::size_t m, std::size_t c, std::uint64_t seed) {
    Tensor z = test::random_tensor({m, c}, seed, -3, 3);
    return labels::from_logits(z, 1.0, "test");
}

double row_sum(std::span<const double> r) {
    return std::accumulate(r.begin(), r.end(), 0.0);
}

}  // namespace

TEST_CASE("gen_soft hand values and the temperature limit") {
    const auto e = constant_expert({2, 0, 0});
    const Tensor x = Tensor::zeros({1, 1, 1, 2});
    const auto l = labels::gen_soft(e, x, 1.0);
    CHECK(l.scores[0] == doctest::Approx(0.7870).epsilon(1e-4));
    CHECK(l.scores[1] == doctest::Approx(0.1065).epsilon(1e-3));
    CHECK(l.scores[2] == doctest::Approx(0.1065).epsilon(1e-3));
    CHECK(l.provenance == "single-expert(3)");
    const auto hot = labels::gen_soft(e, x, 1e6);
    for (double v : hot.scores.data()) {
        CHECK(std::abs(v - 1.0 / 3.0) < 1e-4);
    }
    CHECK_THROWS_AS(labels::gen_soft(e, x, 0.0), ConfigError);
}

TEST_CASE("ensembles average logits") {
    const Tensor x = Tensor::zeros({1, 1, 1, 2});
    const auto a = constant_expert({1, 0}), b = constant_expert({0, 1});
    const auto ab = labels::gen_ensemble({&a, &b}, x, 1.0);
    CHECK(ab.scores[0] == doctest::Approx(0.5).epsilon(1e-15));

    const auto c = constant_expert({2, 0}), d = constant_expert({0, 1});
    const auto cd = labels::gen_ensemble({&c, &d}, x, 1.0);
    const double logit_mean = 1.0 / (1.0 + std::exp(-0.5));  // softmax([1, 0.5])[0]
    const double prob_mean = 0.5 * (1.0 / (1.0 + std::exp(-2.0)) + 1.0 / (1.0 + std::exp(1.0)));
    CHECK(cd.scores[0] == doctest::Approx(logit_mean).epsilon(1e-14));
    CHECK(std::abs(cd.scores[0] - prob_mean) > 1e-2);

    const auto same = labels::gen_ensemble({&c, &c}, x, 2.0);
    CHECK(same.scores == labels::gen_soft(c, x, 2.0).scores);
    CHECK_THROWS_AS(labels::gen_ensemble({&c}, x, 1.0), ConfigError);
}

TEST_CASE("top-k truncation") {
    SoftLabelSet l{Tensor::matrix(1, 3, {0.5, 0.3, 0.2}), "p", 1.0};
    CHECK(labels::topk_truncate(l, 2).scores == Tensor::matrix(1, 3, {0.5, 0.3, 0.0}));
    CHECK(labels::topk_truncate(l, 2).provenance == "transformed(p, topk=2)");
    const auto r = random_labels(20, 6, 1);
    CHECK(labels::topk_truncate(r, 6).scores == r.scores);
    const auto one = labels::topk_truncate(r, 1);
    for (std::size_t i = 0; i < r.rows(); ++i) {
        const auto row = r.row(i);
        CHECK(row_sum(one.row(i)) == *std::max_element(row.begin(), row.end()));
    }
    CHECK_THROWS_AS(labels::topk_truncate(r, 0), ConfigError);
    CHECK_THROWS_AS(labels::topk_truncate(r, 7), ConfigError);
}

TEST_CASE("label swapping") {
    const auto r = random_labels(30, 5, 2);
    CHECK(labels::swap_label(r, 5).scores == r.scores);
    for (std::size_t i = 1; i <= 5; ++i) {
        const auto s = labels::swap_label(r, i);
        for (std::size_t row = 0; row < r.rows(); ++row) {
            CHECK(row_sum(s.row(row)) == doctest::Approx(row_sum(r.row(row))).epsilon(1e-15));
            auto a = std::vector<double>(s.row(row).begin(), s.row(row).end());
            auto b = std::vector<double>(r.row(row).begin(), r.row(row).end());
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
        // Applying the same swap twice restores rows without ties.
        CHECK(labels::swap_label(s, i).scores == r.scores);
    }
    SoftLabelSet l{Tensor::matrix(1, 4, {0.1, 0.6, 0.2, 0.1}), "p", 1.0};
    // ranks: 1 -> class 1, 2 -> class 2, 3 -> class 0, 4 -> class 3 (ties by index)
    CHECK(labels::swap_label(l, 1).scores == Tensor::matrix(1, 4, {0.1, 0.1, 0.2, 0.6}));
    CHECK(labels::swap_label(l, 2).scores == Tensor::matrix(1, 4, {0.1, 0.6, 0.1, 0.2}));
}

TEST_CASE("zero_class keeps own-class rows and does not renormalize") {
    SoftLabelSet l{Tensor::matrix(2, 3, {0.7, 0.2, 0.1, 0.3, 0.6, 0.1}), "p", 1.0};
    const std::vector<int> y{0, 1};
    const auto z = labels::zero_class(l, 1, y);
    CHECK(z.scores == Tensor::matrix(2, 3, {0.7, 0.0, 0.1, 0.3, 0.6, 0.1}));
}

TEST_CASE("entropy") {
    SoftLabelSet u{Tensor::full({2, 8}, 1.0 / 8), "u", 1.0};
    CHECK(labels::entropy(u).mean == doctest::Approx(std::log(8.0)).epsilon(1e-14));
    CHECK(labels::entropy(labels::hard_labels(std::vector<int>{0, 3}, 4)).mean == 0.0);
}

TEST_CASE("jsd properties") {
    const std::vector<double> p{1, 0}, q{0, 1};
    CHECK(labels::jsd(p, q) == 1.0);
    const auto a = random_labels(50, 7, 3), b = random_labels(50, 7, 4);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(labels::jsd(a.row(i), a.row(i)) < 1e-12);
        CHECK(labels::jsd(a.row(i), b.row(i)) == labels::jsd(b.row(i), a.row(i)));
        const double d = labels::jsd(a.row(i), b.row(i));
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
    // Truncated rows are renormalized before comparison.
    const std::vector<double> half{0.25, 0.25, 0}, full{0.5, 0.5, 0};
    CHECK(labels::jsd(half, full) < 1e-12);
    CHECK_THROWS_AS(labels::jsd(std::vector<double>{0, 0}, p), DataError);
}

TEST_CASE("normalized jsd") {
    const auto learned = random_labels(10, 4, 5);
    std::map<std::size_t, SoftLabelSet> by_epoch;
    for (std::size_t e : {0u, 5u, 10u}) {
        by_epoch.emplace(e, random_labels(10, 4, 10 + e));
    }
    const auto n = labels::normalized_jsd(learned, by_epoch);
    for (std::size_t r = 0; r < 10; ++r) {
        double lo = 1, hi = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            lo = std::min(lo, n.normalized.at(r, k));
            hi = std::max(hi, n.normalized.at(r, k));
        }
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
    }
    // A learned set identical to one epoch points at it.
    const auto self = labels::normalized_jsd(by_epoch.at(5), by_epoch);
    for (auto e : self.argmin_epochs()) {
        CHECK(e == 5);
    }
    std::map<std::size_t, SoftLabelSet> single{{0, learned}};
    CHECK_THROWS_AS(labels::normalized_jsd(learned, single), ConfigError);
    // Constant rows are flagged and reported as 0.
    std::map<std::size_t, SoftLabelSet> twins{{1, learned}, {2, learned}};
    const auto flat = labels::normalized_jsd(learned, twins);
    CHECK(flat.flagged.size() == 10);
}

TEST_CASE("class similarity accounting") {
    const auto h = labels::hard_labels(std::vector<int>{0, 1, 2, 1}, 3);
    const auto z = labels::class_similarity_matrix(h);
    for (double v : z.matrix.data()) {
        CHECK(v == 0.0);
    }
    const auto r = random_labels(200, 4, 6);
    const auto s = labels::class_similarity_matrix(r);
    for (std::size_t c = 0; c < 4; ++c) {
        double top = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < r.rows(); ++i) {
            if (labels::rank_order(r.row(i))[0] == c) {
                top += r.row(i)[c];
                ++n;
            }
        }
        CHECK(n == s.group_size[c]);
        if (n > 0) {
            CHECK(row_sum(s.matrix.row(c)) == doctest::Approx(1.0 - top / static_cast<double>(n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("confusable classes show up as an off-diagonal block") {
    // Class 0 far away; classes 1 and 2 overlap.
    Rng rng(17);
    const std::size_t n = 600;
    std::vector<std::uint8_t> px(n * 2);
    std::vector<int> y(n);
    const double centre[3][2] = {{40, 40}, {170, 150}, {150, 170}};
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 3);
        for (std::size_t k = 0; k < 2; ++k) {
            px[i * 2 + k] = static_cast<std::uint8_t>(std::clamp(centre[y[i]][k] + 20 * rng.normal(), 0.0, 255.0));
        }
    }
    data::Dataset ds("blobs3", data::Split::train, {1, 1, 2}, 3, px, y);
    ds.normalize(data::compute_normalization(ds));
    const auto test_set = nn::EvalSet::from(ds);
    nn::TrainConfig cfg;
    cfg.lr = 0.05;
    cfg.epochs = 15;
    cfg.batch_size = 32;
    cfg.seed = 1;
    const auto run = nn::train_expert(ds, test_set, nn::ModelSpec::mlp({1, 1, 2}, {8}, 3), cfg);
    const auto s = labels::class_similarity_matrix(run.checkpoints.back(), ds);
    const double block = 0.5 * (s.matrix.at(1, 2) + s.matrix.at(2, 1));
    const double background = 0.25 * (s.matrix.at(0, 1) + s.matrix.at(0, 2) + s.matrix.at(1, 0) + s.matrix.at(2, 0));
    CHECK(block > 5 * background);
}

TEST_CASE("label file round trip") {
    auto l = random_labels(6, 3, 7);
    l.provenance = labels::provenance::transformed(labels::provenance::single_expert(11), "topk=10");
    l.temperature = 2.5;
    const auto back = labels::decode(labels::encode(l));
    CHECK(back.scores == l.scores);
    CHECK(back.provenance == "transformed(single-expert(11), topk=10)");
    CHECK(back.temperature == 2.5);
    auto bytes = labels::encode(l);
    CHECK_THROWS_AS(labels::decode(bytes + "x"), FormatError);
    CHECK_THROWS_AS(labels::decode(bytes.substr(0, 20)), FormatError);
}
