// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "sld/experiments/drivers.hpp"
#include "sld/experiments/powerlaw.hpp"
#include "sld/experiments/records.hpp"
#include "sld/labels/generate.hpp"
#include "sld/util/csv.hpp"
#include "sld/util/error.hpp"
#include "support/toy_study.hpp"

using namespace sld;
using namespace sld::experiments;

TEST_CASE("reference scaling-law constants") {
    const auto ref = tinyimagenet_reference();
    CHECK(ref.a == 29.9);
    CHECK(ref.b == 0.077);
    CHECK(ref.c == 0.8);
    CHECK(ref.s == 6.04);
    // soft(ipc) == hard(s * ipc)
    CHECK(ref.soft(10) == doctest::Approx(ref.hard(60.4)).epsilon(1e-14));
}

TEST_CASE("planted power law is recovered from noiseless points") {
    PowerLawFit planted;
    planted.a = 20;
    planted.b = 0.1;
    planted.c = 0.7;
    planted.s = 4;
    const std::vector<double> ipcs{1, 2, 5, 10, 20, 50, 100, 200};
    const auto hard = sample_curve(planted, ipcs, false);
    const auto soft = sample_curve(planted, ipcs, true);
    const auto fit = fit_power_law(hard, soft);
    REQUIRE(fit.has_value());
    CHECK(std::abs(fit->a - 20) / 20 < 0.05);
    CHECK(std::abs(fit->b - 0.1) / 0.1 < 0.05);
    CHECK(std::abs(fit->c - 0.7) / 0.7 < 0.05);
    CHECK(std::abs(fit->s - 4) / 4 < 0.05);
    CHECK(fit->rmse <= 1e-6);
    CHECK(fit->ipc_min == 1);
    CHECK(fit->ipc_max == 200);

    const auto s = fit_data_multiplier(*fit, soft);
    REQUIRE(s.has_value());
    CHECK(*s == doctest::Approx(fit->s).epsilon(1e-4));
}

TEST_CASE("power-law fit refuses degenerate data") {
    const std::vector<CurvePoint> flat{{1, 0.5}, {2, 0.5}, {5, 0.5}, {10, 0.5}};
    CHECK_FALSE(fit_power_law(flat, flat).has_value());
    const std::vector<CurvePoint> falling{{1, 0.9}, {2, 0.7}, {5, 0.5}, {10, 0.3}};
    CHECK_FALSE(fit_power_law(falling, falling).has_value());
}

TEST_CASE("upper envelope") {
    const std::vector<double> a{0.1, 0.4, 0.5}, b{0.3, 0.2, 0.6};
    const auto env = upper_envelope({a, b});
    CHECK(env == std::vector<double>{0.3, 0.4, 0.6});
    CHECK(upper_envelope({a}) == a);
    const std::vector<double> dip{0.5, 0.3, 0.6};
    CHECK(upper_envelope({dip}) == std::vector<double>{0.5, 0.5, 0.6});
    CHECK(default_k_grid(10) == std::vector<std::size_t>{1, 2, 4, 8, 10});
}

TEST_CASE("records, summaries and csv escaping") {
    Record r;
    r.experiment = "baseline";
    r.labels = "ensemble(epochs=1 2; seeds=3)";
    r.ipc = 1;
    std::vector<Record> rs;
    for (std::uint64_t s : {1, 2, 3}) {
        r.seed = s;
        r.accuracy = 0.1 * static_cast<double>(s);
        rs.push_back(r);
    }
    const auto sum = summarize(rs);
    REQUIRE(sum.size() == 1);
    CHECK(sum[0].n == 3);
    CHECK(sum[0].mean == doctest::Approx(0.2));
    CHECK(sum[0].stddev == doctest::Approx(0.1));
    CHECK(csv_safe("transformed(single-expert(3), topk=2)") == "transformed(single-expert(3); topk=2)");
    const auto t = records_table(rs);
    CHECK(t.rows.size() == 3);
    CHECK(csv::parse(csv::to_string(t)).rows == t.rows);
}

TEST_CASE("driver contracts on a toy study") {
    test::ToyStudy toy;
    CHECK_THROWS_AS(epoch_sweep(toy.ctx, toy.run, 1, {0, 4}), ConfigError);
    CHECK_THROWS_AS(temp_epoch_grid(toy.ctx, toy.run, 1, {2, 4}, {2.0, 4.0}), ConfigError);
    CHECK_THROWS_AS(run_baseline(toy.ctx, toy.run, {1}, {7}), DataError);
    CHECK_THROWS_AS(zero_shot(toy.ctx, toy.run.back(), 1, 9), ConfigError);
}

TEST_CASE("swap at i=C is exactly neutral") {
    test::ToyStudy toy;
    const auto st = swap_test(toy.ctx, toy.run.back(), 2, {1, 4});
    REQUIRE(st.curve.size() == 2);
    CHECK(st.curve[1].relative == 1.0);
    CHECK(st.records.size() == 9);
}

TEST_CASE("temperature 1 column equals the epoch sweep") {
    test::ToyStudy toy;
    const std::vector<std::size_t> epochs{0, 2, 4};
    const auto sweep = epoch_sweep(toy.ctx, toy.run, 2, epochs);
    const auto grid = temp_epoch_grid(toy.ctx, toy.run, 2, epochs, {1.0, 3.0});
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        CHECK(grid.mean[e][0] == sweep.curve[e].mean);
    }
    CHECK(sweep.curve[0].mean < 0.5);  // epoch-0 expert carries no information
}

TEST_CASE("pareto envelope dominates each expert curve") {
    test::ToyStudy toy;
    const auto pf = pareto_front(toy.ctx, toy.run, {1, 4}, {1, 2, 4});
    for (const auto& [e, curve] : pf.curve_by_epoch) {
        for (std::size_t j = 0; j < curve.size(); ++j) {
            CHECK(pf.envelope[j] >= curve[j]);
        }
    }
    for (std::size_t j = 1; j < pf.envelope.size(); ++j) {
        CHECK(pf.envelope[j] >= pf.envelope[j - 1]);
    }
}

TEST_CASE("zero-shot arms") {
    test::ToyStudy toy;
    const auto z = zero_shot(toy.ctx, toy.run.back(), 2, 1);
    CHECK(z.records.size() == 9);
    for (const auto& r : z.records) {
        REQUIRE(r.class_i.has_value());
        CHECK(*r.class_i == 1);
        CHECK(r.class_accuracy.has_value());
    }
}

TEST_CASE("driver output is reproducible byte for byte") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "sld_determinism";
    fs::remove_all(dir);
    std::string first;
    for (int pass = 0; pass < 2; ++pass) {
        test::ToyStudy toy;
        toy.ctx.jobs = pass == 0 ? 1 : 3;  // worker count must not matter
        const auto recs = run_baseline(toy.ctx, toy.run, {1, 2}, {1, 4});
        write_records(dir / std::to_string(pass), "baseline", recs);
        const auto text = csv::read_file(dir / std::to_string(pass) / "baseline.csv");
        const auto summary = csv::read_file(dir / std::to_string(pass) / "baseline_summary.csv");
        if (pass == 0) {
            first = text + summary;
        } else {
            CHECK(text + summary == first);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("scaling-law driver and ensemble comparison run end to end") {
    test::ToyStudy toy;
    const auto sl = scaling_law(toy.ctx, toy.run.back(), {1, 2, 4}, {1, 2, 4});
    CHECK(sl.hard.size() == 3);
    CHECK(sl.soft_by_k.size() == 3);
    CHECK_THROWS_AS(scaling_law(toy.ctx, toy.run.back(), {1, 2}, {2, 4}), ConfigError);

    const nn::Checkpoint& a = toy.run[3];
    const nn::Checkpoint& b = toy.run[4];
    const auto ec = ensemble_compare(toy.ctx, b, {&a, &b}, 2);
    CHECK(ec.delta == doctest::Approx(ec.ensemble - ec.single).epsilon(1e-12));

    const auto ce = select_ce_study(toy.ctx, toy.run.back(), 2, {1, 10});
    CHECK(ce.by_quantile.size() == 2);
}

TEST_CASE("compare_jsd on labels equal to one epoch") {
    test::ToyStudy toy;
    const auto d = distill(toy.ctx, 2);
    const auto learned = labels::gen_soft(toy.run[2], *d.images, 1.0);
    const auto cmp = compare_jsd(learned, {&toy.run}, *d.images, {1, 2, 3, 4});
    CHECK(cmp.mode_epoch == 2);
    CHECK(cmp.argmin_histogram.at(2) == d.set.size());
}
