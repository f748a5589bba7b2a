// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/experiments/drivers.hpp"

#include <algorithm>
#include <cmath>

#include "sld/labels/generate.hpp"
#include "sld/labels/transforms.hpp"
#include "sld/nn/loss.hpp"
#include "sld/util/error.hpp"

namespace sld::experiments {
namespace {

Record base_key(const StudyContext& ctx, const std::string& experiment, const std::string& arm) {
    Record r;
    r.experiment = experiment;
    r.dataset = ctx.train->name();
    r.arm = arm;
    return r;
}

// Accuracies of arm `a` in run_arms output.
std::vector<double> arm_acc(const std::vector<Record>& recs, std::size_t a, std::size_t per) {
    std::vector<double> out;
    for (std::size_t s = 0; s < per; ++s) {
        out.push_back(recs[a * per + s].accuracy);
    }
    return out;
}

std::vector<double> arm_class_acc(const std::vector<Record>& recs, std::size_t a, std::size_t per) {
    std::vector<double> out;
    for (std::size_t s = 0; s < per; ++s) {
        out.push_back(recs[a * per + s].class_accuracy.value_or(0.0));
    }
    return out;
}

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

std::vector<Record> run_baseline(const StudyContext& ctx, const Run& run, const std::vector<std::size_t>& ipcs,
                                 const std::vector<std::size_t>& epochs, double tau) {
    ctx.validate();
    for (std::size_t e : epochs) {
        (void)nn::find_epoch(run, e);
    }
    std::vector<Arm> arms;
    for (std::size_t ipc : ipcs) {
        const Distilled d = distill(ctx, ipc);
        arms.push_back(make_arm(base_key(ctx, "baseline", "hard"), d,
                                labels::hard_labels(d.labels, ctx.student_spec.num_classes)));
        for (std::size_t e : epochs) {
            Record key = base_key(ctx, "baseline", "soft");
            key.expert_epoch = e;
            arms.push_back(make_arm(key, d, labels::gen_soft(nn::find_epoch(run, e), *d.images, tau)));
        }
    }
    return run_arms(ctx, arms);
}

EpochSweep epoch_sweep(const StudyContext& ctx, const Run& run, std::size_t ipc, const std::vector<std::size_t>& epochs_in) {
    ctx.validate();
    const auto epochs = sorted_unique(epochs_in);
    if (epochs.size() < 3) {
        throw ConfigError("epoch_sweep: needs at least 3 checkpoints, got " + std::to_string(epochs.size()));
    }
    const Distilled d = distill(ctx, ipc);
    std::vector<Arm> arms;
    for (std::size_t e : epochs) {
        Record key = base_key(ctx, "epoch_sweep", "soft");
        key.expert_epoch = e;
        arms.push_back(make_arm(key, d, labels::gen_soft(nn::find_epoch(run, e), *d.images, 1.0)));
    }
    EpochSweep out;
    out.records = run_arms(ctx, arms);
    const std::size_t per = ctx.seeds.size();
    out.best_accuracy = -1.0;
    for (std::size_t a = 0; a < epochs.size(); ++a) {
        const auto acc = arm_acc(out.records, a, per);
        EpochPoint p{epochs[a], mean(acc), sample_stddev(acc), nn::find_epoch(run, epochs[a]).test_accuracy,
                     arms[a].key.mean_entropy};
        if (p.mean > out.best_accuracy) {
            out.best_accuracy = p.mean;
            out.best_epoch = p.epoch;
        }
        out.curve.push_back(p);
    }
    return out;
}

TempEpochGrid temp_epoch_grid(const StudyContext& ctx, const Run& run, std::size_t ipc,
                              const std::vector<std::size_t>& epochs, const std::vector<double>& temperatures) {
    ctx.validate();
    if (std::find(temperatures.begin(), temperatures.end(), 1.0) == temperatures.end()) {
        throw ConfigError("temp_epoch_grid: temperature list must include 1.0");
    }
    const Distilled d = distill(ctx, ipc);
    TempEpochGrid g;
    g.epochs = sorted_unique(epochs);
    g.temperatures = temperatures;
    std::vector<Arm> arms;
    for (std::size_t e : g.epochs) {
        for (double t : temperatures) {
            Record key = base_key(ctx, "temp_epoch_grid", "soft");
            key.expert_epoch = e;
            arms.push_back(make_arm(key, d, labels::gen_soft(nn::find_epoch(run, e), *d.images, t)));
        }
    }
    g.records = run_arms(ctx, arms);
    const std::size_t per = ctx.seeds.size();
    g.best_accuracy = -1.0;
    std::size_t a = 0;
    for (std::size_t e : g.epochs) {
        g.mean.emplace_back();
        for (double t : temperatures) {
            const double m = mean(arm_acc(g.records, a++, per));
            g.mean.back().push_back(m);
            if (m > g.best_accuracy) {
                g.best_accuracy = m;
                g.best_epoch = e;
                g.best_temperature = t;
            }
        }
    }
    return g;
}

SwapTest swap_test(const StudyContext& ctx, const nn::Checkpoint& expert, std::size_t ipc,
                   const std::vector<std::size_t>& i_list) {
    ctx.validate();
    const Distilled d = distill(ctx, ipc);
    const labels::SoftLabelSet base = labels::gen_soft(expert, *d.images, 1.0);
    std::vector<Arm> arms;
    Record key = base_key(ctx, "swap_test", "unswapped");
    key.expert_epoch = expert.epoch;
    arms.push_back(make_arm(key, d, base));
    for (std::size_t i : i_list) {
        Record k = base_key(ctx, "swap_test", "swapped");
        k.expert_epoch = expert.epoch;
        k.swap_i = i;
        arms.push_back(make_arm(k, d, labels::swap_label(base, i)));
    }
    SwapTest out;
    out.records = run_arms(ctx, arms);
    const std::size_t per = ctx.seeds.size();
    const auto ref = arm_acc(out.records, 0, per);
    for (std::size_t a = 0; a < i_list.size(); ++a) {
        const auto acc = arm_acc(out.records, a + 1, per);
        std::vector<double> rel;
        for (std::size_t s = 0; s < per; ++s) {
            if (!(ref[s] > 0.0)) {
                throw NumericError("swap_test: unswapped accuracy is zero for seed " + std::to_string(ctx.seeds[s]));
            }
            rel.push_back(acc[s] / ref[s]);
        }
        out.curve.push_back({i_list[a], mean(rel), sample_stddev(rel)});
    }
    return out;
}

std::vector<std::size_t> default_k_grid(std::size_t num_classes) {
    std::vector<std::size_t> k;
    for (std::size_t p = 1; p < num_classes; p *= 2) {
        k.push_back(p);
    }
    k.push_back(num_classes);
    return k;
}

ScalingLaw scaling_law(const StudyContext& ctx, const nn::Checkpoint& expert, const std::vector<std::size_t>& ipcs_in,
                       const std::vector<std::size_t>& ks_in) {
    ctx.validate();
    const std::size_t c = ctx.student_spec.num_classes;
    const auto ipcs = sorted_unique(ipcs_in);
    auto ks = sorted_unique(ks_in);
    if (ks.empty() || ks.back() != c || ks.front() != 1) {
        throw ConfigError("scaling_law: k grid must include 1 and C=" + std::to_string(c));
    }
    std::vector<Arm> arms;
    for (std::size_t ipc : ipcs) {
        const Distilled d = distill(ctx, ipc);
        arms.push_back(make_arm(base_key(ctx, "scaling_law", "hard"), d, labels::hard_labels(d.labels, c)));
        const auto full = labels::gen_soft(expert, *d.images, 1.0);
        for (std::size_t k : ks) {
            Record key = base_key(ctx, "scaling_law", "soft");
            key.expert_epoch = expert.epoch;
            key.topk = k;
            arms.push_back(make_arm(key, d, labels::topk_truncate(full, k)));
        }
    }
    ScalingLaw out;
    out.records = run_arms(ctx, arms);
    const std::size_t per = ctx.seeds.size();
    std::size_t a = 0;
    for (std::size_t ipc : ipcs) {
        out.hard.push_back({static_cast<double>(ipc), mean(arm_acc(out.records, a++, per))});
        for (std::size_t k : ks) {
            out.soft_by_k[k].push_back({static_cast<double>(ipc), mean(arm_acc(out.records, a++, per))});
        }
    }
    out.fit = fit_power_law(out.hard, out.soft_by_k[c]);
    if (out.fit) {
        for (std::size_t k : ks) {
            if (auto s = fit_data_multiplier(*out.fit, out.soft_by_k[k])) {
                out.s_by_k[k] = *s;
            }
        }
    }
    return out;
}

std::vector<double> upper_envelope(const std::vector<std::vector<double>>& curves) {
    std::vector<double> env;
    if (curves.empty()) {
        return env;
    }
    const std::size_t n = curves.front().size();
    double running = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
        double m = -INFINITY;
        for (const auto& c : curves) {
            if (c.size() != n) {
                throw ShapeError("upper_envelope: curves of different lengths");
            }
            m = std::max(m, c[j]);
        }
        running = std::max(running, m);
        env.push_back(running);
    }
    return env;
}

ParetoFront pareto_front(const StudyContext& ctx, const Run& run, const std::vector<std::size_t>& epochs_in,
                         const std::vector<std::size_t>& ipcs_in) {
    ctx.validate();
    const auto epochs = sorted_unique(epochs_in);
    if (epochs.empty()) {
        throw ConfigError("pareto_front: no experts given");
    }
    ParetoFront out;
    out.ipcs = sorted_unique(ipcs_in);
    std::vector<Arm> arms;
    for (std::size_t ipc : out.ipcs) {
        const Distilled d = distill(ctx, ipc);
        for (std::size_t e : epochs) {
            Record key = base_key(ctx, "pareto", "soft");
            key.expert_epoch = e;
            arms.push_back(make_arm(key, d, labels::gen_soft(nn::find_epoch(run, e), *d.images, 1.0)));
        }
    }
    out.records = run_arms(ctx, arms);
    const std::size_t per = ctx.seeds.size();
    std::size_t a = 0;
    for (std::size_t j = 0; j < out.ipcs.size(); ++j) {
        double best = -INFINITY;
        std::size_t best_e = epochs.front();
        for (std::size_t e : epochs) {
            const double m = mean(arm_acc(out.records, a++, per));
            out.curve_by_epoch[e].push_back(m);
            if (m > best) {
                best = m;
                best_e = e;
            }
        }
        out.argmax_epoch.push_back(best_e);
    }
    std::vector<std::vector<double>> curves;
    for (const auto& [e, c] : out.curve_by_epoch) {
        curves.push_back(c);
    }
    out.envelope = upper_envelope(curves);
    return out;
}

ZeroShot zero_shot(const StudyContext& ctx, const nn::Checkpoint& expert, std::size_t ipc, std::size_t class_i) {
    ctx.validate();
    const std::size_t c = ctx.student_spec.num_classes;
    if (class_i >= c) {
        throw ConfigError("zero_shot: class " + std::to_string(class_i) + " outside [0," + std::to_string(c) + ")");
    }
    const Distilled d = distill(ctx, ipc);
    const auto full = labels::gen_soft(expert, *d.images, 1.0);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < d.labels.size(); ++r) {
        if (static_cast<std::size_t>(d.labels[r]) != class_i) {
            keep.push_back(r);
        }
    }
    if (keep.size() == d.labels.size()) {
        throw DataError("zero_shot: class " + std::to_string(class_i) + " has no images in the distilled set");
    }
    if (keep.size() != ipc * (c - 1)) {
        throw DataError("zero_shot: " + std::to_string(keep.size()) + " remaining images, expected ipc*(C-1)=" +
                        std::to_string(ipc * (c - 1)));
    }
    ZeroShot out;
    out.class_never_predicted = true;
    for (std::size_t r = 0; r < full.rows(); ++r) {
        if (labels::rank_order(full.row(r))[0] == class_i) {
            out.class_never_predicted = false;
        }
    }
    Distilled reduced;
    reduced.set = d.set;
    reduced.set.indices.clear();
    for (std::size_t r : keep) {
        reduced.set.indices.push_back(d.set.indices[r]);
        reduced.labels.push_back(d.labels[r]);
    }
    reduced.images = std::make_shared<const ad::Tensor>(ctx.train->images(reduced.set.indices));

    std::vector<Arm> arms;
    auto key = [&](const char* arm) {
        Record k = base_key(ctx, "zero_shot", arm);
        k.expert_epoch = expert.epoch;
        k.class_i = class_i;
        return k;
    };
    arms.push_back(make_arm(key("control"), d, full));
    {
        labels::SoftLabelSet kept = labels::select_rows(full, keep);
        kept.provenance = labels::provenance::transformed(full.provenance, "drop-images=" + std::to_string(class_i));
        arms.push_back(make_arm(key("remove_image"), reduced, kept));
    }
    arms.push_back(make_arm(key("remove_label"), d, labels::zero_class(full, class_i, d.labels)));
    out.records = run_arms(ctx, arms);
    const std::size_t per = ctx.seeds.size();
    auto summarize_arm = [&](std::size_t a) {
        return ZeroShotArm{mean(arm_class_acc(out.records, a, per)), mean(arm_acc(out.records, a, per))};
    };
    out.control = summarize_arm(0);
    out.remove_image = summarize_arm(1);
    out.remove_label = summarize_arm(2);
    return out;
}

EnsembleCompare ensemble_compare(const StudyContext& ctx, const nn::Checkpoint& single,
                                 const std::vector<const nn::Checkpoint*>& members, std::size_t ipc, double tau) {
    ctx.validate();
    const Distilled d = distill(ctx, ipc);
    std::vector<Arm> arms;
    Record k1 = base_key(ctx, "ensemble", "single");
    k1.expert_epoch = single.epoch;
    arms.push_back(make_arm(k1, d, labels::gen_soft(single, *d.images, tau)));
    Record k2 = base_key(ctx, "ensemble", "ensemble");
    k2.expert_epoch = single.epoch;
    arms.push_back(make_arm(k2, d, labels::gen_ensemble(members, *d.images, tau)));
    EnsembleCompare out;
    out.records = run_arms(ctx, arms);
    const std::size_t per = ctx.seeds.size();
    const auto a = arm_acc(out.records, 0, per);
    const auto b = arm_acc(out.records, 1, per);
    std::vector<double> diff;
    for (std::size_t s = 0; s < per; ++s) {
        diff.push_back(b[s] - a[s]);
    }
    out.single = mean(a);
    out.ensemble = mean(b);
    out.delta = mean(diff);
    return out;
}

std::vector<double> expert_cross_entropy(const nn::Checkpoint& expert, const data::Dataset& dataset) {
    return nn::per_row_ce(nn::predict_logits(expert.spec, expert.params, dataset.images()), dataset.labels());
}

CeSelection select_ce_study(const StudyContext& ctx, const nn::Checkpoint& expert, std::size_t ipc,
                            const std::vector<std::size_t>& quantiles) {
    ctx.validate();
    const auto ce = expert_cross_entropy(expert, *ctx.train);
    std::vector<Arm> arms;
    {
        const Distilled d = distill(ctx, ipc);
        Record k = base_key(ctx, "select_ce", "random");
        k.expert_epoch = expert.epoch;
        arms.push_back(make_arm(k, d, labels::gen_soft(expert, *d.images, 1.0)));
    }
    for (std::size_t q : quantiles) {
        const Distilled d = distill_rows(ctx, data::select_by_ce(*ctx.train, ce, ipc, q, ctx.image_seed));
        Record k = base_key(ctx, "select_ce", "q" + std::to_string(q));
        k.expert_epoch = expert.epoch;
        arms.push_back(make_arm(k, d, labels::gen_soft(expert, *d.images, 1.0)));
    }
    CeSelection out;
    out.records = run_arms(ctx, arms);
    const std::size_t per = ctx.seeds.size();
    out.random = mean(arm_acc(out.records, 0, per));
    for (std::size_t a = 0; a < quantiles.size(); ++a) {
        out.by_quantile[quantiles[a]] = mean(arm_acc(out.records, a + 1, per));
    }
    return out;
}

JsdComparison compare_jsd(const labels::SoftLabelSet& learned, const std::vector<const Run*>& runs,
                          const ad::Tensor& images, const std::vector<std::size_t>& epochs, double tau) {
    if (runs.empty()) {
        throw ConfigError("compare_jsd: no expert runs");
    }
    std::map<std::size_t, labels::SoftLabelSet> by_epoch;
    for (std::size_t e : sorted_unique(epochs)) {
        if (runs.size() == 1) {
            by_epoch.emplace(e, labels::gen_soft(nn::find_epoch(*runs[0], e), images, tau));
        } else {
            std::vector<const nn::Checkpoint*> members;
            for (const Run* r : runs) {
                members.push_back(&nn::find_epoch(*r, e));
            }
            by_epoch.emplace(e, labels::gen_ensemble(members, images, tau));
        }
    }
    JsdComparison out;
    out.normalized = labels::normalized_jsd(learned, by_epoch);
    for (std::size_t e : out.normalized.argmin_epochs()) {
        ++out.argmin_histogram[e];
    }
    std::size_t best = 0;
    for (const auto& [e, n] : out.argmin_histogram) {
        if (n > best) {
            best = n;
            out.mode_epoch = e;
        }
    }
    return out;
}

}  // namespace sld::experiments
