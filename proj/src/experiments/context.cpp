// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/experiments/context.hpp"

#include <chrono>

#include "sld/labels/metrics.hpp"
#include "sld/util/error.hpp"
#include "sld/util/worker_pool.hpp"

namespace sld::experiments {

void StudyContext::validate() const {
    if (train == nullptr || test == nullptr) {
        throw ConfigError("study: train and test data are required");
    }
    if (seeds.empty()) {
        throw ConfigError("study: at least one student seed is required");
    }
    student.validate();
}

nn::StudentConfig StudyContext::student_for(std::size_t ipc) const {
    nn::StudentConfig c = student;
    if (auto it = lr_by_ipc.find(ipc); it != lr_by_ipc.end()) {
        c.lr = it->second;
    }
    return c;
}

Distilled distill_rows(const StudyContext& ctx, data::DistilledSet set) {
    Distilled d;
    d.images = std::make_shared<const ad::Tensor>(ctx.train->images(set.indices));
    d.labels = ctx.train->labels(set.indices);
    d.set = std::move(set);
    return d;
}

Distilled distill(const StudyContext& ctx, std::size_t ipc) {
    return distill_rows(ctx, data::sample_ipc(*ctx.train, ipc, ctx.image_seed));
}

Arm make_arm(Record key, const Distilled& d, const labels::SoftLabelSet& labels) {
    if (labels.rows() != d.set.size()) {
        throw ShapeError("arm '" + key.arm + "': " + std::to_string(labels.rows()) + " label rows for " +
                         std::to_string(d.set.size()) + " images");
    }
    key.labels = labels.provenance;
    key.temperature = labels.temperature;
    key.mean_entropy = labels::entropy(labels).mean;
    key.ipc = d.set.ipc;
    return Arm{std::move(key), d.images, std::make_shared<const ad::Tensor>(labels.scores)};
}

std::vector<Record> run_arms(const StudyContext& ctx, const std::vector<Arm>& arms) {
    ctx.validate();
    const std::size_t per = ctx.seeds.size();
    std::function<Record(std::size_t)> job = [&](std::size_t cell) {
        const Arm& arm = arms[cell / per];
        Record r = arm.key;
        r.seed = ctx.seeds[cell % per];
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = nn::train_student(*arm.images, *arm.targets, ctx.student_spec, ctx.student_for(r.ipc),
                                           *ctx.test, r.seed);
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.accuracy = res.best_accuracy;
        r.epochs_run = res.epochs_run;
        if (r.class_i) {
            r.class_accuracy = res.class_accuracy.at(*r.class_i);
        }
        return r;
    };
    return parallel_map<Record>(arms.size() * per, ctx.jobs, job);
}

}  // namespace sld::experiments
