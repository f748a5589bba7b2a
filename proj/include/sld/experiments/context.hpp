// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared state of a study and the (configuration, seed) cell runner.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sld/autodiff/tensor.hpp"
#include "sld/data/dataset.hpp"
#include "sld/data/sampling.hpp"
#include "sld/experiments/records.hpp"
#include "sld/labels/soft_labels.hpp"
#include "sld/nn/train.hpp"

namespace sld::experiments {

struct StudyContext {
    const data::Dataset* train = nullptr;  // distilled images come from here
    const nn::EvalSet* test = nullptr;
    nn::ModelSpec student_spec;
    nn::StudentConfig student;
    std::map<std::size_t, double> lr_by_ipc;  // overrides student.lr
    std::vector<std::uint64_t> seeds;         // student seeds, shared by compared arms
    std::uint64_t image_seed = 0;
    std::size_t jobs = 1;

    void validate() const;
    nn::StudentConfig student_for(std::size_t ipc) const;
};

/// Images and hard labels of a class-balanced sample.
struct Distilled {
    data::DistilledSet set;
    std::shared_ptr<const ad::Tensor> images;
    std::vector<int> labels;
};

Distilled distill(const StudyContext& ctx, std::size_t ipc);
Distilled distill_rows(const StudyContext& ctx, data::DistilledSet set);

/// One training job per seed in ctx.seeds.
struct Arm {
    Record key;  // experiment / ipc / labels / arm ... filled by the driver
    std::shared_ptr<const ad::Tensor> images;
    std::shared_ptr<const ad::Tensor> targets;
};

Arm make_arm(Record key, const Distilled& d, const labels::SoftLabelSet& labels);

/// Trains every (arm, seed) pair on the worker pool. Rows come back ordered
/// by arm, then seed. class_accuracy is filled when key.class_i is set.
std::vector<Record> run_arms(const StudyContext& ctx, const std::vector<Arm>& arms);

}  // namespace sld::experiments
