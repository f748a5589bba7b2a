// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Expert training with per-epoch checkpoints, student training to a
// test-accuracy plateau, and evaluation.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sld/autodiff/tensor.hpp"
#include "sld/data/dataset.hpp"
#include "sld/nn/model.hpp"
#include "sld/util/csv.hpp"

namespace sld::nn {

/// lr * gamma^(number of milestones <= epoch)
struct StepSchedule {
    std::vector<std::size_t> milestones;
    double gamma = 0.1;

    double at(double base_lr, std::size_t epoch) const;
};

struct TrainConfig {
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    StepSchedule schedule;
    std::size_t epochs = 1;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;

    void validate() const;
    std::string describe() const;
    std::uint64_t hash() const;
};

struct Checkpoint {
    ModelSpec spec;
    Params params;
    std::size_t epoch = 0;
    double test_accuracy = 0.0;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
    double lr = 0.0;
};

csv::Table training_log_table(const std::vector<EpochLog>& log);

/// Evaluation data materialized once.
struct EvalSet {
    ad::Tensor images;
    std::vector<int> labels;
    std::size_t num_classes = 0;

    static EvalSet from(const data::Dataset& dataset);
    std::size_t size() const noexcept { return labels.size(); }
};

struct Evaluation {
    double accuracy = 0.0;
    std::vector<double> class_accuracy;  // NaN-free: classes absent from the set report 0
    std::vector<std::size_t> class_count;
};

Evaluation evaluate_detailed(const ModelSpec& spec, const Params& params, const EvalSet& set);
/// mean(argmax(logits) == label), ties to the lowest class index.
double evaluate(const ModelSpec& spec, const Params& params, const EvalSet& set);

struct ExpertRun {
    std::vector<Checkpoint> checkpoints;  // epoch 0 .. epochs
    std::vector<EpochLog> log;
};

/// Momentum SGD over shuffled minibatches of the train split; a checkpoint
/// (with test accuracy) is emitted at every epoch boundary including epoch 0.
ExpertRun train_expert(const data::Dataset& train, const EvalSet& test, const ModelSpec& spec,
                       const TrainConfig& config, const std::function<void(const Checkpoint&)>& on_checkpoint = {});

struct StudentConfig {
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::size_t max_epochs = 500;
    std::size_t patience = 20;
    double min_delta = 0.001;  // fraction, i.e. 0.1 points
    std::size_t full_batch_limit = 1024;
    std::size_t batch_size = 256;

    void validate() const;
};

struct StudentResult {
    double best_accuracy = 0.0;
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::vector<double> class_accuracy;  // at best_epoch
    Params params;                       // at best_epoch
};

/// Trains a fresh student (init from `seed`) on images [M,C,H,W] with target
/// rows [M, classes] until test accuracy stops improving by more than
/// min_delta for `patience` epochs (or max_epochs). Rows with no mass are rejected.
StudentResult train_student(const ad::Tensor& images, const ad::Tensor& targets, const ModelSpec& spec,
                            const StudentConfig& config, const EvalSet& test, std::uint64_t seed);

}  // namespace sld::nn
