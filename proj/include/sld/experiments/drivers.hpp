// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Study drivers. Each is a pure function of (context, checkpoints, grid);
// accuracies are means over ctx.seeds with paired seeds across arms.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "sld/experiments/context.hpp"
#include "sld/experiments/powerlaw.hpp"
#include "sld/labels/metrics.hpp"
#include "sld/nn/checkpoint.hpp"

namespace sld::experiments {

using Run = std::vector<nn::Checkpoint>;

/// Soft labels from each listed epoch plus a hard-label control, per ipc.
std::vector<Record> run_baseline(const StudyContext& ctx, const Run& run, const std::vector<std::size_t>& ipcs,
                                 const std::vector<std::size_t>& epochs, double tau = 1.0);

struct EpochPoint {
    std::size_t epoch = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double expert_accuracy = 0.0;
    double mean_entropy = 0.0;  // nats
};

struct EpochSweep {
    std::vector<Record> records;
    std::vector<EpochPoint> curve;
    std::size_t best_epoch = 0;  // ties go to the earlier epoch
    double best_accuracy = 0.0;
};

/// Needs at least 3 epochs.
EpochSweep epoch_sweep(const StudyContext& ctx, const Run& run, std::size_t ipc, const std::vector<std::size_t>& epochs);

struct TempEpochGrid {
    std::vector<Record> records;
    std::vector<std::size_t> epochs;
    std::vector<double> temperatures;
    std::vector<std::vector<double>> mean;  // [epoch][temperature]
    std::size_t best_epoch = 0;
    double best_temperature = 1.0;
    double best_accuracy = 0.0;
};

/// The temperature list must contain 1.0.
TempEpochGrid temp_epoch_grid(const StudyContext& ctx, const Run& run, std::size_t ipc,
                              const std::vector<std::size_t>& epochs, const std::vector<double>& temperatures);

struct SwapPoint {
    std::size_t i = 0;
    double relative = 0.0;  // mean over seeds of acc(swapped) / acc(unswapped)
    double stddev = 0.0;
};

struct SwapTest {
    std::vector<Record> records;
    std::vector<SwapPoint> curve;
};

SwapTest swap_test(const StudyContext& ctx, const nn::Checkpoint& expert, std::size_t ipc,
                   const std::vector<std::size_t>& i_list);

struct ScalingLaw {
    std::vector<Record> records;
    std::vector<CurvePoint> hard;
    std::map<std::size_t, std::vector<CurvePoint>> soft_by_k;
    std::optional<PowerLawFit> fit;              // hard + full-knowledge (k = C) soft
    std::map<std::size_t, double> s_by_k;        // data multiplier per k
};

/// k grid default: powers of two below C, then C.
std::vector<std::size_t> default_k_grid(std::size_t num_classes);

ScalingLaw scaling_law(const StudyContext& ctx, const nn::Checkpoint& expert, const std::vector<std::size_t>& ipcs,
                       const std::vector<std::size_t>& ks);

struct ParetoFront {
    std::vector<Record> records;
    std::vector<std::size_t> ipcs;
    std::map<std::size_t, std::vector<double>> curve_by_epoch;  // mean accuracy per ipc
    std::vector<double> envelope;                               // running max over experts and budgets
    std::vector<std::size_t> argmax_epoch;                      // expert that attains the pointwise max
};

/// Running maximum of the pointwise maximum over curves (ipcs ascending).
std::vector<double> upper_envelope(const std::vector<std::vector<double>>& curves);

ParetoFront pareto_front(const StudyContext& ctx, const Run& run, const std::vector<std::size_t>& epochs,
                         const std::vector<std::size_t>& ipcs);

struct ZeroShotArm {
    double class_accuracy = 0.0;
    double accuracy = 0.0;
};

struct ZeroShot {
    std::vector<Record> records;
    ZeroShotArm control;
    ZeroShotArm remove_image;
    ZeroShotArm remove_label;
    bool class_never_predicted = false;
};

/// control: full images and labels; remove_image: drop class-i images;
/// remove_label: keep them but zero class-i mass in every other row.
ZeroShot zero_shot(const StudyContext& ctx, const nn::Checkpoint& expert, std::size_t ipc, std::size_t class_i);

struct EnsembleCompare {
    std::vector<Record> records;
    double single = 0.0;
    double ensemble = 0.0;
    double delta = 0.0;  // ensemble - single, mean of paired differences
};

EnsembleCompare ensemble_compare(const StudyContext& ctx, const nn::Checkpoint& single,
                                 const std::vector<const nn::Checkpoint*>& members, std::size_t ipc, double tau = 1.0);

struct CeSelection {
    std::vector<Record> records;
    double random = 0.0;
    std::map<std::size_t, double> by_quantile;
};

/// Labels from `expert` in every arm; images chosen at random or by expert
/// cross-entropy quantile.
CeSelection select_ce_study(const StudyContext& ctx, const nn::Checkpoint& expert, std::size_t ipc,
                            const std::vector<std::size_t>& quantiles);

/// Per-row expert cross-entropy against the hard labels.
std::vector<double> expert_cross_entropy(const nn::Checkpoint& expert, const data::Dataset& dataset);

struct JsdComparison {
    labels::NormalizedJsd normalized;
    std::map<std::size_t, std::size_t> argmin_histogram;  // epoch -> image count
    std::size_t mode_epoch = 0;
};

/// Learned labels against expert labels of each epoch (an ensemble across
/// runs when more than one run is given) on the same images.
JsdComparison compare_jsd(const labels::SoftLabelSet& learned, const std::vector<const Run*>& runs,
                          const ad::Tensor& images, const std::vector<std::size_t>& epochs, double tau = 1.0);

}  // namespace sld::experiments
