// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/labels/generate.hpp"

#include "sld/nn/loss.hpp"
#include "sld/util/error.hpp"

namespace sld::labels {

SoftLabelSet from_logits(const ad::Tensor& logits, double tau, std::string provenance) {
    if (!(tau > 0.0)) {
        throw ConfigError("label generation: temperature must be positive, got " + std::to_string(tau));
    }
    SoftLabelSet out;
    out.scores = nn::softmax_rows(logits, tau);
    out.provenance = std::move(provenance);
    out.temperature = tau;
    return out;
}

SoftLabelSet gen_soft(const nn::Checkpoint& expert, const ad::Tensor& images, double tau) {
    return from_logits(nn::predict_logits(expert.spec, expert.params, images), tau,
                       provenance::single_expert(expert.epoch));
}

SoftLabelSet gen_ensemble(const std::vector<const nn::Checkpoint*>& experts, const ad::Tensor& images, double tau) {
    if (experts.size() < 2) {
        throw ConfigError("gen_ensemble: needs at least 2 experts, got " + std::to_string(experts.size()));
    }
    const std::size_t classes = experts.front()->spec.num_classes;
    ad::Tensor sum;
    std::vector<std::size_t> epochs;
    std::vector<std::uint64_t> seeds;
    for (const auto* e : experts) {
        if (e->spec.num_classes != classes) {
            throw ShapeError("gen_ensemble: expert outputs " + std::to_string(e->spec.num_classes) + " classes, first expert " +
                             std::to_string(classes));
        }
        ad::Tensor z = nn::predict_logits(e->spec, e->params, images);
        if (sum.empty()) {
            sum = std::move(z);
        } else {
            for (std::size_t i = 0; i < sum.size(); ++i) {
                sum[i] += z[i];
            }
        }
        epochs.push_back(e->epoch);
        seeds.push_back(e->seed);
    }
    const double inv = 1.0 / static_cast<double>(experts.size());
    for (double& v : sum.data()) {
        v *= inv;
    }
    return from_logits(sum, tau, provenance::ensemble(epochs, seeds));
}

}  // namespace sld::labels
