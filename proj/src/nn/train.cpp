// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/nn/train.hpp"

#include <cmath>
#include <numeric>

#include "sld/autodiff/ops.hpp"
#include "sld/kernels/kernels.hpp"
#include "sld/nn/loss.hpp"
#include "sld/util/error.hpp"
#include "sld/util/rng.hpp"

namespace sld::nn {

using ad::Tensor;
using ad::Var;

double StepSchedule::at(double base_lr, std::size_t epoch) const {
    double lr = base_lr;
    for (std::size_t m : milestones) {
        if (epoch >= m) {
            lr *= gamma;
        }
    }
    return lr;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0) || momentum < 0.0 || momentum >= 1.0 || weight_decay < 0.0 || batch_size == 0) {
        throw ConfigError("train config: need lr > 0, 0 <= momentum < 1, weight_decay >= 0, batch_size > 0");
    }
    if (!(schedule.gamma > 0.0) || schedule.gamma > 1.0) {
        throw ConfigError("train config: schedule gamma must lie in (0,1]");
    }
    for (std::size_t i = 0; i < schedule.milestones.size(); ++i) {
        if (schedule.milestones[i] == 0 || (i && schedule.milestones[i] <= schedule.milestones[i - 1])) {
            throw ConfigError("train config: milestones must be positive and strictly increasing");
        }
    }
}

std::string TrainConfig::describe() const {
    std::string m;
    for (std::size_t v : schedule.milestones) {
        m += (m.empty() ? "" : "/") + std::to_string(v);
    }
    return "lr=" + csv::num(lr) + ";momentum=" + csv::num(momentum) + ";wd=" + csv::num(weight_decay) +
           ";milestones=" + m + ";gamma=" + csv::num(schedule.gamma) + ";epochs=" + std::to_string(epochs) +
           ";batch=" + std::to_string(batch_size) + ";seed=" + std::to_string(seed);
}

std::uint64_t TrainConfig::hash() const {
    const std::string d = describe();
    return fnv1a64(d.data(), d.size());
}

void StudentConfig::validate() const {
    if (!(lr > 0.0) || momentum < 0.0 || momentum >= 1.0 || weight_decay < 0.0 || max_epochs == 0 ||
        patience == 0 || batch_size == 0 || min_delta < 0.0) {
        throw ConfigError("student config: invalid values");
    }
}

csv::Table training_log_table(const std::vector<EpochLog>& log) {
    csv::Table t;
    t.header = {"epoch", "train_loss", "test_acc", "lr"};
    for (const auto& e : log) {
        t.rows.push_back({std::to_string(e.epoch), csv::fixed(e.train_loss, 8), csv::fixed(e.test_accuracy, 6),
                          csv::num(e.lr)});
    }
    return t;
}

EvalSet EvalSet::from(const data::Dataset& dataset) {
    if (dataset.empty()) {
        throw DataError("evaluate: empty dataset");
    }
    return EvalSet{dataset.images(), dataset.labels(), dataset.num_classes()};
}

Evaluation evaluate_detailed(const ModelSpec& spec, const Params& params, const EvalSet& set) {
    if (set.size() == 0) {
        throw DataError("evaluate: empty dataset");
    }
    const auto pred = argmax_rows(predict_logits(spec, params, set.images));
    Evaluation e;
    e.class_accuracy.assign(spec.num_classes, 0.0);
    e.class_count.assign(spec.num_classes, 0);
    std::vector<std::size_t> hits(spec.num_classes, 0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const auto y = static_cast<std::size_t>(set.labels[i]);
        ++e.class_count[y];
        if (pred[i] == set.labels[i]) {
            ++correct;
            ++hits[y];
        }
    }
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        e.class_accuracy[c] = e.class_count[c] ? static_cast<double>(hits[c]) / static_cast<double>(e.class_count[c]) : 0.0;
    }
    e.accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
    return e;
}

double evaluate(const ModelSpec& spec, const Params& params, const EvalSet& set) {
    return evaluate_detailed(spec, params, set).accuracy;
}

namespace {

Tensor gather_rows(const Tensor& src, std::span<const std::size_t> rows) {
    ad::Shape s = src.shape();
    const std::size_t per = src.size() / s[0];
    s[0] = rows.size();
    Tensor out(s);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(src.ptr() + rows[i] * per, per, out.ptr() + i * per);
    }
    return out;
}

struct Sgd {
    double momentum;
    double weight_decay;
    std::vector<std::vector<double>> velocity;

    Sgd(const Params& params, double mu, double wd) : momentum(mu), weight_decay(wd) {
        for (const auto& p : params) {
            velocity.emplace_back(p.size(), 0.0);
        }
    }

    void step(Params& params, const std::vector<Tensor>& grads, double lr) {
        const auto& k = kernels::active();
        for (std::size_t i = 0; i < params.size(); ++i) {
            k.sgd_momentum(lr, momentum, weight_decay, grads[i].ptr(), velocity[i].data(), params[i].ptr(),
                           params[i].size());
        }
    }
};

// One minibatch step; returns the loss value.
double sgd_step(const ModelSpec& spec, Params& params, Sgd& opt, const Tensor& x, const Tensor& targets, double lr) {
    ad::Tape tape;
    std::vector<Var> p;
    p.reserve(params.size());
    for (const auto& t : params) {
        p.push_back(tape.leaf(t));
    }
    Var logits = forward(spec, p, tape.constant(x));
    Var loss = soft_ce_loss(logits, targets);
    const double value = loss.value().item();
    auto grads = tape.gradients(loss, p);
    opt.step(params, grads, lr);
    for (const auto& t : params) {
        if (!t.all_finite()) {
            throw NumericError("parameters became non-finite");
        }
    }
    return value;
}

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

}  // namespace

ExpertRun train_expert(const data::Dataset& train, const EvalSet& test, const ModelSpec& spec,
                       const TrainConfig& config, const std::function<void(const Checkpoint&)>& on_checkpoint) {
    config.validate();
    spec.validate();
    if (train.shape() != spec.input || train.num_classes() != spec.num_classes) {
        throw ShapeError("train_expert: dataset " + std::to_string(train.num_classes()) + " classes of shape " +
                         std::to_string(train.shape().channels) + "x" + std::to_string(train.shape().height) + "x" +
                         std::to_string(train.shape().width) + " does not match " + spec.describe());
    }
    ExpertRun run;
    Params params = init_params(spec, config.seed);
    Sgd opt(params, config.momentum, config.weight_decay);
    Rng rng(derive_seed(config.seed, {0x6578706572ULL}));
    const std::uint64_t chash = config.hash();

    auto emit = [&](std::size_t epoch) {
        Checkpoint c{spec, params, epoch, evaluate(spec, params, test), chash, config.seed};
        if (on_checkpoint) {
            on_checkpoint(c);
        }
        run.checkpoints.push_back(std::move(c));
    };
    emit(0);
    run.log.push_back({0, 0.0, run.checkpoints.back().test_accuracy, config.schedule.at(config.lr, 0)});

    auto order = iota(train.size());
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = config.schedule.at(config.lr, epoch - 1);
        rng.shuffle(std::span<std::size_t>(order));
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t m = std::min(config.batch_size, order.size() - start);
            std::span<const std::size_t> rows(order.data() + start, m);
            const auto labels = train.labels(rows);
            try {
                total += sgd_step(spec, params, opt, train.images(rows), one_hot(labels, spec.num_classes), lr) *
                         static_cast<double>(m);
            } catch (const NumericError& e) {
                throw NumericError("train_expert diverged at epoch " + std::to_string(epoch) + " with lr " +
                                   csv::num(lr) + ": " + e.what());
            }
        }
        emit(epoch);
        run.log.push_back({epoch, total / static_cast<double>(train.size()), run.checkpoints.back().test_accuracy, lr});
    }
    return run;
}

StudentResult train_student(const Tensor& images, const Tensor& targets, const ModelSpec& spec,
                            const StudentConfig& config, const EvalSet& test, std::uint64_t seed) {
    config.validate();
    if (images.rank() != 4 || targets.rank() != 2 || images.dim(0) != targets.dim(0) ||
        targets.dim(1) != spec.num_classes) {
        throw ShapeError("train_student: images " + ad::shape_str(images.shape()) + " vs targets " +
                         ad::shape_str(targets.shape()));
    }
    const std::size_t m = images.dim(0);
    const std::size_t c = targets.dim(1);
    for (std::size_t i = 0; i < m; ++i) {
        double mass = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double v = targets.at(i, j);
            if (v < 0.0) {
                throw DataError("train_student: negative label entry in row " + std::to_string(i));
            }
            mass += v;
        }
        if (mass <= 0.0) {
            throw DataError("train_student: label row " + std::to_string(i) + " has no mass (no supervisory signal)");
        }
    }
    Params params = init_params(spec, seed);
    Sgd opt(params, config.momentum, config.weight_decay);
    Rng rng(derive_seed(seed, {0x73747564ULL}));
    const bool full = m <= config.full_batch_limit;
    const std::size_t batch = full ? m : config.batch_size;

    StudentResult r;
    r.best_accuracy = -1.0;
    double plateau_ref = -1.0;
    std::size_t plateau_epoch = 0;
    auto order = iota(m);
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (!full) {
            rng.shuffle(std::span<std::size_t>(order));
        }
        for (std::size_t start = 0; start < m; start += batch) {
            const std::size_t n = std::min(batch, m - start);
            std::span<const std::size_t> rows(order.data() + start, n);
            try {
                if (full) {
                    sgd_step(spec, params, opt, images, targets, config.lr);
                } else {
                    sgd_step(spec, params, opt, gather_rows(images, rows), gather_rows(targets, rows), config.lr);
                }
            } catch (const NumericError& e) {
                throw NumericError("train_student diverged at epoch " + std::to_string(epoch) + " with lr " +
                                   csv::num(config.lr) + ": " + e.what());
            }
        }
        r.epochs_run = epoch;
        Evaluation ev = evaluate_detailed(spec, params, test);
        if (ev.accuracy > r.best_accuracy) {
            r.best_accuracy = ev.accuracy;
            r.best_epoch = epoch;
            r.class_accuracy = std::move(ev.class_accuracy);
            r.params = params;
        }
        if (ev.accuracy > plateau_ref + config.min_delta) {
            plateau_ref = ev.accuracy;
            plateau_epoch = epoch;
        } else if (epoch - plateau_epoch >= config.patience) {
            break;
        }
    }
    return r;
}

}  // namespace sld::nn
