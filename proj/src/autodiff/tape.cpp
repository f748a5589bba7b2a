// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/autodiff/tape.hpp"

#include <algorithm>

#include "sld/autodiff/ops.hpp"
#include "sld/util/error.hpp"

namespace sld::ad {

const Tensor& Var::value() const {
    return tape_->value(id_);
}

bool Var::requires_grad() const {
    return tape_->requires_grad(id_);
}

const std::optional<Tensor>& Var::grad() const {
    return tape_->grad(id_);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    if (consumed_) {
        throw Error("tape: already consumed by backward(); call clear() before recording");
    }
    if (!value.all_finite()) {
        throw NumericError("tape: leaf of shape " + shape_str(value.shape()) + " contains NaN/Inf");
    }
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.is_leaf = true;
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
    if (consumed_) {
        throw Error("tape: already consumed by backward(); call clear() before recording");
    }
    if (!value.all_finite()) {
        throw NumericError(std::string(op) + ": produced NaN/Inf (output shape " +
                           shape_str(value.shape()) + ")");
    }
    bool needs = false;
    if (grad_enabled_) {
        for (const Var& in : inputs) {
            if (in.requires_grad()) {
                needs = true;
                break;
            }
        }
    }
    Node n;
    n.value = std::move(value);
    n.op = op;
    n.is_leaf = false;
    n.requires_grad = needs;
    if (needs) {
        n.inputs = std::move(inputs);
        n.backward = std::make_shared<const BackwardFn>(std::move(backward));
    }
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Tensor& Tape::value(std::uint32_t id) const {
    const Node& n = nodes_.at(id);
    if (n.released) {
        throw Error(std::string("tape: value of node '") + n.op + "' was discarded by truncation");
    }
    return n.value;
}

std::vector<std::optional<Var>> Tape::sweep(const Var& loss) {
    if (loss.valid() && &loss.tape() != this) {
        throw Error("tape: loss belongs to a different tape");
    }
    if (loss.size() != 1) {
        throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    }
    const std::uint32_t top = loss.id();
    std::vector<std::optional<Var>> g(top + 1);
    if (!nodes_[top].requires_grad) {
        return g;
    }
    g[top] = constant(Tensor::full(loss.shape(), 1.0));
    for (std::int64_t id = top; id >= 0; --id) {
        auto& slot = g[static_cast<std::size_t>(id)];
        if (!slot) {
            continue;
        }
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (!node.backward) {
            continue;
        }
        // Copies: the rule below appends nodes and may reallocate nodes_.
        const auto fn = node.backward;
        const std::vector<Var> inputs = node.inputs;
        const Var self(this, static_cast<std::uint32_t>(id));
        std::vector<Var> gin = (*fn)(*slot, self);
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            if (!gin[k].valid() || !inputs[k].requires_grad()) {
                continue;
            }
            auto& dst = g[inputs[k].id()];
            dst = dst ? add(*dst, gin[k]) : gin[k];
        }
    }
    return g;
}

std::vector<Var> Tape::grad(const Var& loss, std::span<const Var> wrt, bool create_graph) {
    std::optional<NoGradGuard> guard;
    if (!create_graph) {
        guard.emplace(*this);
    }
    auto g = sweep(loss);
    std::vector<Var> out;
    out.reserve(wrt.size());
    for (const Var& w : wrt) {
        if (w.id() < g.size() && g[w.id()]) {
            out.push_back(*g[w.id()]);
        } else {
            if (debug_) {
                diagnostics_.push_back("gradient requested for node " + std::to_string(w.id()) +
                                       " which the loss does not depend on");
            }
            out.push_back(constant(Tensor::zeros(w.shape())));
        }
    }
    return out;
}

std::vector<Tensor> Tape::gradients(const Var& loss, std::span<const Var> wrt) {
    const std::size_t mark = nodes_.size();
    std::vector<Tensor> out;
    {
        auto handles = grad(loss, wrt, false);
        out.reserve(handles.size());
        for (const Var& h : handles) {
            out.push_back(h.value());
        }
    }
    nodes_.resize(mark);
    return out;
}

void Tape::backward(const Var& loss) {
    const std::size_t mark = nodes_.size();
    {
        NoGradGuard guard(*this);
        auto g = sweep(loss);
        for (std::size_t id = 0; id < mark; ++id) {
            Node& n = nodes_[id];
            if (!n.is_leaf || !n.requires_grad) {
                continue;
            }
            if (id < g.size() && g[id]) {
                n.grad = nodes_[g[id]->id()].value;
            } else {
                if (debug_) {
                    diagnostics_.push_back("leaf " + std::to_string(id) +
                                           " is detached from the loss; gradient is zero");
                }
                n.grad = Tensor::zeros(n.value.shape());
            }
        }
    }
    nodes_.resize(mark);
    consumed_ = true;
}

std::vector<Var> Tape::truncate(std::span<const Var> keep, bool keep_requires_grad) {
    if (open_updates_ > 0) {
        throw Error("tape: truncation marker placed inside a parameter-update step");
    }
    std::vector<char> kept(nodes_.size(), 0);
    for (const Var& k : keep) {
        kept.at(k.id()) = 1;
    }
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        Node& n = nodes_[id];
        if (n.is_leaf) {
            continue;
        }
        n.inputs.clear();
        n.backward.reset();
        if (kept[id]) {
            n.is_leaf = true;
            n.requires_grad = keep_requires_grad;
        } else {
            n.requires_grad = false;
            n.released = true;
            n.value.release();
        }
    }
    marker_ = nodes_.size();
    std::vector<Var> out;
    out.reserve(keep.size());
    for (const Var& k : keep) {
        out.emplace_back(this, k.id());
    }
    return out;
}

void Tape::clear() {
    nodes_.clear();
    marker_ = 0;
    consumed_ = false;
    diagnostics_.clear();
}

}  // namespace sld::ad
