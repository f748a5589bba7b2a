// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Define-by-run reverse-mode differentiation. Every primitive appends a node
// to the active Tape; nodes are stored in creation order, which is a
// topological order, so a backward sweep simply walks the ids downwards.
//
// Backward rules are themselves written with recorded primitives. Calling
// grad(..., create_graph = true) therefore leaves a differentiable record of
// the gradient computation on the tape, which is what makes unrolled SGD
// updates (and their meta-gradients) differentiable.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sld/autodiff/tensor.hpp"

namespace sld::ad {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; does not own the value.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

    bool valid() const noexcept { return tape_ != nullptr; }
    Tape& tape() const { return *tape_; }
    std::uint32_t id() const noexcept { return id_; }

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t size() const { return value().size(); }
    bool requires_grad() const;

    /// Gradient stored by Tape::backward (leaves only).
    const std::optional<Tensor>& grad() const;

private:
    Tape* tape_ = nullptr;
    std::uint32_t id_ = 0;
};

/// Backward rule: receives the incoming gradient and the node's own handle,
/// returns one gradient per input (an invalid Var when the input gets none).
using BackwardFn = std::function<std::vector<Var>(const Var& grad_out, const Var& self)>;

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    /// Append a primitive result. When gradient recording is disabled or no
    /// input requires a gradient, the node is stored as a constant.
    Var record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

    const Tensor& value(std::uint32_t id) const;
    bool requires_grad(std::uint32_t id) const { return nodes_.at(id).requires_grad; }
    const char* op_name(std::uint32_t id) const { return nodes_.at(id).op; }
    const std::optional<Tensor>& grad(std::uint32_t id) const { return nodes_.at(id).grad; }

    /// d loss / d wrt[i] as handles. With create_graph the gradient
    /// computation is recorded and may be differentiated again.
    std::vector<Var> grad(const Var& loss, std::span<const Var> wrt, bool create_graph);

    /// d loss / d wrt[i] as values. Temporary nodes are popped afterwards.
    std::vector<Tensor> gradients(const Var& loss, std::span<const Var> wrt);

    /// Populate grad() of every leaf that requires a gradient, then mark the
    /// tape consumed; recording further nodes requires clear().
    void backward(const Var& loss);

    /// Truncation marker: everything recorded so far loses its history.
    /// Leaves and constants keep their values; `keep` nodes are turned into
    /// leaves (requiring gradients when keep_requires_grad); every other
    /// interior node has its value released. Throws inside an UpdateScope.
    std::vector<Var> truncate(std::span<const Var> keep, bool keep_requires_grad = true);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t marker() const noexcept { return marker_; }
    bool consumed() const noexcept { return consumed_; }

    bool grad_enabled() const noexcept { return grad_enabled_; }
    void set_grad_enabled(bool enabled) noexcept { grad_enabled_ = enabled; }

    /// Debug mode records diagnostics such as gradients requested for leaves
    /// that the loss does not depend on.
    void set_debug(bool enabled) noexcept { debug_ = enabled; }
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

    void clear();

    /// Marks a parameter-update region; truncating inside one is an error.
    class UpdateScope {
    public:
        explicit UpdateScope(Tape& tape) : tape_(&tape) { ++tape_->open_updates_; }
        ~UpdateScope() { --tape_->open_updates_; }
        UpdateScope(const UpdateScope&) = delete;
        UpdateScope& operator=(const UpdateScope&) = delete;

    private:
        Tape* tape_;
    };

private:
    struct Node {
        Tensor value;
        std::vector<Var> inputs;
        std::shared_ptr<const BackwardFn> backward;
        const char* op = "leaf";
        bool requires_grad = false;
        bool is_leaf = true;
        bool released = false;
        std::optional<Tensor> grad;
    };

    std::vector<std::optional<Var>> sweep(const Var& loss);

    std::vector<Node> nodes_;
    std::size_t marker_ = 0;
    bool grad_enabled_ = true;
    bool consumed_ = false;
    bool debug_ = false;
    int open_updates_ = 0;
    std::vector<std::string> diagnostics_;
};

/// Disable gradient recording on a tape for the guard's lifetime.
class NoGradGuard {
public:
    explicit NoGradGuard(Tape& tape) : tape_(tape), previous_(tape.grad_enabled()) {
        tape_.set_grad_enabled(false);
    }
    ~NoGradGuard() { tape_.set_grad_enabled(previous_); }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    Tape& tape_;
    bool previous_;
};

}  // namespace sld::ad
