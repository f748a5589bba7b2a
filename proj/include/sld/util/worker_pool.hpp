// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

namespace sld {

/// Number of workers to use when the caller passes 0.
std::size_t default_jobs() noexcept;

/// Runs fn(i) for i in [0, count) on at most `jobs` threads. Results come
/// back in index order whatever the completion order. The first exception
/// (by index) is rethrown after all workers finish.
template <class R>
std::vector<R> parallel_map(std::size_t count, std::size_t jobs, const std::function<R(std::size_t)>& fn) {
    std::vector<std::optional<R>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (jobs == 0) {
        jobs = default_jobs();
    }
    jobs = std::min(jobs, count);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(jobs);
        for (std::size_t t = 0; t < jobs; ++t) {
            threads.emplace_back(worker);
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<R> out;
    out.reserve(count);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace sld
