// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "sld/util/error.hpp"

namespace sld::kernels {

#if defined(SLD_HAVE_AVX2)
const Table* avx2_table_impl() noexcept;
#endif

namespace {

const Table* initial_table() noexcept {
    const Table* chosen = &scalar_table();
    if (cpu_supports_avx2() && avx2_table() != nullptr) {
        chosen = avx2_table();
    }
    if (const char* env = std::getenv("SLD_KERNELS")) {
        if (auto b = parse_backend(env)) {
            if (*b == Backend::scalar) {
                chosen = &scalar_table();
            } else if (cpu_supports_avx2() && avx2_table() != nullptr) {
                chosen = avx2_table();
            }
        }
    }
    return chosen;
}

std::atomic<const Table*>& current() noexcept {
    static std::atomic<const Table*> table{initial_table()};
    return table;
}

}  // namespace

const Table* avx2_table() noexcept {
#if defined(SLD_HAVE_AVX2)
    return avx2_table_impl();
#else
    return nullptr;
#endif
}

bool cpu_supports_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Table& active() noexcept {
    return *current().load(std::memory_order_acquire);
}

void select_backend(Backend backend) {
    if (backend == Backend::scalar) {
        current().store(&scalar_table(), std::memory_order_release);
        return;
    }
    if (avx2_table() == nullptr || !cpu_supports_avx2()) {
        throw ConfigError("kernel backend 'avx2' is not available on this build/CPU");
    }
    current().store(avx2_table(), std::memory_order_release);
}

std::optional<Backend> parse_backend(std::string_view name) noexcept {
    if (name == "scalar") {
        return Backend::scalar;
    }
    if (name == "avx2") {
        return Backend::avx2;
    }
    return std::nullopt;
}

BackendScope::BackendScope(Backend backend) : previous_(active().backend) {
    select_backend(backend);
}

BackendScope::~BackendScope() {
    try {
        select_backend(previous_);
    } catch (...) {
    }
}

}  // namespace sld::kernels
