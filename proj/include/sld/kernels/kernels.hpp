// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense f64 inner loops. Every kernel has a portable scalar reference and,
// when compiled in, an AVX2/FMA variant. The active table is chosen once at
// startup from CPUID and may be overridden with SLD_KERNELS=scalar|avx2 or
// select_backend(). Results of the two variants agree to rounding; within one
// backend every kernel is deterministic.

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace sld::kernels {

enum class Backend { scalar, avx2 };

struct Table {
    Backend backend;
    const char* name;

    /// C = op(A) * op(B) (+ C when accumulate). Row-major, contiguous.
    /// op(A) is [m, k]: A is stored [m, k] or, when trans_a, [k, m].
    /// op(B) is [k, n]: B is stored [k, n] or, when trans_b, [n, k].
    void (*gemm)(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 const double* a, const double* b, double* c, bool accumulate);

    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);

    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// out = x + y, x - y, x * y (elementwise)
    void (*add)(const double* x, const double* y, double* out, std::size_t n);
    void (*sub)(const double* x, const double* y, double* out, std::size_t n);
    void (*mul)(const double* x, const double* y, double* out, std::size_t n);
    /// out = alpha * x
    void (*scale)(double alpha, const double* x, double* out, std::size_t n);
    /// out = max(x, 0)
    void (*relu)(const double* x, double* out, std::size_t n);
    /// out = x > 0 ? 1 : 0
    void (*step)(const double* x, double* out, std::size_t n);
    /// Momentum SGD: v = mu*v + (g + wd*w); w -= lr*v
    void (*sgd_momentum)(double lr, double mu, double wd, const double* g, double* v, double* w,
                         std::size_t n);
};

const Table& scalar_table() noexcept;

/// nullptr when the AVX2 variant was not compiled in.
const Table* avx2_table() noexcept;

bool cpu_supports_avx2() noexcept;

/// Currently selected table.
const Table& active() noexcept;

/// Force a backend. Throws sld::ConfigError when unavailable on this CPU/build.
void select_backend(Backend backend);

std::optional<Backend> parse_backend(std::string_view name) noexcept;

/// RAII override of the active backend, restored on destruction (tests).
class BackendScope {
public:
    explicit BackendScope(Backend backend);
    ~BackendScope();
    BackendScope(const BackendScope&) = delete;
    BackendScope& operator=(const BackendScope&) = delete;

private:
    Backend previous_;
};

}  // namespace sld::kernels
