// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/kernels/kernels.hpp"

#include <algorithm>

namespace sld::kernels {
namespace {

void gemm_scalar(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 const double* a, const double* b, double* c, bool accumulate) {
    if (!accumulate) {
        std::fill(c, c + m * n, 0.0);
    }
    // i-k-j order: each C element accumulates its k terms in increasing k.
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = trans_a ? a[p * m + i] : a[i * k + p];
            if (!trans_b) {
                const double* brow = b + p * n;
                for (std::size_t j = 0; j < n; ++j) {
                    crow[j] += av * brow[j];
                }
            } else {
                for (std::size_t j = 0; j < n; ++j) {
                    crow[j] += av * b[j * k + p];
                }
            }
        }
    }
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += x[i] * y[i];
    }
    return s;
}

double sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += x[i];
    }
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void add_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[i] + y[i];
    }
}

void sub_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[i] - y[i];
    }
}

void mul_scalar(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[i] * y[i];
    }
}

void scale_scalar(double alpha, const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = alpha * x[i];
    }
}

void relu_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void step_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = x[i] > 0.0 ? 1.0 : 0.0;
    }
}

void sgd_momentum_scalar(double lr, double mu, double wd, const double* g, double* v, double* w,
                         std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = g[i] + wd * w[i];
        v[i] = mu * v[i] + d;
        w[i] -= lr * v[i];
    }
}

constexpr Table kScalar{
    Backend::scalar, "scalar",      gemm_scalar, dot_scalar,  sum_scalar,
    axpy_scalar,     add_scalar,    sub_scalar,  mul_scalar,  scale_scalar,
    relu_scalar,     step_scalar,   sgd_momentum_scalar,
};

}  // namespace

const Table& scalar_table() noexcept {
    return kScalar;
}

}  // namespace sld::kernels
