// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatch table after CPUID confirms support.

#include "sld/kernels/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace sld::kernels {
namespace {

constexpr std::size_t kBlockK = 256;

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// 4x8 register block over k in [p0, p1).
inline void micro_4x8(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
                      std::size_t ldc, std::size_t p0, std::size_t p1) {
    __m256d c00 = _mm256_loadu_pd(c + 0 * ldc), c01 = _mm256_loadu_pd(c + 0 * ldc + 4);
    __m256d c10 = _mm256_loadu_pd(c + 1 * ldc), c11 = _mm256_loadu_pd(c + 1 * ldc + 4);
    __m256d c20 = _mm256_loadu_pd(c + 2 * ldc), c21 = _mm256_loadu_pd(c + 2 * ldc + 4);
    __m256d c30 = _mm256_loadu_pd(c + 3 * ldc), c31 = _mm256_loadu_pd(c + 3 * ldc + 4);
    for (std::size_t p = p0; p < p1; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
        const __m256d b1 = _mm256_loadu_pd(b + p * ldb + 4);
        __m256d av = _mm256_broadcast_sd(a + 0 * lda + p);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a + 1 * lda + p);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a + 2 * lda + p);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a + 3 * lda + p);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
    }
    _mm256_storeu_pd(c + 0 * ldc, c00);
    _mm256_storeu_pd(c + 0 * ldc + 4, c01);
    _mm256_storeu_pd(c + 1 * ldc, c10);
    _mm256_storeu_pd(c + 1 * ldc + 4, c11);
    _mm256_storeu_pd(c + 2 * ldc, c20);
    _mm256_storeu_pd(c + 2 * ldc + 4, c21);
    _mm256_storeu_pd(c + 3 * ldc, c30);
    _mm256_storeu_pd(c + 3 * ldc + 4, c31);
}

// One row of C against a 4-column strip.
inline void micro_1x4(const double* a, const double* b, std::size_t ldb, double* c, std::size_t p0,
                      std::size_t p1) {
    __m256d acc = _mm256_loadu_pd(c);
    for (std::size_t p = p0; p < p1; ++p) {
        acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p), _mm256_loadu_pd(b + p * ldb), acc);
    }
    _mm256_storeu_pd(c, acc);
}

inline void micro_1x1(const double* a, const double* b, std::size_t ldb, double* c, std::size_t p0,
                      std::size_t p1) {
    double acc = *c;
    for (std::size_t p = p0; p < p1; ++p) {
        acc = std::fma(a[p], b[p * ldb], acc);
    }
    *c = acc;
}

void gemm_avx2(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
               const double* a, const double* b, double* c, bool accumulate) {
    if (!accumulate) {
        std::fill(c, c + m * n, 0.0);
    }
    if (m == 0 || n == 0 || k == 0) {
        return;
    }
    std::vector<double> packed_a;
    std::vector<double> packed_b;
    if (trans_a) {
        packed_a.resize(m * k);
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t i = 0; i < m; ++i) {
                packed_a[i * k + p] = a[p * m + i];
            }
        }
        a = packed_a.data();
    }
    if (trans_b) {
        packed_b.resize(k * n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t p = 0; p < k; ++p) {
                packed_b[p * n + j] = b[j * k + p];
            }
        }
        b = packed_b.data();
    }

    const std::size_t m4 = m - m % 4;
    const std::size_t n8 = n - n % 8;
    for (std::size_t p0 = 0; p0 < k; p0 += kBlockK) {
        const std::size_t p1 = std::min(k, p0 + kBlockK);
        for (std::size_t i = 0; i < m4; i += 4) {
            for (std::size_t j = 0; j < n8; j += 8) {
                micro_4x8(a + i * k, k, b + j, n, c + i * n + j, n, p0, p1);
            }
        }
        // Edge rows and columns.
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t jstart = i < m4 ? n8 : 0;
            std::size_t j = jstart;
            for (; j + 4 <= n; j += 4) {
                micro_1x4(a + i * k, b + j, n, c + i * n + j, p0, p1);
            }
            for (; j < n; ++j) {
                micro_1x1(a + i * k, b + j, n, c + i * n + j, p0, p1);
            }
        }
    }
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) {
        s = std::fma(x[i], y[i], s);
    }
    return s;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_add_pd(_mm256_loadu_pd(x + i), s0);
        s1 = _mm256_add_pd(_mm256_loadu_pd(x + i + 4), s1);
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) {
        s += x[i];
    }
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) {
        y[i] = std::fma(alpha, x[i], y[i]);
    }
}

template <class VecOp, class ScalarOp>
inline void binary(const double* x, const double* y, double* out, std::size_t n, VecOp vop,
                   ScalarOp sop) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, vop(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) {
        out[i] = sop(x[i], y[i]);
    }
}

void add_avx2(const double* x, const double* y, double* out, std::size_t n) {
    binary(x, y, out, n, [](__m256d a, __m256d b) { return _mm256_add_pd(a, b); },
           [](double a, double b) { return a + b; });
}

void sub_avx2(const double* x, const double* y, double* out, std::size_t n) {
    binary(x, y, out, n, [](__m256d a, __m256d b) { return _mm256_sub_pd(a, b); },
           [](double a, double b) { return a - b; });
}

void mul_avx2(const double* x, const double* y, double* out, std::size_t n) {
    binary(x, y, out, n, [](__m256d a, __m256d b) { return _mm256_mul_pd(a, b); },
           [](double a, double b) { return a * b; });
}

void scale_avx2(double alpha, const double* x, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) {
        out[i] = alpha * x[i];
    }
}

void relu_avx2(const double* x, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        // Select v where v > 0 so that -0.0 and NaN map the same way as the scalar path.
        const __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(out + i, _mm256_and_pd(mask, v));
    }
    for (; i < n; ++i) {
        out[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void step_avx2(const double* x, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(out + i, _mm256_and_pd(mask, one));
    }
    for (; i < n; ++i) {
        out[i] = x[i] > 0.0 ? 1.0 : 0.0;
    }
}

void sgd_momentum_avx2(double lr, double mu, double wd, const double* g, double* v, double* w,
                       std::size_t n) {
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d vmu = _mm256_set1_pd(mu);
    const __m256d vwd = _mm256_set1_pd(wd);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d wi = _mm256_loadu_pd(w + i);
        const __m256d d = _mm256_fmadd_pd(vwd, wi, _mm256_loadu_pd(g + i));
        const __m256d vi = _mm256_fmadd_pd(vmu, _mm256_loadu_pd(v + i), d);
        _mm256_storeu_pd(v + i, vi);
        _mm256_storeu_pd(w + i, _mm256_fnmadd_pd(vlr, vi, wi));
    }
    for (; i < n; ++i) {
        const double d = std::fma(wd, w[i], g[i]);
        v[i] = std::fma(mu, v[i], d);
        w[i] = std::fma(-lr, v[i], w[i]);
    }
}

constexpr Table kAvx2{
    Backend::avx2, "avx2",   gemm_avx2, dot_avx2,  sum_avx2,
    axpy_avx2,     add_avx2, sub_avx2,  mul_avx2,  scale_avx2,
    relu_avx2,     step_avx2, sgd_momentum_avx2,
};

}  // namespace

const Table* avx2_table_impl() noexcept {
    return &kAvx2;
}

}  // namespace sld::kernels
