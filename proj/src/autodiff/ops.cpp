// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#include "sld/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sld/kernels/kernels.hpp"
#include "sld/util/error.hpp"

namespace sld::ad {
namespace {

Tape& same_tape(const char* op, const Var& a, const Var& b) {
    if (!a.valid() || !b.valid()) {
        throw Error(std::string(op) + ": invalid operand");
    }
    if (&a.tape() != &b.tape()) {
        throw Error(std::string(op) + ": operands live on different tapes");
    }
    return a.tape();
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

void require_rank(const char* op, const Var& a, std::size_t rank) {
    if (a.value().rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(a.shape()));
    }
}

const kernels::Table& K() {
    return kernels::active();
}

}  // namespace

Var add(const Var& a, const Var& b) {
    Tape& t = same_tape("add", a, b);
    require_same_shape("add", a, b);
    Tensor out(a.shape());
    K().add(a.value().ptr(), b.value().ptr(), out.ptr(), out.size());
    return t.record("add", std::move(out), {a, b},
                    [](const Var& g, const Var&) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
    Tape& t = same_tape("sub", a, b);
    require_same_shape("sub", a, b);
    Tensor out(a.shape());
    K().sub(a.value().ptr(), b.value().ptr(), out.ptr(), out.size());
    return t.record("sub", std::move(out), {a, b},
                    [](const Var& g, const Var&) { return std::vector<Var>{g, scale(g, -1.0)}; });
}

Var mul(const Var& a, const Var& b) {
    Tape& t = same_tape("mul", a, b);
    require_same_shape("mul", a, b);
    Tensor out(a.shape());
    K().mul(a.value().ptr(), b.value().ptr(), out.ptr(), out.size());
    return t.record("mul", std::move(out), {a, b}, [a, b](const Var& g, const Var&) {
        return std::vector<Var>{mul(g, b), mul(g, a)};
    });
}

Var scale(const Var& a, double factor) {
    Tensor out(a.shape());
    K().scale(factor, a.value().ptr(), out.ptr(), out.size());
    return a.tape().record("scale", std::move(out), {a}, [factor](const Var& g, const Var&) {
        return std::vector<Var>{scale(g, factor)};
    });
}

Var add_scalar(const Var& a, double value) {
    Tensor out = a.value();
    for (double& v : out.data()) {
        v += value;
    }
    return a.tape().record("add_scalar", std::move(out), {a},
                           [](const Var& g, const Var&) { return std::vector<Var>{g}; });
}

Var relu(const Var& a) {
    Tensor out(a.shape());
    K().relu(a.value().ptr(), out.ptr(), out.size());
    return a.tape().record("relu", std::move(out), {a}, [a](const Var& g, const Var&) {
        Tensor mask(a.shape());
        K().step(a.value().ptr(), mask.ptr(), mask.size());
        return std::vector<Var>{mul(g, g.tape().constant(std::move(mask)))};
    });
}

Var exp(const Var& a) {
    Tensor out = a.value();
    for (double& v : out.data()) {
        v = std::exp(v);
    }
    return a.tape().record("exp", std::move(out), {a}, [](const Var& g, const Var& self) {
        return std::vector<Var>{mul(g, self)};
    });
}

Var log(const Var& a) {
    Tensor out = a.value();
    for (double& v : out.data()) {
        if (!(v > 0.0)) {
            throw NumericError("log: non-positive input " + std::to_string(v));
        }
        v = std::log(v);
    }
    return a.tape().record("log", std::move(out), {a}, [a](const Var& g, const Var&) {
        return std::vector<Var>{mul(g, reciprocal(a))};
    });
}

Var reciprocal(const Var& a) {
    Tensor out = a.value();
    for (double& v : out.data()) {
        v = 1.0 / v;
    }
    return a.tape().record("reciprocal", std::move(out), {a}, [](const Var& g, const Var& self) {
        return std::vector<Var>{scale(mul(g, mul(self, self)), -1.0)};
    });
}

Var rsqrt(const Var& a) {
    Tensor out = a.value();
    for (double& v : out.data()) {
        if (!(v > 0.0)) {
            throw NumericError("rsqrt: non-positive input " + std::to_string(v));
        }
        v = 1.0 / std::sqrt(v);
    }
    return a.tape().record("rsqrt", std::move(out), {a}, [](const Var& g, const Var& self) {
        return std::vector<Var>{scale(mul(g, mul(self, mul(self, self))), -0.5)};
    });
}

Var matmul(const Var& a, const Var& b, bool trans_a, bool trans_b) {
    Tape& t = same_tape("matmul", a, b);
    require_rank("matmul", a, 2);
    require_rank("matmul", b, 2);
    const std::size_t m = trans_a ? a.shape()[1] : a.shape()[0];
    const std::size_t ka = trans_a ? a.shape()[0] : a.shape()[1];
    const std::size_t kb = trans_b ? b.shape()[1] : b.shape()[0];
    const std::size_t n = trans_b ? b.shape()[0] : b.shape()[1];
    if (ka != kb) {
        throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) + (trans_a ? "^T" : "") +
                         " x " + shape_str(b.shape()) + (trans_b ? "^T" : ""));
    }
    Tensor out({m, n});
    K().gemm(trans_a, trans_b, m, n, ka, a.value().ptr(), b.value().ptr(), out.ptr(), false);
    return t.record("matmul", std::move(out), {a, b},
                    [a, b, trans_a, trans_b](const Var& g, const Var&) {
                        Var ga;
                        Var gb;
                        if (!trans_a && !trans_b) {
                            ga = matmul(g, b, false, true);
                            gb = matmul(a, g, true, false);
                        } else if (trans_a && !trans_b) {
                            ga = matmul(b, g, false, true);
                            gb = matmul(a, g, false, false);
                        } else if (!trans_a && trans_b) {
                            ga = matmul(g, b, false, false);
                            gb = matmul(g, a, true, false);
                        } else {
                            ga = matmul(b, g, true, true);
                            gb = matmul(g, a, true, true);
                        }
                        return std::vector<Var>{ga, gb};
                    });
}

Var sum(const Var& a) {
    const double s = K().sum(a.value().ptr(), a.size());
    const Shape in_shape = a.shape();
    return a.tape().record("sum", Tensor::scalar(s), {a}, [in_shape](const Var& g, const Var&) {
        return std::vector<Var>{expand(g, in_shape)};
    });
}

Var mean(const Var& a) {
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Var expand(const Var& a, const Shape& shape) {
    if (a.size() != 1) {
        throw ShapeError("expand: expected one element, got " + shape_str(a.shape()));
    }
    Tensor out = Tensor::full(shape, a.value()[0]);
    const Shape in_shape = a.shape();
    return a.tape().record("expand", std::move(out), {a}, [in_shape](const Var& g, const Var&) {
        return std::vector<Var>{reshape(sum(g), in_shape)};
    });
}

Var sum_rows(const Var& a) {
    require_rank("sum_rows", a, 2);
    const std::size_t r = a.shape()[0];
    const std::size_t c = a.shape()[1];
    Tensor out({r, 1});
    for (std::size_t i = 0; i < r; ++i) {
        out[i] = K().sum(a.value().ptr() + i * c, c);
    }
    return a.tape().record("sum_rows", std::move(out), {a}, [c](const Var& g, const Var&) {
        return std::vector<Var>{broadcast_cols(g, c)};
    });
}

Var broadcast_cols(const Var& a, std::size_t cols) {
    require_rank("broadcast_cols", a, 2);
    if (a.shape()[1] != 1) {
        throw ShapeError("broadcast_cols: expected [R,1], got " + shape_str(a.shape()));
    }
    const std::size_t r = a.shape()[0];
    Tensor out({r, cols});
    for (std::size_t i = 0; i < r; ++i) {
        std::fill_n(out.ptr() + i * cols, cols, a.value()[i]);
    }
    return a.tape().record("broadcast_cols", std::move(out), {a},
                           [](const Var& g, const Var&) { return std::vector<Var>{sum_rows(g)}; });
}

Var sum_cols(const Var& a) {
    require_rank("sum_cols", a, 2);
    const std::size_t r = a.shape()[0];
    const std::size_t c = a.shape()[1];
    Tensor out({1, c});
    for (std::size_t i = 0; i < r; ++i) {
        K().axpy(1.0, a.value().ptr() + i * c, out.ptr(), c);
    }
    return a.tape().record("sum_cols", std::move(out), {a}, [r](const Var& g, const Var&) {
        return std::vector<Var>{broadcast_rows(g, r)};
    });
}

Var broadcast_rows(const Var& a, std::size_t rows) {
    require_rank("broadcast_rows", a, 2);
    if (a.shape()[0] != 1) {
        throw ShapeError("broadcast_rows: expected [1,C], got " + shape_str(a.shape()));
    }
    const std::size_t c = a.shape()[1];
    Tensor out({rows, c});
    for (std::size_t i = 0; i < rows; ++i) {
        std::copy_n(a.value().ptr(), c, out.ptr() + i * c);
    }
    return a.tape().record("broadcast_rows", std::move(out), {a},
                           [](const Var& g, const Var&) { return std::vector<Var>{sum_cols(g)}; });
}

Var softmax(const Var& a) {
    require_rank("softmax", a, 2);
    const std::size_t r = a.shape()[0];
    const std::size_t c = a.shape()[1];
    Tensor out = a.value();
    for (std::size_t i = 0; i < r; ++i) {
        double* row = out.ptr() + i * c;
        const double mx = *std::max_element(row, row + c);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            row[j] = std::exp(row[j] - mx);
            s += row[j];
        }
        for (std::size_t j = 0; j < c; ++j) {
            row[j] /= s;
        }
    }
    return a.tape().record("softmax", std::move(out), {a}, [c](const Var& g, const Var& y) {
        // dx = y * (g - <g, y>_row)
        Var inner = broadcast_cols(sum_rows(mul(g, y)), c);
        return std::vector<Var>{mul(y, sub(g, inner))};
    });
}

Var log_softmax(const Var& a) {
    require_rank("log_softmax", a, 2);
    const std::size_t r = a.shape()[0];
    const std::size_t c = a.shape()[1];
    Tensor out = a.value();
    for (std::size_t i = 0; i < r; ++i) {
        double* row = out.ptr() + i * c;
        const double mx = *std::max_element(row, row + c);
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            s += std::exp(row[j] - mx);
        }
        const double lse = mx + std::log(s);
        for (std::size_t j = 0; j < c; ++j) {
            row[j] -= lse;
        }
    }
    return a.tape().record("log_softmax", std::move(out), {a}, [c](const Var& g, const Var& y) {
        // dx = g - softmax(x) * sum_row(g), softmax(x) = exp(y)
        Var total = broadcast_cols(sum_rows(g), c);
        return std::vector<Var>{sub(g, mul(exp(y), total))};
    });
}

Var take_rows(const Var& a, const std::vector<std::size_t>& rows) {
    require_rank("take_rows", a, 2);
    const std::size_t r = a.shape()[0], c = a.shape()[1];
    Tensor out({rows.size(), c});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= r) {
            throw ShapeError("take_rows: row " + std::to_string(rows[i]) + " outside " + shape_str(a.shape()));
        }
        std::copy_n(a.value().ptr() + rows[i] * c, c, out.ptr() + i * c);
    }
    return a.tape().record("take_rows", std::move(out), {a}, [rows, r](const Var& g, const Var&) {
        return std::vector<Var>{scatter_rows(g, rows, r)};
    });
}

Var scatter_rows(const Var& g, const std::vector<std::size_t>& rows, std::size_t total) {
    require_rank("scatter_rows", g, 2);
    if (g.shape()[0] != rows.size()) {
        throw ShapeError("scatter_rows: " + shape_str(g.shape()) + " for " + std::to_string(rows.size()) + " rows");
    }
    const std::size_t c = g.shape()[1];
    Tensor out({total, c});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= total) {
            throw ShapeError("scatter_rows: row " + std::to_string(rows[i]) + " outside " + std::to_string(total));
        }
        K().axpy(1.0, g.value().ptr() + i * c, out.ptr() + rows[i] * c, c);
    }
    return g.tape().record("scatter_rows", std::move(out), {g}, [rows](const Var& gout, const Var&) {
        return std::vector<Var>{take_rows(gout, rows)};
    });
}

Var reshape(const Var& a, const Shape& shape) {
    Tensor out = a.value().reshaped(shape);
    const Shape in_shape = a.shape();
    return a.tape().record("reshape", std::move(out), {a}, [in_shape](const Var& g, const Var&) {
        return std::vector<Var>{reshape(g, in_shape)};
    });
}

Var swap01(const Var& a) {
    const Shape& s = a.shape();
    if (s.size() < 2) {
        throw ShapeError("swap01: expected rank >= 2, got " + shape_str(s));
    }
    const std::size_t d0 = s[0];
    const std::size_t d1 = s[1];
    const std::size_t inner = numel(s) / (d0 * d1 == 0 ? 1 : d0 * d1);
    Shape os = s;
    std::swap(os[0], os[1]);
    Tensor out(os);
    const double* src = a.value().ptr();
    double* dst = out.ptr();
    for (std::size_t i = 0; i < d0; ++i) {
        for (std::size_t j = 0; j < d1; ++j) {
            std::copy_n(src + (i * d1 + j) * inner, inner, dst + (j * d0 + i) * inner);
        }
    }
    return a.tape().record("swap01", std::move(out), {a},
                           [](const Var& g, const Var&) { return std::vector<Var>{swap01(g)}; });
}

namespace {

struct ConvGeom {
    std::size_t c, n, h, w, k, pad, ho, wo;
};

ConvGeom conv_geom(const char* op, const Shape& x, std::size_t kernel, std::size_t pad) {
    if (x.size() != 4) {
        throw ShapeError(std::string(op) + ": expected [C,N,H,W], got " + shape_str(x));
    }
    if (kernel == 0 || x[2] + 2 * pad < kernel || x[3] + 2 * pad < kernel) {
        throw ShapeError(std::string(op) + ": kernel " + std::to_string(kernel) +
                         " does not fit input " + shape_str(x));
    }
    return {x[0], x[1], x[2], x[3], kernel, pad, x[2] + 2 * pad - kernel + 1,
            x[3] + 2 * pad - kernel + 1};
}

// Row (c, ky, kx), column (n, oy, ox) of the patch matrix.
template <class F>
void for_each_patch(const ConvGeom& g, F&& f) {
    const std::size_t cols = g.n * g.ho * g.wo;
    for (std::size_t c = 0; c < g.c; ++c) {
        for (std::size_t ky = 0; ky < g.k; ++ky) {
            for (std::size_t kx = 0; kx < g.k; ++kx) {
                const std::size_t row = (c * g.k + ky) * g.k + kx;
                for (std::size_t n = 0; n < g.n; ++n) {
                    for (std::size_t oy = 0; oy < g.ho; ++oy) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) -
                                                  static_cast<std::ptrdiff_t>(g.pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
                            continue;
                        }
                        const std::size_t col0 = (n * g.ho + oy) * g.wo;
                        const std::size_t img0 = ((c * g.n + n) * g.h + static_cast<std::size_t>(iy)) * g.w;
                        for (std::size_t ox = 0; ox < g.wo; ++ox) {
                            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox + kx) -
                                                      static_cast<std::ptrdiff_t>(g.pad);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) {
                                continue;
                            }
                            f(row * cols + col0 + ox, img0 + static_cast<std::size_t>(ix));
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

Var im2col(const Var& x, std::size_t kernel, std::size_t pad) {
    const ConvGeom g = conv_geom("im2col", x.shape(), kernel, pad);
    Tensor out({g.c * g.k * g.k, g.n * g.ho * g.wo});
    const double* src = x.value().ptr();
    double* dst = out.ptr();
    for_each_patch(g, [&](std::size_t col_idx, std::size_t img_idx) { dst[col_idx] = src[img_idx]; });
    const Shape xs = x.shape();
    return x.tape().record("im2col", std::move(out), {x}, [xs, kernel, pad](const Var& gout, const Var&) {
        return std::vector<Var>{col2im(gout, xs, kernel, pad)};
    });
}

Var col2im(const Var& cols, const Shape& image_shape, std::size_t kernel, std::size_t pad) {
    const ConvGeom g = conv_geom("col2im", image_shape, kernel, pad);
    const Shape expect{g.c * g.k * g.k, g.n * g.ho * g.wo};
    if (cols.shape() != expect) {
        throw ShapeError("col2im: shape mismatch " + shape_str(cols.shape()) + " vs " + shape_str(expect));
    }
    Tensor out(image_shape);
    const double* src = cols.value().ptr();
    double* dst = out.ptr();
    for_each_patch(g, [&](std::size_t col_idx, std::size_t img_idx) { dst[img_idx] += src[col_idx]; });
    return cols.tape().record("col2im", std::move(out), {cols}, [kernel, pad](const Var& gout, const Var&) {
        return std::vector<Var>{im2col(gout, kernel, pad)};
    });
}

Var avgpool2(const Var& x) {
    const Shape& s = x.shape();
    if (s.size() != 3 || s[1] < 2 || s[2] < 2) {
        throw ShapeError("avgpool2: expected [R,H,W] with H,W >= 2, got " + shape_str(s));
    }
    // Odd trailing rows/columns are dropped (floor).
    const std::size_t r = s[0], h = s[1], w = s[2], ho = h / 2, wo = w / 2;
    Tensor out({r, ho, wo});
    const double* src = x.value().ptr();
    double* dst = out.ptr();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t y = 0; y < ho; ++y) {
            const double* r0 = src + (i * h + 2 * y) * w;
            const double* r1 = r0 + w;
            for (std::size_t xx = 0; xx < wo; ++xx) {
                dst[(i * ho + y) * wo + xx] =
                    0.25 * ((r0[2 * xx] + r0[2 * xx + 1]) + (r1[2 * xx] + r1[2 * xx + 1]));
            }
        }
    }
    const Shape xs = s;
    return x.tape().record("avgpool2", std::move(out), {x}, [xs](const Var& g, const Var&) {
        return std::vector<Var>{avgpool2_adjoint(g, xs)};
    });
}

Var avgpool2_adjoint(const Var& g, const Shape& input_shape) {
    if (input_shape.size() != 3) {
        throw ShapeError("avgpool2_adjoint: expected [R,H,W] input shape, got " + shape_str(input_shape));
    }
    const std::size_t r = input_shape[0], h = input_shape[1], w = input_shape[2];
    const std::size_t ho = h / 2, wo = w / 2;
    const Shape expect{r, ho, wo};
    if (g.shape() != expect) {
        throw ShapeError("avgpool2_adjoint: shape mismatch " + shape_str(g.shape()) + " vs " +
                         shape_str(expect));
    }
    Tensor out(input_shape);
    const double* src = g.value().ptr();
    double* dst = out.ptr();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t y = 0; y < 2 * ho; ++y) {
            for (std::size_t xx = 0; xx < 2 * wo; ++xx) {
                dst[(i * h + y) * w + xx] = 0.25 * src[(i * ho + y / 2) * wo + xx / 2];
            }
        }
    }
    return g.tape().record("avgpool2_adjoint", std::move(out), {g},
                           [](const Var& gout, const Var&) { return std::vector<Var>{avgpool2(gout)}; });
}

Var conv2d(const Var& x, const Var& weight, std::size_t pad) {
    const Shape xs = x.shape();
    const Shape ws = weight.shape();
    if (xs.size() != 4 || ws.size() != 4 || ws[1] != xs[1] || ws[2] != ws[3]) {
        throw ShapeError("conv2d: shape mismatch " + shape_str(xs) + " vs weight " + shape_str(ws));
    }
    const std::size_t n = xs[0];
    const std::size_t cout = ws[0];
    const std::size_t k = ws[2];
    Var cnhw = swap01(x);
    Var cols = im2col(cnhw, k, pad);
    Var w2 = reshape(weight, {cout, ws[1] * k * k});
    Var y = matmul(w2, cols);
    const std::size_t ho = xs[2] + 2 * pad - k + 1;
    const std::size_t wo = xs[3] + 2 * pad - k + 1;
    return swap01(reshape(y, {cout, n, ho, wo}));
}

}  // namespace sld::ad
