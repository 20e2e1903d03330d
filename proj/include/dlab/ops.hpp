#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dlab/kernels.hpp"
#include "dlab/tape.hpp"
#include "dlab/tensor.hpp"

// Primitive differentiable operations. Each op computes its forward result
// with the dispatched kernels and, when a tape is supplied and some input
// requires grad, records a closure that accumulates input grads from the
// output grad. Passing tape == nullptr gives a plain forward evaluation.

namespace dlab::ops {

template <class T>
bool any_requires_grad(std::initializer_list<Tensor<T>> ts) {
    for (const auto& t : ts) {
        if (t.requires_grad()) return true;
    }
    return false;
}

template <class T>
void check_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> add(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("add", a, b);
    const auto n = static_cast<std::size_t>(a.size());
    auto out = Tensor<T>::zeros(a.shape(), any_requires_grad<T>({a, b}));
    kernels::vadd(a.v().data(), b.v().data(), out.v().data(), n);
    if (tape && out.requires_grad()) {
        tape->record("add", {a, b, out}, [a, b, out]() mutable {
            const auto go = out.g();
            if (a.requires_grad()) kernels::axpy(T(1), go.data(), a.g().data(), go.size());
            if (b.requires_grad()) kernels::axpy(T(1), go.data(), b.g().data(), go.size());
        });
    }
    return out;
}

template <class T>
Tensor<T> sub(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("sub", a, b);
    const auto n = static_cast<std::size_t>(a.size());
    auto out = Tensor<T>::zeros(a.shape(), any_requires_grad<T>({a, b}));
    for (std::size_t i = 0; i < n; ++i) out.v()[i] = a.v()[i] - b.v()[i];
    if (tape && out.requires_grad()) {
        tape->record("sub", {a, b, out}, [a, b, out]() mutable {
            const auto go = out.g();
            if (a.requires_grad()) kernels::axpy(T(1), go.data(), a.g().data(), go.size());
            if (b.requires_grad()) kernels::axpy(T(-1), go.data(), b.g().data(), go.size());
        });
    }
    return out;
}

template <class T>
Tensor<T> mul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("mul", a, b);
    const auto n = static_cast<std::size_t>(a.size());
    auto out = Tensor<T>::zeros(a.shape(), any_requires_grad<T>({a, b}));
    kernels::vmul(a.v().data(), b.v().data(), out.v().data(), n);
    if (tape && out.requires_grad()) {
        tape->record("mul", {a, b, out}, [a, b, out]() mutable {
            const auto go = out.g();
            const auto av = a.v();
            const auto bv = b.v();
            if (a.requires_grad()) {
                auto ag = a.g();
                for (std::size_t i = 0; i < go.size(); ++i) ag[i] += go[i] * bv[i];
            }
            if (b.requires_grad()) {
                auto bg = b.g();
                for (std::size_t i = 0; i < go.size(); ++i) bg[i] += go[i] * av[i];
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> scale(Tape<T>* tape, const Tensor<T>& a, T c) {
    const auto n = static_cast<std::size_t>(a.size());
    auto out = Tensor<T>::zeros(a.shape(), a.requires_grad());
    for (std::size_t i = 0; i < n; ++i) out.v()[i] = c * a.v()[i];
    if (tape && out.requires_grad()) {
        tape->record("scale", {a, out}, [a, out, c]() mutable {
            kernels::axpy(c, out.g().data(), a.g().data(), out.g().size());
        });
    }
    return out;
}

template <class T>
Tensor<T> relu(Tape<T>* tape, const Tensor<T>& x) {
    const auto n = static_cast<std::size_t>(x.size());
    auto out = Tensor<T>::zeros(x.shape(), x.requires_grad());
    for (std::size_t i = 0; i < n; ++i) out.v()[i] = x.v()[i] > T(0) ? x.v()[i] : T(0);
    if (tape && out.requires_grad()) {
        tape->record("relu", {x, out}, [x, out]() mutable {
            const auto go = out.g();
            const auto xv = x.v();
            auto xg = x.g();
            for (std::size_t i = 0; i < go.size(); ++i) {
                if (xv[i] > T(0)) xg[i] += go[i];
            }
        });
    }
    return out;
}

template <class T>
T sigmoid_scalar(T x) {
    if (x >= T(0)) {
        return T(1) / (T(1) + std::exp(-x));
    }
    const T e = std::exp(x);
    return e / (T(1) + e);
}

template <class T>
Tensor<T> sigmoid(Tape<T>* tape, const Tensor<T>& x) {
    const auto n = static_cast<std::size_t>(x.size());
    auto out = Tensor<T>::zeros(x.shape(), x.requires_grad());
    for (std::size_t i = 0; i < n; ++i) out.v()[i] = sigmoid_scalar(x.v()[i]);
    if (tape && out.requires_grad()) {
        tape->record("sigmoid", {x, out}, [x, out]() mutable {
            const auto go = out.g();
            const auto yv = out.v();
            auto xg = x.g();
            for (std::size_t i = 0; i < go.size(); ++i) xg[i] += go[i] * yv[i] * (T(1) - yv[i]);
        });
    }
    return out;
}

template <class T>
Tensor<T> tanh_op(Tape<T>* tape, const Tensor<T>& x) {
    const auto n = static_cast<std::size_t>(x.size());
    auto out = Tensor<T>::zeros(x.shape(), x.requires_grad());
    for (std::size_t i = 0; i < n; ++i) out.v()[i] = std::tanh(x.v()[i]);
    if (tape && out.requires_grad()) {
        tape->record("tanh", {x, out}, [x, out]() mutable {
            const auto go = out.g();
            const auto yv = out.v();
            auto xg = x.g();
            for (std::size_t i = 0; i < go.size(); ++i) xg[i] += go[i] * (T(1) - yv[i] * yv[i]);
        });
    }
    return out;
}

// y = sqrt(max(x, floor)), elementwise. Gradient is zero where the floor is
// active; keeps std-pooling finite on constant inputs.
template <class T>
Tensor<T> sqrt_floor(Tape<T>* tape, const Tensor<T>& x, T floor_val) {
    const auto n = static_cast<std::size_t>(x.size());
    auto out = Tensor<T>::zeros(x.shape(), x.requires_grad());
    for (std::size_t i = 0; i < n; ++i) {
        out.v()[i] = std::sqrt(x.v()[i] > floor_val ? x.v()[i] : floor_val);
    }
    if (tape && out.requires_grad()) {
        tape->record("sqrt_floor", {x, out}, [x, out, floor_val]() mutable {
            const auto go = out.g();
            const auto xv = x.v();
            const auto yv = out.v();
            auto xg = x.g();
            for (std::size_t i = 0; i < go.size(); ++i) {
                if (xv[i] > floor_val) xg[i] += go[i] * T(0.5) / yv[i];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

// y = W x + b with W: [M,N], x: [N], optional b: [M].
template <class T>
Tensor<T> affine(Tape<T>* tape, const Tensor<T>& w, const Tensor<T>& b, const Tensor<T>& x) {
    if (w.ndim() != 2) throw ShapeError("affine: weight must be 2-D, got " + shape_str(w.shape()));
    if (x.ndim() != 1) throw ShapeError("affine: input must be 1-D, got " + shape_str(x.shape()));
    const Index m = w.dim(0);
    const Index n = w.dim(1);
    if (x.dim(0) != n) {
        throw ShapeError("affine: input dim " + std::to_string(x.dim(0)) + " != weight columns " +
                         std::to_string(n));
    }
    if (b.defined() && (b.ndim() != 1 || b.dim(0) != m)) {
        throw ShapeError("affine: bias shape " + shape_str(b.shape()) + " != [" + std::to_string(m) + "]");
    }
    const bool rg = w.requires_grad() || x.requires_grad() || (b.defined() && b.requires_grad());
    auto out = Tensor<T>::zeros({m}, rg);
    const T* wp = w.v().data();
    const T* xp = x.v().data();
    for (Index i = 0; i < m; ++i) {
        T acc = b.defined() ? b.v()[static_cast<std::size_t>(i)] : T(0);
        acc += kernels::dot(wp + i * n, xp, static_cast<std::size_t>(n));
        out.v()[static_cast<std::size_t>(i)] = acc;
    }
    if (tape && rg) {
        std::vector<Tensor<T>> ts = b.defined() ? std::vector<Tensor<T>>{w, b, x, out}
                                                : std::vector<Tensor<T>>{w, x, out};
        tape->record("affine", std::move(ts), [w, b, x, out, m, n]() mutable {
            const auto go = out.g();
            if (b.defined() && b.requires_grad()) {
                kernels::axpy(T(1), go.data(), b.g().data(), static_cast<std::size_t>(m));
            }
            if (w.requires_grad()) {
                T* wg = w.g().data();
                const T* xp2 = x.v().data();
                for (Index i = 0; i < m; ++i) {
                    kernels::axpy(go[static_cast<std::size_t>(i)], xp2, wg + i * n, static_cast<std::size_t>(n));
                }
            }
            if (x.requires_grad()) {
                T* xg = x.g().data();
                const T* wp2 = w.v().data();
                for (Index i = 0; i < m; ++i) {
                    kernels::axpy(go[static_cast<std::size_t>(i)], wp2 + i * n, xg, static_cast<std::size_t>(n));
                }
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> matvec(Tape<T>* tape, const Tensor<T>& w, const Tensor<T>& x) {
    return affine(tape, w, Tensor<T>{}, x);
}

// 1-D convolution over x: [C_in, T], w: [C_out, C_in, K], b: [C_out].
// T_out = floor((T + 2*pad - dilation*(K-1) - 1) / stride) + 1.
template <class T>
Index conv1d_out_len(Index t, Index k, Index stride, Index pad, Index dilation) {
    return (t + 2 * pad - dilation * (k - 1) - 1) / stride + 1;
}

template <class T>
Tensor<T> conv1d(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 int stride, int pad, int dilation) {
    if (x.ndim() != 2) throw ShapeError("conv1d: input must be [C_in,T], got " + shape_str(x.shape()));
    if (w.ndim() != 3) throw ShapeError("conv1d: weight must be [C_out,C_in,K], got " + shape_str(w.shape()));
    const Index c_in = x.dim(0);
    const Index t_len = x.dim(1);
    const Index c_out = w.dim(0);
    const Index k = w.dim(2);
    if (w.dim(1) != c_in) {
        throw ShapeError("conv1d: in-channel mismatch: input has C_in=" + std::to_string(c_in) +
                         " but weight expects C_in=" + std::to_string(w.dim(1)));
    }
    if (b.defined() && (b.ndim() != 1 || b.dim(0) != c_out)) {
        throw ShapeError("conv1d: bias shape " + shape_str(b.shape()) + " != [" + std::to_string(c_out) + "]");
    }
    if (stride < 1 || dilation < 1 || pad < 0) {
        throw ConfigError("conv1d: stride/dilation must be >= 1 and pad >= 0");
    }
    const Index span = static_cast<Index>(dilation) * (k - 1) + 1;
    if (t_len + 2 * pad < span) {
        throw ShapeError("conv1d: time dimension T=" + std::to_string(t_len) + " with pad=" +
                         std::to_string(pad) + " is shorter than the receptive field " + std::to_string(span));
    }
    const Index t_out = conv1d_out_len<T>(t_len, k, stride, pad, dilation);
    const bool rg = x.requires_grad() || w.requires_grad() || (b.defined() && b.requires_grad());
    auto out = Tensor<T>::zeros({c_out, t_out}, rg);

    const T* xp = x.v().data();
    const T* wp = w.v().data();
    T* op = out.v().data();

    const bool pointwise = (k == 1 && stride == 1 && pad == 0);
    if (pointwise) {
        // 1x1 convolution: per-channel axpy over the full time axis.
        for (Index oc = 0; oc < c_out; ++oc) {
            T* orow = op + oc * t_out;
            if (b.defined()) {
                const T bv = b.v()[static_cast<std::size_t>(oc)];
                for (Index t = 0; t < t_out; ++t) orow[t] = bv;
            }
            for (Index ic = 0; ic < c_in; ++ic) {
                kernels::axpy(wp[oc * c_in + ic], xp + ic * t_len, orow, static_cast<std::size_t>(t_len));
            }
        }
    } else {
        for (Index oc = 0; oc < c_out; ++oc) {
            for (Index ot = 0; ot < t_out; ++ot) {
                const Index base = ot * stride - pad;
                T acc = b.defined() ? b.v()[static_cast<std::size_t>(oc)] : T(0);
                if (dilation == 1 && base >= 0 && base + k <= t_len) {
                    for (Index ic = 0; ic < c_in; ++ic) {
                        acc += kernels::dot(wp + (oc * c_in + ic) * k, xp + ic * t_len + base,
                                            static_cast<std::size_t>(k));
                    }
                } else {
                    for (Index ic = 0; ic < c_in; ++ic) {
                        const T* wrow = wp + (oc * c_in + ic) * k;
                        const T* xrow = xp + ic * t_len;
                        for (Index kk = 0; kk < k; ++kk) {
                            const Index t = base + kk * dilation;
                            if (t >= 0 && t < t_len) acc += wrow[kk] * xrow[t];
                        }
                    }
                }
                op[oc * t_out + ot] = acc;
            }
        }
    }

    if (tape && rg) {
        std::vector<Tensor<T>> ts = b.defined() ? std::vector<Tensor<T>>{x, w, b, out}
                                                : std::vector<Tensor<T>>{x, w, out};
        tape->record("conv1d", std::move(ts),
                     [x, w, b, out, c_in, c_out, t_len, t_out, k, stride, pad, dilation, pointwise]() mutable {
            const T* go = out.g().data();
            const T* xp2 = x.v().data();
            const T* wp2 = w.v().data();
            const bool need_x = x.requires_grad();
            const bool need_w = w.requires_grad();
            if (b.defined() && b.requires_grad()) {
                auto bg = b.g();
                for (Index oc = 0; oc < c_out; ++oc) {
                    bg[static_cast<std::size_t>(oc)] += kernels::sum(go + oc * t_out, static_cast<std::size_t>(t_out));
                }
            }
            if (!need_x && !need_w) return;
            T* xg = need_x ? x.g().data() : nullptr;
            T* wg = need_w ? w.g().data() : nullptr;
            if (pointwise) {
                for (Index oc = 0; oc < c_out; ++oc) {
                    const T* grow = go + oc * t_out;
                    for (Index ic = 0; ic < c_in; ++ic) {
                        if (need_w) {
                            wg[oc * c_in + ic] += kernels::dot(grow, xp2 + ic * t_len,
                                                               static_cast<std::size_t>(t_len));
                        }
                        if (need_x) {
                            kernels::axpy(wp2[oc * c_in + ic], grow, xg + ic * t_len,
                                          static_cast<std::size_t>(t_len));
                        }
                    }
                }
                return;
            }
            for (Index oc = 0; oc < c_out; ++oc) {
                for (Index ot = 0; ot < t_out; ++ot) {
                    const T g = go[oc * t_out + ot];
                    if (g == T(0)) continue;
                    const Index base = ot * stride - pad;
                    if (dilation == 1 && base >= 0 && base + k <= t_len) {
                        for (Index ic = 0; ic < c_in; ++ic) {
                            if (need_w) {
                                kernels::axpy(g, xp2 + ic * t_len + base, wg + (oc * c_in + ic) * k,
                                              static_cast<std::size_t>(k));
                            }
                            if (need_x) {
                                kernels::axpy(g, wp2 + (oc * c_in + ic) * k, xg + ic * t_len + base,
                                              static_cast<std::size_t>(k));
                            }
                        }
                    } else {
                        for (Index ic = 0; ic < c_in; ++ic) {
                            const T* wrow = wp2 + (oc * c_in + ic) * k;
                            const T* xrow = xp2 + ic * t_len;
                            for (Index kk = 0; kk < k; ++kk) {
                                const Index t = base + kk * dilation;
                                if (t < 0 || t >= t_len) continue;
                                if (need_w) wg[(oc * c_in + ic) * k + kk] += g * xrow[t];
                                if (need_x) xg[ic * t_len + t] += g * wrow[kk];
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> transpose(Tape<T>* tape, const Tensor<T>& x) {
    if (x.ndim() != 2) throw ShapeError("transpose: expected 2-D tensor, got " + shape_str(x.shape()));
    const Index r = x.dim(0);
    const Index c = x.dim(1);
    auto out = Tensor<T>::zeros({c, r}, x.requires_grad());
    const T* xp = x.v().data();
    T* op = out.v().data();
    for (Index i = 0; i < r; ++i) {
        for (Index j = 0; j < c; ++j) op[j * r + i] = xp[i * c + j];
    }
    if (tape && out.requires_grad()) {
        tape->record("transpose", {x, out}, [x, out, r, c]() mutable {
            const T* go = out.g().data();
            T* xg = x.g().data();
            for (Index i = 0; i < r; ++i) {
                for (Index j = 0; j < c; ++j) xg[i * c + j] += go[j * r + i];
            }
        });
    }
    return out;
}

// Rows [r0, r1) of a 2-D tensor.
template <class T>
Tensor<T> slice_rows(Tape<T>* tape, const Tensor<T>& x, Index r0, Index r1) {
    if (x.ndim() != 2) throw ShapeError("slice_rows: expected 2-D tensor, got " + shape_str(x.shape()));
    if (r0 < 0 || r1 > x.dim(0) || r0 >= r1) {
        throw ShapeError("slice_rows: range [" + std::to_string(r0) + "," + std::to_string(r1) +
                         ") out of bounds for " + shape_str(x.shape()));
    }
    const Index c = x.dim(1);
    auto out = Tensor<T>::zeros({r1 - r0, c}, x.requires_grad());
    std::copy_n(x.v().data() + r0 * c, (r1 - r0) * c, out.v().data());
    if (tape && out.requires_grad()) {
        tape->record("slice_rows", {x, out}, [x, out, r0, c]() mutable {
            kernels::axpy(T(1), out.g().data(), x.g().data() + r0 * c, out.g().size());
        });
    }
    return out;
}

// Elements [i0, i1) of a 1-D tensor.
template <class T>
Tensor<T> slice(Tape<T>* tape, const Tensor<T>& x, Index i0, Index i1) {
    if (x.ndim() != 1) throw ShapeError("slice: expected 1-D tensor, got " + shape_str(x.shape()));
    if (i0 < 0 || i1 > x.dim(0) || i0 >= i1) {
        throw ShapeError("slice: range [" + std::to_string(i0) + "," + std::to_string(i1) +
                         ") out of bounds for " + shape_str(x.shape()));
    }
    auto out = Tensor<T>::zeros({i1 - i0}, x.requires_grad());
    std::copy_n(x.v().data() + i0, i1 - i0, out.v().data());
    if (tape && out.requires_grad()) {
        tape->record("slice", {x, out}, [x, out, i0]() mutable {
            kernels::axpy(T(1), out.g().data(), x.g().data() + i0, out.g().size());
        });
    }
    return out;
}

// Row r of a 2-D tensor as a 1-D tensor.
template <class T>
Tensor<T> row(Tape<T>* tape, const Tensor<T>& x, Index r) {
    if (x.ndim() != 2) throw ShapeError("row: expected 2-D tensor, got " + shape_str(x.shape()));
    if (r < 0 || r >= x.dim(0)) {
        throw ShapeError("row: index " + std::to_string(r) + " out of bounds for " + shape_str(x.shape()));
    }
    const Index c = x.dim(1);
    auto out = Tensor<T>::zeros({c}, x.requires_grad());
    std::copy_n(x.v().data() + r * c, c, out.v().data());
    if (tape && out.requires_grad()) {
        tape->record("row", {x, out}, [x, out, r, c]() mutable {
            kernels::axpy(T(1), out.g().data(), x.g().data() + r * c, static_cast<std::size_t>(c));
        });
    }
    return out;
}

// Concatenate 2-D tensors along rows (channel concat); all share the column count.
template <class T>
Tensor<T> concat_rows(Tape<T>* tape, const std::vector<Tensor<T>>& xs) {
    if (xs.empty()) throw ShapeError("concat_rows: empty input list");
    const Index c = xs[0].dim(1);
    Index rows = 0;
    bool rg = false;
    for (const auto& x : xs) {
        if (x.ndim() != 2 || x.dim(1) != c) {
            throw ShapeError("concat_rows: inconsistent column count, expected " + std::to_string(c) +
                             " got " + shape_str(x.shape()));
        }
        rows += x.dim(0);
        rg = rg || x.requires_grad();
    }
    auto out = Tensor<T>::zeros({rows, c}, rg);
    Index off = 0;
    for (const auto& x : xs) {
        std::copy_n(x.v().data(), x.size(), out.v().data() + off * c);
        off += x.dim(0);
    }
    if (tape && rg) {
        auto ts = xs;
        ts.push_back(out);
        tape->record("concat_rows", std::move(ts), [xs, out, c]() mutable {
            Index off2 = 0;
            for (auto& x : xs) {
                if (x.requires_grad()) {
                    kernels::axpy(T(1), out.g().data() + off2 * c, x.g().data(),
                                  static_cast<std::size_t>(x.size()));
                }
                off2 += x.dim(0);
            }
        });
    }
    return out;
}

// Concatenate 1-D tensors into one vector.
template <class T>
Tensor<T> concat_vec(Tape<T>* tape, const std::vector<Tensor<T>>& xs) {
    if (xs.empty()) throw ShapeError("concat_vec: empty input list");
    Index n = 0;
    bool rg = false;
    for (const auto& x : xs) {
        if (x.ndim() != 1) throw ShapeError("concat_vec: expected 1-D tensors, got " + shape_str(x.shape()));
        n += x.dim(0);
        rg = rg || x.requires_grad();
    }
    auto out = Tensor<T>::zeros({n}, rg);
    Index off = 0;
    for (const auto& x : xs) {
        std::copy_n(x.v().data(), x.size(), out.v().data() + off);
        off += x.dim(0);
    }
    if (tape && rg) {
        auto ts = xs;
        ts.push_back(out);
        tape->record("concat_vec", std::move(ts), [xs, out]() mutable {
            Index off2 = 0;
            for (auto& x : xs) {
                if (x.requires_grad()) {
                    kernels::axpy(T(1), out.g().data() + off2, x.g().data(),
                                  static_cast<std::size_t>(x.size()));
                }
                off2 += x.dim(0);
            }
        });
    }
    return out;
}

// Stack equal-length 1-D tensors as the rows of a [R, N] tensor.
template <class T>
Tensor<T> stack_rows(Tape<T>* tape, const std::vector<Tensor<T>>& xs) {
    if (xs.empty()) throw ShapeError("stack_rows: empty input list");
    const Index n = xs[0].dim(0);
    bool rg = false;
    for (const auto& x : xs) {
        if (x.ndim() != 1 || x.dim(0) != n) {
            throw ShapeError("stack_rows: expected 1-D tensors of length " + std::to_string(n) + ", got " +
                             shape_str(x.shape()));
        }
        rg = rg || x.requires_grad();
    }
    const Index r = static_cast<Index>(xs.size());
    auto out = Tensor<T>::zeros({r, n}, rg);
    for (Index i = 0; i < r; ++i) {
        std::copy_n(xs[static_cast<std::size_t>(i)].v().data(), n, out.v().data() + i * n);
    }
    if (tape && rg) {
        auto ts = xs;
        ts.push_back(out);
        tape->record("stack_rows", std::move(ts), [xs, out, n]() mutable {
            for (Index i = 0; i < static_cast<Index>(xs.size()); ++i) {
                auto& x = xs[static_cast<std::size_t>(i)];
                if (x.requires_grad()) {
                    kernels::axpy(T(1), out.g().data() + i * n, x.g().data(), static_cast<std::size_t>(n));
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reductions over the time axis of [C, T] tensors
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> rowsum(Tape<T>* tape, const Tensor<T>& x) {
    if (x.ndim() != 2) throw ShapeError("rowsum: expected 2-D tensor, got " + shape_str(x.shape()));
    const Index c = x.dim(0);
    const Index t = x.dim(1);
    auto out = Tensor<T>::zeros({c}, x.requires_grad());
    for (Index i = 0; i < c; ++i) {
        out.v()[static_cast<std::size_t>(i)] = kernels::sum(x.v().data() + i * t, static_cast<std::size_t>(t));
    }
    if (tape && out.requires_grad()) {
        tape->record("rowsum", {x, out}, [x, out, c, t]() mutable {
            const auto go = out.g();
            T* xg = x.g().data();
            for (Index i = 0; i < c; ++i) {
                const T g = go[static_cast<std::size_t>(i)];
                T* xrow = xg + i * t;
                for (Index j = 0; j < t; ++j) xrow[j] += g;
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> rowmean(Tape<T>* tape, const Tensor<T>& x) {
    return scale(tape, rowsum(tape, x), T(1) / static_cast<T>(x.dim(1)));
}

// Broadcast multiply of each row by a per-row gate: out[c,t] = x[c,t] * s[c].
template <class T>
Tensor<T> mul_rows(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& s) {
    if (x.ndim() != 2 || s.ndim() != 1 || s.dim(0) != x.dim(0)) {
        throw ShapeError("mul_rows: got " + shape_str(x.shape()) + " and " + shape_str(s.shape()));
    }
    const Index c = x.dim(0);
    const Index t = x.dim(1);
    const bool rg = any_requires_grad<T>({x, s});
    auto out = Tensor<T>::zeros({c, t}, rg);
    for (Index i = 0; i < c; ++i) {
        const T sv = s.v()[static_cast<std::size_t>(i)];
        const T* xrow = x.v().data() + i * t;
        T* orow = out.v().data() + i * t;
        for (Index j = 0; j < t; ++j) orow[j] = sv * xrow[j];
    }
    if (tape && rg) {
        tape->record("mul_rows", {x, s, out}, [x, s, out, c, t]() mutable {
            const T* go = out.g().data();
            if (x.requires_grad()) {
                T* xg = x.g().data();
                for (Index i = 0; i < c; ++i) {
                    kernels::axpy(s.v()[static_cast<std::size_t>(i)], go + i * t, xg + i * t,
                                  static_cast<std::size_t>(t));
                }
            }
            if (s.requires_grad()) {
                auto sg = s.g();
                for (Index i = 0; i < c; ++i) {
                    sg[static_cast<std::size_t>(i)] += kernels::dot(go + i * t, x.v().data() + i * t,
                                                                    static_cast<std::size_t>(t));
                }
            }
        });
    }
    return out;
}

// Row-wise softmax of a [C, T] tensor: each row is non-negative and sums to 1.
template <class T>
Tensor<T> softmax_rows(Tape<T>* tape, const Tensor<T>& x) {
    if (x.ndim() != 2) throw ShapeError("softmax_rows: expected 2-D tensor, got " + shape_str(x.shape()));
    const Index c = x.dim(0);
    const Index t = x.dim(1);
    auto out = Tensor<T>::zeros({c, t}, x.requires_grad());
    for (Index i = 0; i < c; ++i) {
        const T* xrow = x.v().data() + i * t;
        T* orow = out.v().data() + i * t;
        T m = xrow[0];
        for (Index j = 1; j < t; ++j) m = std::max(m, xrow[j]);
        T z = T(0);
        for (Index j = 0; j < t; ++j) {
            orow[j] = std::exp(xrow[j] - m);
            z += orow[j];
        }
        const T inv = T(1) / z;
        for (Index j = 0; j < t; ++j) orow[j] *= inv;
    }
    if (tape && out.requires_grad()) {
        tape->record("softmax_rows", {x, out}, [x, out, c, t]() mutable {
            const T* go = out.g().data();
            const T* yv = out.v().data();
            T* xg = x.g().data();
            for (Index i = 0; i < c; ++i) {
                const T* grow = go + i * t;
                const T* yrow = yv + i * t;
                const T dotgy = kernels::dot(grow, yrow, static_cast<std::size_t>(t));
                T* xrow = xg + i * t;
                for (Index j = 0; j < t; ++j) xrow[j] += yrow[j] * (grow[j] - dotgy);
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

// Binary cross entropy on a single logit, stable log-sum-exp form.
template <class T>
Tensor<T> bce_with_logit(Tape<T>* tape, const Tensor<T>& logit, int y) {
    if (logit.size() != 1) throw ShapeError("bce_with_logit: logit must be a scalar tensor");
    if (y != 0 && y != 1) throw Error("bce_with_logit: label must be 0 or 1, got " + std::to_string(y));
    const T z = logit.v()[0];
    const T loss = std::max(z, T(0)) - z * static_cast<T>(y) + std::log1p(std::exp(-std::abs(z)));
    auto out = Tensor<T>::scalar(loss, logit.requires_grad());
    if (tape && out.requires_grad()) {
        tape->record("bce_with_logit", {logit, out}, [logit, out, z, y]() mutable {
            logit.g()[0] += out.g()[0] * (sigmoid_scalar(z) - static_cast<T>(y));
        });
    }
    return out;
}

// Multi-class cross entropy from logits, stable log-sum-exp form.
template <class T>
Tensor<T> cross_entropy(Tape<T>* tape, const Tensor<T>& logits, int y) {
    if (logits.ndim() != 1) throw ShapeError("cross_entropy: logits must be 1-D, got " + shape_str(logits.shape()));
    const Index s = logits.dim(0);
    if (y < 0 || y >= s) {
        throw Error("cross_entropy: class id " + std::to_string(y) + " out of range [0," + std::to_string(s) + ")");
    }
    const T* zp = logits.v().data();
    T m = zp[0];
    for (Index i = 1; i < s; ++i) m = std::max(m, zp[i]);
    T z = T(0);
    for (Index i = 0; i < s; ++i) z += std::exp(zp[i] - m);
    const T lse = m + std::log(z);
    auto out = Tensor<T>::scalar(lse - zp[y], logits.requires_grad());
    if (tape && out.requires_grad()) {
        tape->record("cross_entropy", {logits, out}, [logits, out, s, y, m, z]() mutable {
            const T g = out.g()[0];
            const T* zp2 = logits.v().data();
            auto lg = logits.g();
            const T inv = T(1) / z;
            for (Index i = 0; i < s; ++i) {
                const T soft = std::exp(zp2[i] - m) * inv;
                lg[static_cast<std::size_t>(i)] += g * (soft - (i == y ? T(1) : T(0)));
            }
        });
    }
    return out;
}

}  // namespace dlab::ops
