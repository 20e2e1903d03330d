#pragma once

#include <utility>
#include <vector>

#include "dlab/ops.hpp"

// Composite layers assembled from primitive ops, so their backward passes
// come from the tape. Each has an end-to-end gradient check in the tests.

namespace dlab::ops {

template <class T>
struct SeRes2Params {
    Tensor<T> conv_in_w, conv_in_b;    // [C,C,1], [C]
    std::vector<Tensor<T>> res_w;      // scale-1 convs, each [C/s, C/s, K]
    std::vector<Tensor<T>> res_b;
    Tensor<T> conv_out_w, conv_out_b;  // [C,C,1], [C]
    Tensor<T> se_fc1_w, se_fc1_b;      // [C/r, C], [C/r]
    Tensor<T> se_fc2_w, se_fc2_b;      // [C, C/r], [C]
    bool se_bypass = false;            // test hook: gate forced to all-ones
};

// 1x1 conv -> multi-scale dilated conv -> 1x1 conv -> squeeze-excitation
// channel gating -> residual add. Padding is dilation*(kernel-1)/2 so the
// time length is preserved (equal to `dilation` for the kernel-3 layers).
template <class T>
Tensor<T> se_res2_block(Tape<T>* tape, const Tensor<T>& x, const SeRes2Params<T>& p,
                        int kernel, int dilation, int scale) {
    if (x.ndim() != 2) throw ShapeError("se_res2_block: input must be [C,T], got " + shape_str(x.shape()));
    const Index c = x.dim(0);
    if (scale < 2) throw ConfigError("se_res2_block: scale must be >= 2");
    if (c % scale != 0) {
        throw ConfigError("se_res2_block: channels " + std::to_string(c) +
                          " not divisible by scale " + std::to_string(scale));
    }
    if (kernel % 2 == 0) throw ConfigError("se_res2_block: kernel must be odd to preserve time length");
    if (static_cast<Index>(p.res_w.size()) != scale - 1) {
        throw ConfigError("se_res2_block: expected " + std::to_string(scale - 1) + " inner convolutions, got " +
                          std::to_string(p.res_w.size()));
    }
    const int pad = dilation * (kernel - 1) / 2;
    const Index width = c / scale;

    auto h = relu(tape, conv1d(tape, x, p.conv_in_w, p.conv_in_b, 1, 0, 1));

    // Hierarchical multi-scale pass: the first split passes through, each
    // later split is convolved together with the previous output.
    std::vector<Tensor<T>> outs;
    outs.reserve(static_cast<std::size_t>(scale));
    outs.push_back(slice_rows(tape, h, 0, width));
    for (int i = 1; i < scale; ++i) {
        auto part = slice_rows(tape, h, i * width, (i + 1) * width);
        auto mixed = add(tape, part, outs.back());
        outs.push_back(relu(tape, conv1d(tape, mixed, p.res_w[static_cast<std::size_t>(i - 1)],
                                         p.res_b[static_cast<std::size_t>(i - 1)], 1, pad, dilation)));
    }
    auto merged = concat_rows(tape, outs);
    auto h2 = relu(tape, conv1d(tape, merged, p.conv_out_w, p.conv_out_b, 1, 0, 1));

    Tensor<T> gated = h2;
    if (!p.se_bypass) {
        auto squeezed = rowmean(tape, h2);
        auto e = relu(tape, affine(tape, p.se_fc1_w, p.se_fc1_b, squeezed));
        auto gate = sigmoid(tape, affine(tape, p.se_fc2_w, p.se_fc2_b, e));
        gated = mul_rows(tape, h2, gate);
    }
    return add(tape, gated, x);
}

template <class T>
struct AttentiveStatsParams {
    Tensor<T> w1, b1;  // [A,C,1], [A]
    Tensor<T> w2, b2;  // [C,A,1], [C]
};

// Attention-weighted mean and standard deviation over time, concatenated:
// [C,T] -> [2C]. Per-channel attention weights are a softmax over time, so
// each channel's weights are non-negative and sum to one. The variance is
// floored at eps before the square root.
template <class T>
Tensor<T> attentive_stats_pool(Tape<T>* tape, const Tensor<T>& x, const AttentiveStatsParams<T>& p,
                               T eps = T(1e-8)) {
    if (x.ndim() != 2) throw ShapeError("attentive_stats_pool: input must be [C,T], got " + shape_str(x.shape()));
    if (x.dim(1) < 1) throw ShapeError("attentive_stats_pool: empty time axis");
    auto hidden = tanh_op(tape, conv1d(tape, x, p.w1, p.b1, 1, 0, 1));
    auto scores = conv1d(tape, hidden, p.w2, p.b2, 1, 0, 1);
    auto att = softmax_rows(tape, scores);
    auto mean = rowsum(tape, mul(tape, att, x));
    auto ex2 = rowsum(tape, mul(tape, att, mul(tape, x, x)));
    auto var = sub(tape, ex2, mul(tape, mean, mean));
    auto sd = sqrt_floor(tape, var, eps);
    return concat_vec(tape, {mean, sd});
}

// Attention weights only; exposed for the tests' sum-to-one property.
template <class T>
Tensor<T> attentive_weights(Tape<T>* tape, const Tensor<T>& x, const AttentiveStatsParams<T>& p) {
    auto hidden = tanh_op(tape, conv1d(tape, x, p.w1, p.b1, 1, 0, 1));
    return softmax_rows(tape, conv1d(tape, hidden, p.w2, p.b2, 1, 0, 1));
}

template <class T>
struct LstmParams {
    Tensor<T> w_ih;  // [4H, D_in], gate order i, f, g, o
    Tensor<T> w_hh;  // [4H, H]
    Tensor<T> b;     // [4H]
};

template <class T>
std::pair<Tensor<T>, Tensor<T>> lstm_cell(Tape<T>* tape, const Tensor<T>& x_t, const LstmParams<T>& p,
                                          const Tensor<T>& h_prev, const Tensor<T>& c_prev) {
    const Index hidden = h_prev.dim(0);
    if (p.w_ih.dim(0) != 4 * hidden || p.w_hh.dim(0) != 4 * hidden) {
        throw ShapeError("lstm_cell: gate weight rows " + std::to_string(p.w_ih.dim(0)) +
                         " != 4*hidden (" + std::to_string(4 * hidden) + ")");
    }
    auto z = add(tape, affine(tape, p.w_ih, p.b, x_t), matvec(tape, p.w_hh, h_prev));
    auto i = sigmoid(tape, slice(tape, z, 0, hidden));
    auto f = sigmoid(tape, slice(tape, z, hidden, 2 * hidden));
    auto g = tanh_op(tape, slice(tape, z, 2 * hidden, 3 * hidden));
    auto o = sigmoid(tape, slice(tape, z, 3 * hidden, 4 * hidden));
    auto c = add(tape, mul(tape, f, c_prev), mul(tape, i, g));
    auto h = mul(tape, o, tanh_op(tape, c));
    return {h, c};
}

// Unidirectional LSTM over x: [T, D_in]; returns all hidden states [T, H].
template <class T>
Tensor<T> lstm_sequence(Tape<T>* tape, const Tensor<T>& x, const LstmParams<T>& p,
                        const Tensor<T>& h0, const Tensor<T>& c0) {
    if (x.ndim() != 2) throw ShapeError("lstm_sequence: input must be [T,D], got " + shape_str(x.shape()));
    const Index steps = x.dim(0);
    if (steps < 1) throw ShapeError("lstm_sequence: empty sequence");
    Tensor<T> h = h0;
    Tensor<T> c = c0;
    std::vector<Tensor<T>> hs;
    hs.reserve(static_cast<std::size_t>(steps));
    for (Index t = 0; t < steps; ++t) {
        auto x_t = row(tape, x, t);
        auto [h_next, c_next] = lstm_cell(tape, x_t, p, h, c);
        h = h_next;
        c = c_next;
        hs.push_back(h);
    }
    return stack_rows(tape, hs);
}

}  // namespace dlab::ops
