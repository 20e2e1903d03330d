#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "dlab/blocks.hpp"
#include "dlab/ops.hpp"
#include "dlab/rng.hpp"

namespace dlab {

enum class Architecture { EcapaLite, DepAudioNetLite };

inline std::string architecture_name(Architecture a) {
    return a == Architecture::EcapaLite ? "ecapa_lite" : "depaudionet_lite";
}

inline Architecture architecture_from_name(const std::string& s) {
    if (s == "ecapa_lite") return Architecture::EcapaLite;
    if (s == "depaudionet_lite") return Architecture::DepAudioNetLite;
    throw ConfigError("unknown architecture: " + s);
}

// Parameter group for non-uniform adversarial weighting: feature extraction
// (initial layers) vs feature processing (everything after them).
enum class Group { FE, FP };

struct ModelSpec {
    Architecture architecture = Architecture::EcapaLite;
    double channel_multiplier = 1.0;
    int embedding_dim = 128;
    int num_speakers = 107;
    int segment_len = 61440;
    // Internals not fixed by the published layer table; all configurable.
    int res2_scale = 4;
    int se_ratio = 8;
    int attention_dim = 128;      // pre-multiplier
    int dep_conv_channels = 128;  // pre-multiplier
    int dep_kernel1 = 1024;
    int dep_stride1 = 512;
    int dep_kernel2 = 3;
    int dep_stride2 = 1;
    int dep_lstm_hidden = 128;  // pre-multiplier
    std::uint64_t seed = 0;

    int scaled(int base_channels) const {
        const double c = channel_multiplier * base_channels;
        const int r = static_cast<int>(std::lround(c));
        if (r <= 0 || std::abs(c - r) > 1e-9) {
            throw ConfigError("channel_multiplier " + std::to_string(channel_multiplier) + " * " +
                              std::to_string(base_channels) + " is not a positive integer");
        }
        return r;
    }

    void validate() const {
        scaled(128);
        if (num_speakers < 2) throw ConfigError("num_speakers must be >= 2");
        if (embedding_dim < 1) throw ConfigError("embedding_dim must be positive");
        if (segment_len < 1) throw ConfigError("segment_len must be positive");
        if (res2_scale < 2) throw ConfigError("res2_scale must be >= 2");
        if (se_ratio < 1) throw ConfigError("se_ratio must be >= 1");
    }
};

// How to pool a captured activation over time for layer-wise analysis.
enum class TimeAxis { None, Cols, Rows };

template <class T>
struct Activation {
    std::string layer;
    Tensor<T> value;
    bool prediction = false;  // prediction-layer outputs, excluded from GDV
    TimeAxis time = TimeAxis::None;
};

template <class T>
struct ForwardOut {
    Tensor<T> mdd_logit;   // [1]
    Tensor<T> spk_logits;  // [num_speakers]
    std::vector<Activation<T>> activations;

    const Tensor<T>& activation(const std::string& layer) const {
        for (const auto& a : activations) {
            if (a.layer == layer) return a.value;
        }
        throw Error("no activation captured for layer " + layer);
    }
};

template <class T>
struct Parameter {
    std::string name;
    Group group = Group::FP;
    bool speaker_head = false;
    Tensor<T> value;
};

template <class T>
class Model;
template <class T>
Model<T> build_ecapa_lite_t(const ModelSpec& spec);
template <class T>
Model<T> build_depaudionet_lite_t(const ModelSpec& spec);

template <class T>
class Model {
  public:
    Model(ModelSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

    const ModelSpec& spec() const { return spec_; }

    std::vector<Parameter<T>>& params() { return params_; }
    const std::vector<Parameter<T>>& params() const { return params_; }

    Tensor<T>& param(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("unknown parameter: " + name);
        return params_[it->second].value;
    }
    const Tensor<T>& param(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw Error("unknown parameter: " + name);
        return params_[it->second].value;
    }

    void zero_grad() {
        for (auto& p : params_) p.value.zero_grad();
    }

    Index num_trainable() const {
        Index n = 0;
        for (const auto& p : params_) n += p.value.size();
        return n;
    }

    // Embedding width actually produced by forward(); equals the spec's
    // embedding_dim for the TDNN model and the scaled LSTM hidden size for
    // the CNN-LSTM model.
    int embedding_dim() const {
        return spec_.architecture == Architecture::EcapaLite ? spec_.embedding_dim
                                                             : spec_.scaled(spec_.dep_lstm_hidden);
    }

    ForwardOut<T> forward(Tape<T>* tape, const Tensor<T>& segment) const {
        if (segment.ndim() != 1 || segment.dim(0) != spec_.segment_len) {
            throw ShapeError("forward: segment shape " + shape_str(segment.shape()) + " != [" +
                             std::to_string(spec_.segment_len) + "]");
        }
        return spec_.architecture == Architecture::EcapaLite ? forward_ecapa(tape, segment)
                                                             : forward_dep(tape, segment);
    }

    // Names of layers in forward order, with prediction layers flagged.
    std::vector<std::pair<std::string, bool>> layer_names() const;

    template <class U>
    friend Model<U> build_ecapa_lite_t(const ModelSpec& spec);
    template <class U>
    friend Model<U> build_depaudionet_lite_t(const ModelSpec& spec);

  private:
    void add_param(const std::string& name, Group group, Tensor<T> value, bool speaker_head = false) {
        index_[name] = params_.size();
        params_.push_back(Parameter<T>{name, group, speaker_head, std::move(value)});
    }

    Tensor<T> kaiming(Rng& rng, std::vector<Index> shape, Index fan_in) const {
        auto t = Tensor<T>::zeros(std::move(shape), true);
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (auto& v : t.v()) v = static_cast<T>(rng.uniform(-bound, bound));
        return t;
    }

    Tensor<T> zeros_param(std::vector<Index> shape) const { return Tensor<T>::zeros(std::move(shape), true); }

    ops::SeRes2Params<T> res2_params(const std::string& prefix) const {
        ops::SeRes2Params<T> p;
        p.conv_in_w = param(prefix + ".conv_in.weight");
        p.conv_in_b = param(prefix + ".conv_in.bias");
        for (int i = 1; i < spec_.res2_scale; ++i) {
            p.res_w.push_back(param(prefix + ".res" + std::to_string(i) + ".weight"));
            p.res_b.push_back(param(prefix + ".res" + std::to_string(i) + ".bias"));
        }
        p.conv_out_w = param(prefix + ".conv_out.weight");
        p.conv_out_b = param(prefix + ".conv_out.bias");
        p.se_fc1_w = param(prefix + ".se_fc1.weight");
        p.se_fc1_b = param(prefix + ".se_fc1.bias");
        p.se_fc2_w = param(prefix + ".se_fc2.weight");
        p.se_fc2_b = param(prefix + ".se_fc2.bias");
        p.se_bypass = se_bypass_;
        return p;
    }

    ForwardOut<T> forward_ecapa(Tape<T>* tape, const Tensor<T>& segment) const;
    ForwardOut<T> forward_dep(Tape<T>* tape, const Tensor<T>& segment) const;

    ModelSpec spec_;
    std::vector<Parameter<T>> params_;
    std::unordered_map<std::string, std::size_t> index_;

  public:
    // Test hook: force the squeeze-excitation gates to all-ones.
    bool se_bypass_ = false;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

template <class T>
Model<T> build_ecapa_lite_t(const ModelSpec& spec_in) {
    ModelSpec spec = spec_in;
    spec.architecture = Architecture::EcapaLite;
    Model<T> m(spec);
    Rng rng = Rng(spec.seed).child("init");

    const Index c = spec.scaled(128);
    if (c % spec.res2_scale != 0) {
        throw ConfigError("channels " + std::to_string(c) + " not divisible by res2_scale " +
                          std::to_string(spec.res2_scale));
    }
    const Index cw = c / spec.res2_scale;
    const Index agg = 3 * c;
    const Index att = spec.scaled(spec.attention_dim);
    const Index se_dim = std::max<Index>(1, c / spec.se_ratio);
    const Index emb = spec.embedding_dim;
    const Index spk = spec.num_speakers;

    m.add_param("input_conv.weight", Group::FE, m.kaiming(rng, {c, 1, 1024}, 1024));
    m.add_param("input_conv.bias", Group::FE, m.zeros_param({c}));

    for (int blk = 1; blk <= 3; ++blk) {
        const std::string pre = "se_res2_" + std::to_string(blk);
        m.add_param(pre + ".conv_in.weight", Group::FE, m.kaiming(rng, {c, c, 1}, c));
        m.add_param(pre + ".conv_in.bias", Group::FE, m.zeros_param({c}));
        for (int i = 1; i < spec.res2_scale; ++i) {
            m.add_param(pre + ".res" + std::to_string(i) + ".weight", Group::FE,
                        m.kaiming(rng, {cw, cw, 3}, cw * 3));
            m.add_param(pre + ".res" + std::to_string(i) + ".bias", Group::FE, m.zeros_param({cw}));
        }
        m.add_param(pre + ".conv_out.weight", Group::FE, m.kaiming(rng, {c, c, 1}, c));
        m.add_param(pre + ".conv_out.bias", Group::FE, m.zeros_param({c}));
        m.add_param(pre + ".se_fc1.weight", Group::FE, m.kaiming(rng, {se_dim, c}, c));
        m.add_param(pre + ".se_fc1.bias", Group::FE, m.zeros_param({se_dim}));
        m.add_param(pre + ".se_fc2.weight", Group::FE, m.kaiming(rng, {c, se_dim}, se_dim));
        m.add_param(pre + ".se_fc2.bias", Group::FE, m.zeros_param({c}));
    }

    m.add_param("concat_conv.weight", Group::FP, m.kaiming(rng, {agg, agg, 1}, agg));
    m.add_param("concat_conv.bias", Group::FP, m.zeros_param({agg}));
    m.add_param("attentive_stats_pool.att1.weight", Group::FP, m.kaiming(rng, {att, agg, 1}, agg));
    m.add_param("attentive_stats_pool.att1.bias", Group::FP, m.zeros_param({att}));
    m.add_param("attentive_stats_pool.att2.weight", Group::FP, m.kaiming(rng, {agg, att, 1}, att));
    m.add_param("attentive_stats_pool.att2.bias", Group::FP, m.zeros_param({agg}));
    m.add_param("embedding.weight", Group::FP, m.kaiming(rng, {emb, 2 * agg}, 2 * agg));
    m.add_param("embedding.bias", Group::FP, m.zeros_param({emb}));
    m.add_param("speaker_head.weight", Group::FP, m.kaiming(rng, {spk, emb}, emb), true);
    m.add_param("speaker_head.bias", Group::FP, m.zeros_param({spk}), true);
    m.add_param("mdd_head.weight", Group::FP, m.kaiming(rng, {1, emb}, emb));
    m.add_param("mdd_head.bias", Group::FP, m.zeros_param({1}));
    return m;
}

template <class T>
Model<T> build_depaudionet_lite_t(const ModelSpec& spec_in) {
    ModelSpec spec = spec_in;
    spec.architecture = Architecture::DepAudioNetLite;
    Model<T> m(spec);
    Rng rng = Rng(spec.seed).child("init");

    const Index c = spec.scaled(spec.dep_conv_channels);
    const Index h = spec.scaled(spec.dep_lstm_hidden);
    const Index spk = spec.num_speakers;

    m.add_param("conv1.weight", Group::FE, m.kaiming(rng, {c, 1, spec.dep_kernel1}, spec.dep_kernel1));
    m.add_param("conv1.bias", Group::FE, m.zeros_param({c}));
    m.add_param("conv2.weight", Group::FE, m.kaiming(rng, {c, c, spec.dep_kernel2}, c * spec.dep_kernel2));
    m.add_param("conv2.bias", Group::FE, m.zeros_param({c}));
    m.add_param("lstm1.w_ih", Group::FP, m.kaiming(rng, {4 * h, c}, c));
    m.add_param("lstm1.w_hh", Group::FP, m.kaiming(rng, {4 * h, h}, h));
    m.add_param("lstm1.bias", Group::FP, m.zeros_param({4 * h}));
    m.add_param("lstm2.w_ih", Group::FP, m.kaiming(rng, {4 * h, h}, h));
    m.add_param("lstm2.w_hh", Group::FP, m.kaiming(rng, {4 * h, h}, h));
    m.add_param("lstm2.bias", Group::FP, m.zeros_param({4 * h}));
    m.add_param("speaker_head.weight", Group::FP, m.kaiming(rng, {spk, h}, h), true);
    m.add_param("speaker_head.bias", Group::FP, m.zeros_param({spk}), true);
    m.add_param("mdd_head.weight", Group::FP, m.kaiming(rng, {1, h}, h));
    m.add_param("mdd_head.bias", Group::FP, m.zeros_param({1}));
    return m;
}

inline ModelSpec validated(const ModelSpec& spec) {
    spec.validate();
    return spec;
}

template <class T>
Model<T> build_model_t(const ModelSpec& spec) {
    return spec.architecture == Architecture::EcapaLite ? build_ecapa_lite_t<T>(spec)
                                                        : build_depaudionet_lite_t<T>(spec);
}

// ---------------------------------------------------------------------------
// Forward passes
// ---------------------------------------------------------------------------

template <class T>
ForwardOut<T> Model<T>::forward_ecapa(Tape<T>* tape, const Tensor<T>& segment) const {
    namespace o = ops;
    ForwardOut<T> out;
    auto x = Tensor<T>::from({1, spec_.segment_len}, {segment.v().begin(), segment.v().end()},
                             segment.requires_grad());
    if (tape && segment.requires_grad()) {
        auto seg = segment;
        auto xx = x;
        tape->record("reshape", {seg, xx}, [seg, xx]() mutable {
            kernels::axpy(T(1), xx.g().data(), seg.g().data(), xx.g().size());
        });
    }

    auto h0 = o::relu(tape, o::conv1d(tape, x, param("input_conv.weight"), param("input_conv.bias"), 512, 0, 1));
    out.activations.push_back({"input_conv", h0, false, TimeAxis::Cols});

    std::vector<Tensor<T>> block_outs;
    Tensor<T> h = h0;
    for (int blk = 1; blk <= 3; ++blk) {
        const std::string name = "se_res2_" + std::to_string(blk);
        h = o::se_res2_block(tape, h, res2_params(name), 3, blk + 1, spec_.res2_scale);
        out.activations.push_back({name, h, false, TimeAxis::Cols});
        block_outs.push_back(h);
    }

    auto agg = o::concat_rows(tape, block_outs);
    out.activations.push_back({"feature_agg", agg, false, TimeAxis::Cols});

    auto cc = o::relu(tape, o::conv1d(tape, agg, param("concat_conv.weight"), param("concat_conv.bias"), 1, 0, 1));
    out.activations.push_back({"concat_conv", cc, false, TimeAxis::Cols});

    o::AttentiveStatsParams<T> ap{param("attentive_stats_pool.att1.weight"), param("attentive_stats_pool.att1.bias"),
                                  param("attentive_stats_pool.att2.weight"), param("attentive_stats_pool.att2.bias")};
    auto pooled = o::attentive_stats_pool(tape, cc, ap);
    out.activations.push_back({"attentive_stats_pool", pooled, false, TimeAxis::None});

    auto emb = o::affine(tape, param("embedding.weight"), param("embedding.bias"), pooled);
    out.activations.push_back({"embedding", emb, false, TimeAxis::None});

    out.spk_logits = o::affine(tape, param("speaker_head.weight"), param("speaker_head.bias"), emb);
    out.activations.push_back({"speaker_head", out.spk_logits, true, TimeAxis::None});
    out.mdd_logit = o::affine(tape, param("mdd_head.weight"), param("mdd_head.bias"), emb);
    out.activations.push_back({"mdd_head", out.mdd_logit, true, TimeAxis::None});
    return out;
}

template <class T>
ForwardOut<T> Model<T>::forward_dep(Tape<T>* tape, const Tensor<T>& segment) const {
    namespace o = ops;
    ForwardOut<T> out;
    auto x = Tensor<T>::from({1, spec_.segment_len}, {segment.v().begin(), segment.v().end()},
                             segment.requires_grad());
    if (tape && segment.requires_grad()) {
        auto seg = segment;
        auto xx = x;
        tape->record("reshape", {seg, xx}, [seg, xx]() mutable {
            kernels::axpy(T(1), xx.g().data(), seg.g().data(), xx.g().size());
        });
    }

    auto h1 = o::relu(tape, o::conv1d(tape, x, param("conv1.weight"), param("conv1.bias"), spec_.dep_stride1, 0, 1));
    out.activations.push_back({"conv1", h1, false, TimeAxis::Cols});
    const int pad2 = (spec_.dep_kernel2 - 1) / 2;
    auto h2 = o::relu(tape, o::conv1d(tape, h1, param("conv2.weight"), param("conv2.bias"), spec_.dep_stride2, pad2, 1));
    out.activations.push_back({"conv2", h2, false, TimeAxis::Cols});

    const Index hsz = spec_.scaled(spec_.dep_lstm_hidden);
    auto seq = o::transpose(tape, h2);  // [T, C]
    auto zero_h = Tensor<T>::zeros({hsz});
    auto zero_c = Tensor<T>::zeros({hsz});
    o::LstmParams<T> l1{param("lstm1.w_ih"), param("lstm1.w_hh"), param("lstm1.bias")};
    auto s1 = o::lstm_sequence(tape, seq, l1, zero_h, zero_c);
    out.activations.push_back({"lstm1", s1, false, TimeAxis::Rows});
    o::LstmParams<T> l2{param("lstm2.w_ih"), param("lstm2.w_hh"), param("lstm2.bias")};
    auto s2 = o::lstm_sequence(tape, s1, l2, zero_h, zero_c);
    out.activations.push_back({"lstm2", s2, false, TimeAxis::Rows});

    auto emb = o::row(tape, s2, s2.dim(0) - 1);  // last hidden state
    out.activations.push_back({"embedding", emb, false, TimeAxis::None});

    out.spk_logits = o::affine(tape, param("speaker_head.weight"), param("speaker_head.bias"), emb);
    out.activations.push_back({"speaker_head", out.spk_logits, true, TimeAxis::None});
    out.mdd_logit = o::affine(tape, param("mdd_head.weight"), param("mdd_head.bias"), emb);
    out.activations.push_back({"mdd_head", out.mdd_logit, true, TimeAxis::None});
    return out;
}

template <class T>
std::vector<std::pair<std::string, bool>> Model<T>::layer_names() const {
    if (spec_.architecture == Architecture::EcapaLite) {
        return {{"input_conv", false}, {"se_res2_1", false}, {"se_res2_2", false}, {"se_res2_3", false},
                {"feature_agg", false}, {"concat_conv", false}, {"attentive_stats_pool", false},
                {"embedding", false}, {"speaker_head", true}, {"mdd_head", true}};
    }
    return {{"conv1", false}, {"conv2", false}, {"lstm1", false}, {"lstm2", false},
            {"embedding", false}, {"speaker_head", true}, {"mdd_head", true}};
}

// Float is the training precision; double instantiations back the gradient
// checks on the building blocks.
using ModelF = Model<float>;

inline ModelF build_ecapa_lite(const ModelSpec& spec) { return build_ecapa_lite_t<float>(spec); }
inline ModelF build_depaudionet_lite(const ModelSpec& spec) { return build_depaudionet_lite_t<float>(spec); }
inline ModelF build_model(const ModelSpec& spec) { return build_model_t<float>(spec); }

}  // namespace dlab
