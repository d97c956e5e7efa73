#include "temsa/models/layers.hpp"

#include <cmath>

#include "temsa/common.hpp"

namespace temsa::models {

using ad::Var;

std::string_view to_string(AttentionScaling s) { return s == AttentionScaling::scaled ? "scaled" : "unscaled"; }

AttentionScaling parse_attention_scaling(std::string_view s) {
    if (s == "scaled") return AttentionScaling::scaled;
    if (s == "unscaled") return AttentionScaling::unscaled;
    throw Error("unknown attention scaling '" + std::string(s) + "' (expected scaled|unscaled)");
}

std::string_view to_string(Activation a) { return a == Activation::gelu ? "gelu" : "relu"; }

Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "gelu") return Activation::gelu;
    throw Error("unknown activation '" + std::string(s) + "' (expected relu|gelu)");
}

Matrix glorot(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-limit, limit);
    return m;
}

Var dropout(const Var& x, double p, Mode mode, Rng* rng) {
    if (mode != Mode::train || p <= 0.0) return x;
    if (!rng) throw Error("dropout in training mode needs a random stream");
    const double keep = 1.0 - p;
    Matrix mask(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < mask.rows(); ++r)
        for (Eigen::Index c = 0; c < mask.cols(); ++c) mask(r, c) = rng->uniform() < keep ? 1.0 / keep : 0.0;
    return ad::mul_const(x, mask);
}

Var activate(const Var& x, Activation a) { return a == Activation::gelu ? ad::gelu(x) : ad::relu(x); }

// --- Attention ----------------------------------------------------------------

Var attention(const Var& q, const Var& k, const Var& v, AttentionScaling scaling, Matrix* weights_out) {
    if (q.cols() != k.cols())
        throw Error("attention: query and key widths differ (" + std::to_string(q.cols()) + " vs " +
                    std::to_string(k.cols()) + ")");
    if (q.rows() != k.rows() || k.rows() != v.rows())
        throw Error("attention: Q, K and V must have the same number of tokens");
    Var logits = ad::matmul(q, ad::transpose(k));
    if (scaling == AttentionScaling::scaled) logits = ad::scale(logits, 1.0 / std::sqrt(static_cast<double>(q.cols())));
    Var weights = ad::softmax_rows(logits);
    if (weights_out) *weights_out = weights.value();
    return ad::matmul(weights, v);
}

AttentionResult self_attention(const Matrix& q, const Matrix& k, const Matrix& v, AttentionScaling scaling) {
    ad::Tape tape(false);
    Matrix weights;
    Var out = attention(tape.constant(q), tape.constant(k), tape.constant(v), scaling, &weights);
    return {out.value(), weights};
}

// --- Encoder block --------------------------------------------------------------

void EncoderBlockConfig::validate() const {
    if (model_dim <= 0 || num_heads <= 0 || ff_dim <= 0) throw Error("encoder block sizes must be positive");
    if (model_dim % num_heads != 0)
        throw Error("model_dim " + std::to_string(model_dim) + " is not divisible by " + std::to_string(num_heads) +
                    " heads");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
}

void add_encoder_block_params(ad::ParameterStore& store, const std::string& prefix, const EncoderBlockConfig& cfg,
                              Rng& rng) {
    cfg.validate();
    const int d = cfg.model_dim;
    for (const char* name : {"q", "k", "v", "out"}) {
        store.add(prefix + ".attn." + name + ".w", glorot(d, d, rng));
        store.add(prefix + ".attn." + name + ".b", Matrix::Zero(1, d));
    }
    store.add(prefix + ".attn.ln.g", Matrix::Ones(1, d));
    store.add(prefix + ".attn.ln.b", Matrix::Zero(1, d));
    store.add(prefix + ".ffn.in.w", glorot(d, cfg.ff_dim, rng));
    store.add(prefix + ".ffn.in.b", Matrix::Zero(1, cfg.ff_dim));
    store.add(prefix + ".ffn.out.w", glorot(cfg.ff_dim, d, rng));
    store.add(prefix + ".ffn.out.b", Matrix::Zero(1, d));
    store.add(prefix + ".ffn.ln.g", Matrix::Ones(1, d));
    store.add(prefix + ".ffn.ln.b", Matrix::Zero(1, d));
}

namespace {
Var affine(ad::Tape& tape, const Var& x, ad::ParameterStore& store, const std::string& name) {
    return ad::add_row(ad::matmul(x, tape.param(store.at(name + ".w"))), tape.param(store.at(name + ".b")));
}
}  // namespace

Var encoder_block(ad::Tape& tape, const Var& input, ad::ParameterStore& store, const std::string& prefix,
                  const EncoderBlockConfig& cfg, Mode mode, Rng* rng, AttentionTensors* trace) {
    cfg.validate();
    if (input.cols() != cfg.model_dim)
        throw Error("encoder block expects width " + std::to_string(cfg.model_dim) + ", got " +
                    std::to_string(input.cols()));
    const int head_dim = cfg.model_dim / cfg.num_heads;

    Var q = affine(tape, input, store, prefix + ".attn.q");
    Var k = affine(tape, input, store, prefix + ".attn.k");
    Var v = affine(tape, input, store, prefix + ".attn.v");
    std::vector<Var> heads;
    for (int h = 0; h < cfg.num_heads; ++h) {
        Var qh = ad::slice_cols(q, h * head_dim, head_dim);
        Var kh = ad::slice_cols(k, h * head_dim, head_dim);
        Var vh = ad::slice_cols(v, h * head_dim, head_dim);
        Matrix weights;
        heads.push_back(attention(qh, kh, vh, cfg.scaling, trace ? &weights : nullptr));
        if (trace) {
            trace->queries.push_back(qh.value());
            trace->keys.push_back(kh.value());
            trace->values.push_back(vh.value());
            trace->weights.push_back(std::move(weights));
        }
    }
    Var mha = affine(tape, heads.size() == 1 ? heads[0] : ad::concat_cols(heads), store, prefix + ".attn.out");
    mha = dropout(mha, cfg.dropout, mode, rng);
    Var attended = ad::layer_norm_rows(ad::add(input, mha), tape.param(store.at(prefix + ".attn.ln.g")),
                                       tape.param(store.at(prefix + ".attn.ln.b")), cfg.layer_norm_eps);

    Var ff = affine(tape, activate(affine(tape, attended, store, prefix + ".ffn.in"), cfg.activation), store,
                    prefix + ".ffn.out");
    ff = dropout(ff, cfg.dropout, mode, rng);
    Var out = ad::layer_norm_rows(ad::add(attended, ff), tape.param(store.at(prefix + ".ffn.ln.g")),
                                  tape.param(store.at(prefix + ".ffn.ln.b")), cfg.layer_norm_eps);
    if (trace) {
        trace->self_attention_output = attended.value();
        trace->ffn_output = out.value();
    }
    return out;
}

Matrix encoder_block(const Matrix& input, ad::ParameterStore& store, const std::string& prefix,
                     const EncoderBlockConfig& cfg, AttentionTensors* trace) {
    ad::Tape tape(false);
    return encoder_block(tape, tape.constant(input), store, prefix, cfg, Mode::eval, nullptr, trace).value();
}

// --- Classification head ----------------------------------------------------------

void HeadConfig::validate() const {
    if (dense_units <= 0) throw Error("head dense_units must be positive");
    if (num_classes <= 0) throw Error("head num_classes must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("head dropout must lie in [0, 1)");
}

void add_head_params(ad::ParameterStore& store, const std::string& prefix, int input_dim, const HeadConfig& cfg,
                     Rng& rng) {
    cfg.validate();
    store.add(prefix + ".dense.w", glorot(input_dim, cfg.dense_units, rng));
    store.add(prefix + ".dense.b", Matrix::Zero(1, cfg.dense_units));
    store.add(prefix + ".out.w", glorot(cfg.dense_units, cfg.num_classes, rng));
    store.add(prefix + ".out.b", Matrix::Zero(1, cfg.num_classes));
}

Var head_logits(ad::Tape& tape, const Var& pooled, ad::ParameterStore& store, const std::string& prefix,
                const HeadConfig& cfg, Mode mode, Rng* rng) {
    const auto& w = store.at(prefix + ".dense.w").value;
    if (pooled.cols() != w.rows())
        throw Error("classification head expects width " + std::to_string(w.rows()) + ", got " +
                    std::to_string(pooled.cols()));
    Var hidden = activate(affine(tape, pooled, store, prefix + ".dense"), cfg.activation);
    hidden = dropout(hidden, cfg.dropout, mode, rng);
    return affine(tape, hidden, store, prefix + ".out");
}

Matrix classify_head(const Matrix& pooled, ad::ParameterStore& store, const std::string& prefix, const HeadConfig& cfg,
                     Mode mode, Rng* rng) {
    ad::Tape tape(false);
    return ad::softmax_rows_value(head_logits(tape, tape.constant(pooled), store, prefix, cfg, mode, rng).value());
}

}  // namespace temsa::models
