#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "temsa/models/autodiff.hpp"
#include "temsa/rng.hpp"

namespace temsa::models {

using Matrix = ad::Matrix;

enum class Mode { train, eval };

enum class AttentionScaling {
    /// softmax(Q K^T) V, the literal form.
    unscaled,
    /// softmax(Q K^T / sqrt(d_k)) V, what pretrained encoders use.
    scaled,
};
enum class Activation { relu, gelu };

std::string_view to_string(AttentionScaling s);
AttentionScaling parse_attention_scaling(std::string_view s);
std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

/// Glorot-uniform fan_in x fan_out matrix.
Matrix glorot(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

/// Inverted dropout; identity outside training or when p == 0.
ad::Var dropout(const ad::Var& x, double p, Mode mode, Rng* rng);
ad::Var activate(const ad::Var& x, Activation a);

struct AttentionResult {
    Matrix output;   // T x d_v
    Matrix weights;  // T x T, rows sum to 1
};

/// output_i = sum_j softmax_j(Q_i . K_j * s) V_j with s = 1 or 1/sqrt(d_k).
/// Q and K are T x d_k, V is T x d_v.
AttentionResult self_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                               AttentionScaling scaling = AttentionScaling::unscaled);
/// Differentiable form; `weights_out` receives the attention weights.
ad::Var attention(const ad::Var& q, const ad::Var& k, const ad::Var& v, AttentionScaling scaling,
                  Matrix* weights_out = nullptr);

struct EncoderBlockConfig {
    int model_dim = 768;
    int num_heads = 12;
    int ff_dim = 3072;
    AttentionScaling scaling = AttentionScaling::scaled;
    Activation activation = Activation::gelu;
    double layer_norm_eps = 1e-12;
    double dropout = 0.1;

    void validate() const;
};

/// Intermediate tensors of one encoder block, per head where applicable.
struct AttentionTensors {
    std::vector<Matrix> queries;
    std::vector<Matrix> keys;
    std::vector<Matrix> values;
    std::vector<Matrix> weights;
    Matrix self_attention_output;
    Matrix ffn_output;
};

/// Registers `<prefix>.attn.{q,k,v,out}.{w,b}`, `<prefix>.attn.ln.{g,b}`,
/// `<prefix>.ffn.{in,out}.{w,b}` and `<prefix>.ffn.ln.{g,b}`. Weights act
/// on row vectors (x W + b).
void add_encoder_block_params(ad::ParameterStore& store, const std::string& prefix, const EncoderBlockConfig& cfg,
                              Rng& rng);

/// S = LayerNorm(X + MultiHeadAttention(X)); Y = LayerNorm(S + FeedForward(S)).
ad::Var encoder_block(ad::Tape& tape, const ad::Var& input, ad::ParameterStore& store, const std::string& prefix,
                      const EncoderBlockConfig& cfg, Mode mode = Mode::eval, Rng* rng = nullptr,
                      AttentionTensors* trace = nullptr);
/// Inference form; throws if input is not T x model_dim.
Matrix encoder_block(const Matrix& input, ad::ParameterStore& store, const std::string& prefix,
                     const EncoderBlockConfig& cfg, AttentionTensors* trace = nullptr);

struct HeadConfig {
    int dense_units = 1024;
    Activation activation = Activation::relu;
    double dropout = 0.1;
    int num_classes = 3;

    void validate() const;
};

/// Registers `<prefix>.dense.{w,b}` and `<prefix>.out.{w,b}`.
void add_head_params(ad::ParameterStore& store, const std::string& prefix, int input_dim, const HeadConfig& cfg,
                     Rng& rng);
/// dense -> activation -> dropout -> output logits.
ad::Var head_logits(ad::Tape& tape, const ad::Var& pooled, ad::ParameterStore& store, const std::string& prefix,
                    const HeadConfig& cfg, Mode mode, Rng* rng);
/// Class probabilities for each row of `pooled`.
Matrix classify_head(const Matrix& pooled, ad::ParameterStore& store, const std::string& prefix,
                     const HeadConfig& cfg, Mode mode = Mode::eval, Rng* rng = nullptr);

}  // namespace temsa::models
