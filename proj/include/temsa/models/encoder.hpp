#pragma once

#include "temsa/models/classifier.hpp"

namespace temsa::models {

/// BERT-style encoder layout. base() is the 12-layer, 768-wide shape.
struct EncoderConfig {
    int vocab_size = 30522;
    int model_dim = 768;
    int num_heads = 12;
    int num_layers = 12;
    int ff_dim = 3072;
    int max_positions = 512;
    int type_vocab_size = 2;
    AttentionScaling scaling = AttentionScaling::scaled;
    double layer_norm_eps = 1e-12;
    double dropout = 0.1;
    HeadConfig head{1024, Activation::relu, 0.1, 3};

    static EncoderConfig base(int vocab_size = 30522);
    /// Small shape for tests and desk runs.
    static EncoderConfig tiny(int vocab_size);

    EncoderBlockConfig block() const;
    void validate() const;
    nlohmann::json to_json() const;
    static EncoderConfig from_json(const nlohmann::json& j);
};

/// Pretrained-encoder adapter: exposes token states and the pooled output.
/// Parameters are registered under `encoder.`: `word_emb`, `pos_emb`,
/// `type_emb`, `emb_ln.{g,b}`, `layer<i>.*` (see add_encoder_block_params)
/// and `pooler.{w,b}`.
class TransformerEncoder {
public:
    TransformerEncoder(const EncoderConfig& cfg, ad::ParameterStore& store, Rng& rng);

    /// T x model_dim states for the real tokens of one sequence.
    ad::Var token_states(ad::Tape& tape, const std::vector<int>& indices, Mode mode, Rng* rng,
                         std::vector<AttentionTensors>* traces = nullptr) const;
    /// tanh(dense(state of the first token)).
    ad::Var pooled(ad::Tape& tape, const ad::Var& states) const;

private:
    EncoderConfig cfg_;
    ad::ParameterStore* store_;
};

/// Encoder + classification head (`head.dense`, `head.out`). The encoder is
/// fine-tuned along with the head unless frozen via params().set_trainable.
class EncoderClassifier final : public Classifier {
public:
    EncoderClassifier(EncoderConfig cfg, std::uint64_t seed);

    std::string kind() const override { return "encoder"; }
    nlohmann::json config() const override { return cfg_.to_json(); }
    ad::Var logits(ad::Tape& tape, std::span<const Example* const> batch, Mode mode, Rng* rng) override;

    const TransformerEncoder& encoder() const { return encoder_; }
    const EncoderConfig& cfg() const { return cfg_; }

private:
    EncoderConfig cfg_;
    Rng init_rng_;
    TransformerEncoder encoder_;
};

}  // namespace temsa::models
