#pragma once

#include <optional>

#include "temsa/models/classifier.hpp"

namespace temsa::models {

struct BiLstmConfig {
    int vocab_size = 0;
    int hidden_units = 32;
    int embed_dim = 300;
    int num_classes = 3;
    double dropout = 0.1;
    bool freeze_embeddings = false;

    void validate() const;
    nlohmann::json to_json() const;
    static BiLstmConfig from_json(const nlohmann::json& j);
};

/// Per-position states of one sequence. contexts[i] = [backward[i] ; forward[i]].
struct BiLstmState {
    std::vector<Eigen::VectorXd> forward;
    std::vector<Eigen::VectorXd> backward;
    std::vector<Eigen::VectorXd> contexts;
};

/// Embedding -> forward and backward LSTM -> [final backward h ; final
/// forward h] -> dropout -> dense -> softmax.
///
/// Parameters: `embedding` (V x E), `lstm.{fwd,bwd}.{w,u,b}` with gate
/// blocks ordered input, forget, candidate, output, and `out.{w,b}`.
/// Padding (index 0) sits at the tail and leaves the recurrent state untouched.
class BiLstmClassifier final : public Classifier {
public:
    /// `embeddings`, when given, must be vocab_size x embed_dim.
    BiLstmClassifier(BiLstmConfig cfg, std::uint64_t seed, const Matrix* embeddings = nullptr);

    std::string kind() const override { return "bilstm"; }
    nlohmann::json config() const override { return cfg_.to_json(); }
    ad::Var logits(ad::Tape& tape, std::span<const Example* const> batch, Mode mode, Rng* rng) override;

    /// Pooled sequence summaries (batch x 2H) before dropout.
    ad::Var pooled(ad::Tape& tape, std::span<const Example* const> batch);
    /// Full state trace for one sequence; trailing padding is ignored.
    BiLstmState trace(const std::vector<int>& indices) const;

    const BiLstmConfig& cfg() const { return cfg_; }

private:
    BiLstmConfig cfg_;
};

}  // namespace temsa::models
