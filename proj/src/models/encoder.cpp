#include "temsa/models/encoder.hpp"

#include "temsa/common.hpp"
#include "temsa/tems.hpp"

namespace temsa::models {

using ad::Var;
using nlohmann::json;

EncoderConfig EncoderConfig::base(int vocab_size) {
    EncoderConfig c;
    c.vocab_size = vocab_size;
    return c;
}

EncoderConfig EncoderConfig::tiny(int vocab_size) {
    EncoderConfig c;
    c.vocab_size = vocab_size;
    c.model_dim = 32;
    c.num_heads = 4;
    c.num_layers = 2;
    c.ff_dim = 64;
    c.max_positions = 128;
    c.head.dense_units = 64;
    return c;
}

EncoderBlockConfig EncoderConfig::block() const {
    return {model_dim, num_heads, ff_dim, scaling, Activation::gelu, layer_norm_eps, dropout};
}

void EncoderConfig::validate() const {
    if (vocab_size <= 0) throw Error("encoder vocab_size must be positive");
    if (num_layers <= 0) throw Error("encoder num_layers must be positive");
    if (max_positions <= 0 || type_vocab_size <= 0) throw Error("encoder position/type table sizes must be positive");
    block().validate();
    head.validate();
}

json EncoderConfig::to_json() const {
    return {{"vocab_size", vocab_size},
            {"model_dim", model_dim},
            {"num_heads", num_heads},
            {"num_layers", num_layers},
            {"ff_dim", ff_dim},
            {"max_positions", max_positions},
            {"type_vocab_size", type_vocab_size},
            {"scaling", std::string(to_string(scaling))},
            {"layer_norm_eps", layer_norm_eps},
            {"dropout", dropout},
            {"head",
             {{"dense_units", head.dense_units},
              {"activation", std::string(to_string(head.activation))},
              {"dropout", head.dropout},
              {"num_classes", head.num_classes}}}};
}

EncoderConfig EncoderConfig::from_json(const json& j) {
    EncoderConfig c;
    c.vocab_size = j.at("vocab_size").get<int>();
    c.model_dim = j.value("model_dim", c.model_dim);
    c.num_heads = j.value("num_heads", c.num_heads);
    c.num_layers = j.value("num_layers", c.num_layers);
    c.ff_dim = j.value("ff_dim", c.ff_dim);
    c.max_positions = j.value("max_positions", c.max_positions);
    c.type_vocab_size = j.value("type_vocab_size", c.type_vocab_size);
    c.scaling = parse_attention_scaling(j.value("scaling", std::string("scaled")));
    c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
    c.dropout = j.value("dropout", c.dropout);
    if (j.contains("head")) {
        const auto& h = j.at("head");
        c.head.dense_units = h.value("dense_units", c.head.dense_units);
        c.head.activation = parse_activation(h.value("activation", std::string("relu")));
        c.head.dropout = h.value("dropout", c.head.dropout);
        c.head.num_classes = h.value("num_classes", c.head.num_classes);
    }
    c.validate();
    return c;
}

TransformerEncoder::TransformerEncoder(const EncoderConfig& cfg, ad::ParameterStore& store, Rng& rng)
    : cfg_(cfg), store_(&store) {
    cfg_.validate();
    const int d = cfg_.model_dim;
    auto normal_table = [&](int rows) {
        Matrix m(rows, d);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = 0.02 * rng.normal();
        return m;
    };
    store.add("encoder.word_emb", normal_table(cfg_.vocab_size));
    store.add("encoder.pos_emb", normal_table(cfg_.max_positions));
    store.add("encoder.type_emb", normal_table(cfg_.type_vocab_size));
    store.add("encoder.emb_ln.g", Matrix::Ones(1, d));
    store.add("encoder.emb_ln.b", Matrix::Zero(1, d));
    for (int l = 0; l < cfg_.num_layers; ++l)
        add_encoder_block_params(store, "encoder.layer" + std::to_string(l), cfg_.block(), rng);
    store.add("encoder.pooler.w", glorot(d, d, rng));
    store.add("encoder.pooler.b", Matrix::Zero(1, d));
}

Var TransformerEncoder::token_states(ad::Tape& tape, const std::vector<int>& indices, Mode mode, Rng* rng,
                                     std::vector<AttentionTensors>* traces) const {
    std::vector<int> real;
    for (int idx : indices) {
        if (idx == tems::Vocabulary::kPad) break;
        real.push_back(idx);
    }
    if (real.empty()) throw Error("encoder input has no tokens");
    if (static_cast<int>(real.size()) > cfg_.max_positions)
        throw Error("sequence of " + std::to_string(real.size()) + " tokens exceeds max_positions " +
                    std::to_string(cfg_.max_positions));
    std::vector<int> positions(real.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
    std::vector<int> types(real.size(), 0);

    Var x = ad::add(ad::gather_rows(tape.param(store_->at("encoder.word_emb")), real),
                    ad::gather_rows(tape.param(store_->at("encoder.pos_emb")), positions));
    x = ad::add(x, ad::gather_rows(tape.param(store_->at("encoder.type_emb")), types));
    x = ad::layer_norm_rows(x, tape.param(store_->at("encoder.emb_ln.g")), tape.param(store_->at("encoder.emb_ln.b")),
                            cfg_.layer_norm_eps);
    x = dropout(x, cfg_.dropout, mode, rng);
    const auto block = cfg_.block();
    for (int l = 0; l < cfg_.num_layers; ++l) {
        AttentionTensors trace;
        x = encoder_block(tape, x, *store_, "encoder.layer" + std::to_string(l), block, mode, rng,
                          traces ? &trace : nullptr);
        if (traces) traces->push_back(std::move(trace));
    }
    return x;
}

Var TransformerEncoder::pooled(ad::Tape& tape, const Var& states) const {
    Var first = ad::slice_rows(states, 0, 1);
    return ad::tanh(ad::add_row(ad::matmul(first, tape.param(store_->at("encoder.pooler.w"))),
                                tape.param(store_->at("encoder.pooler.b"))));
}

EncoderClassifier::EncoderClassifier(EncoderConfig cfg, std::uint64_t seed)
    : cfg_(cfg), init_rng_(seed), encoder_(cfg_, params_, init_rng_) {
    add_head_params(params_, "head", cfg_.model_dim, cfg_.head, init_rng_);
}

Var EncoderClassifier::logits(ad::Tape& tape, std::span<const Example* const> batch, Mode mode, Rng* rng) {
    if (batch.empty()) throw Error("empty batch");
    std::vector<Var> pooled;
    pooled.reserve(batch.size());
    for (const Example* ex : batch) pooled.push_back(encoder_.pooled(tape, encoder_.token_states(tape, ex->indices, mode, rng)));
    Var rows = pooled.size() == 1 ? pooled[0] : ad::concat_rows(pooled);
    return head_logits(tape, rows, params_, "head", cfg_.head, mode, rng);
}

}  // namespace temsa::models
