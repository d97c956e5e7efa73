#include "temsa/models/bilstm.hpp"

#include <cmath>

#include "temsa/common.hpp"
#include "temsa/tems.hpp"

namespace temsa::models {

using ad::Var;
using nlohmann::json;

void BiLstmConfig::validate() const {
    if (vocab_size <= 0) throw Error("bilstm vocab_size must be positive");
    if (hidden_units <= 0) throw Error("bilstm hidden_units must be positive");
    if (embed_dim <= 0) throw Error("bilstm embed_dim must be positive");
    if (num_classes <= 0) throw Error("bilstm num_classes must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("bilstm dropout must lie in [0, 1)");
}

json BiLstmConfig::to_json() const {
    return {{"vocab_size", vocab_size},   {"hidden_units", hidden_units}, {"embed_dim", embed_dim},
            {"num_classes", num_classes}, {"dropout", dropout},           {"freeze_embeddings", freeze_embeddings}};
}

BiLstmConfig BiLstmConfig::from_json(const json& j) {
    BiLstmConfig c;
    c.vocab_size = j.at("vocab_size").get<int>();
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.dropout = j.value("dropout", c.dropout);
    c.freeze_embeddings = j.value("freeze_embeddings", c.freeze_embeddings);
    c.validate();
    return c;
}

BiLstmClassifier::BiLstmClassifier(BiLstmConfig cfg, std::uint64_t seed, const Matrix* embeddings)
    : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    const int v = cfg_.vocab_size, e = cfg_.embed_dim, h = cfg_.hidden_units;
    Matrix table;
    if (embeddings) {
        if (embeddings->rows() != v || embeddings->cols() != e)
            throw Error("embedding matrix is " + std::to_string(embeddings->rows()) + "x" +
                        std::to_string(embeddings->cols()) + ", expected " + std::to_string(v) + "x" +
                        std::to_string(e));
        table = *embeddings;
    } else {
        table = Matrix(v, e);
        for (Eigen::Index r = 0; r < table.rows(); ++r)
            for (Eigen::Index c = 0; c < table.cols(); ++c) table(r, c) = r == 0 ? 0.0 : rng.uniform(-0.05, 0.05);
    }
    params_.add("embedding", std::move(table), !cfg_.freeze_embeddings);
    for (const char* dir : {"fwd", "bwd"}) {
        const std::string p = std::string("lstm.") + dir;
        params_.add(p + ".w", glorot(e, 4 * h, rng));
        params_.add(p + ".u", glorot(h, 4 * h, rng));
        Matrix bias = Matrix::Zero(1, 4 * h);
        bias.middleCols(h, h).setOnes();  // forget gate starts open
        params_.add(p + ".b", std::move(bias));
    }
    params_.add("out.w", glorot(2 * h, cfg_.num_classes, rng));
    params_.add("out.b", Matrix::Zero(1, cfg_.num_classes));
}

namespace {

struct Cell {
    Var h, c;
};

Cell lstm_step(const Var& x, const Cell& prev, const Var& w, const Var& u, const Var& b, int hidden) {
    Var z = ad::add_row(ad::add(ad::matmul(x, w), ad::matmul(prev.h, u)), b);
    Var i = ad::sigmoid(ad::slice_cols(z, 0, hidden));
    Var f = ad::sigmoid(ad::slice_cols(z, hidden, hidden));
    Var g = ad::tanh(ad::slice_cols(z, 2 * hidden, hidden));
    Var o = ad::sigmoid(ad::slice_cols(z, 3 * hidden, hidden));
    Var c = ad::add(ad::mul(f, prev.c), ad::mul(i, g));
    return {ad::mul(o, ad::tanh(c)), c};
}

}  // namespace

Var BiLstmClassifier::pooled(ad::Tape& tape, std::span<const Example* const> batch) {
    if (batch.empty()) throw Error("empty batch");
    const std::size_t len = batch.front()->indices.size();
    if (len == 0) throw Error("bilstm input sequences are empty");
    for (const Example* ex : batch)
        if (ex->indices.size() != len)
            throw Error("inconsistent max_len in batch (" + std::to_string(len) + " vs " +
                        std::to_string(ex->indices.size()) + ")");
    const int b = static_cast<int>(batch.size()), h = cfg_.hidden_units;
    const int steps = static_cast<int>(len);

    // Time-major gather: row t*B + j is token t of example j.
    std::vector<int> rows;
    rows.reserve(len * batch.size());
    for (int t = 0; t < steps; ++t)
        for (const Example* ex : batch) rows.push_back(ex->indices[static_cast<std::size_t>(t)]);
    Var emb = ad::gather_rows(tape.param(params_.at("embedding")), rows);

    // A step is live for an example while t is before its first padding index.
    std::vector<int> lengths;
    for (const Example* ex : batch) {
        int n = 0;
        while (n < steps && ex->indices[static_cast<std::size_t>(n)] != tems::Vocabulary::kPad) ++n;
        lengths.push_back(n);
    }
    auto mask_at = [&](int t) {
        Matrix m(b, h);
        for (int j = 0; j < b; ++j) m.row(j).setConstant(t < lengths[static_cast<std::size_t>(j)] ? 1.0 : 0.0);
        return m;
    };

    auto run = [&](const char* dir, bool reverse) {
        const std::string p = std::string("lstm.") + dir;
        Var w = tape.param(params_.at(p + ".w")), u = tape.param(params_.at(p + ".u")),
            bias = tape.param(params_.at(p + ".b"));
        Cell state{tape.constant(Matrix::Zero(b, h)), tape.constant(Matrix::Zero(b, h))};
        for (int k = 0; k < steps; ++k) {
            const int t = reverse ? steps - 1 - k : k;
            Cell next = lstm_step(ad::slice_rows(emb, t * b, b), state, w, u, bias, h);
            const Matrix m = mask_at(t);
            state = {ad::blend(m, next.h, state.h), ad::blend(m, next.c, state.c)};
        }
        return state.h;
    };
    Var forward_final = run("fwd", false);
    Var backward_final = run("bwd", true);
    return ad::concat_cols({backward_final, forward_final});
}

Var BiLstmClassifier::logits(ad::Tape& tape, std::span<const Example* const> batch, Mode mode, Rng* rng) {
    Var summary = dropout(pooled(tape, batch), cfg_.dropout, mode, rng);
    return ad::add_row(ad::matmul(summary, tape.param(params_.at("out.w"))), tape.param(params_.at("out.b")));
}

BiLstmState BiLstmClassifier::trace(const std::vector<int>& indices) const {
    std::size_t n = 0;
    while (n < indices.size() && indices[n] != tems::Vocabulary::kPad) ++n;
    const auto& table = params_.at("embedding").value;
    for (std::size_t i = 0; i < n; ++i)
        if (indices[i] < 0 || indices[i] >= table.rows())
            throw Error("token index " + std::to_string(indices[i]) + " outside vocabulary of size " +
                        std::to_string(table.rows()));
    const int h = cfg_.hidden_units;
    auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    auto run = [&](const char* dir, bool reverse) {
        const std::string p = std::string("lstm.") + dir;
        const Matrix& w = params_.at(p + ".w").value;
        const Matrix& u = params_.at(p + ".u").value;
        const Matrix& bias = params_.at(p + ".b").value;
        std::vector<Eigen::VectorXd> hs(n);
        Eigen::RowVectorXd hv = Eigen::RowVectorXd::Zero(h), cv = Eigen::RowVectorXd::Zero(h);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t t = reverse ? n - 1 - k : k;
            Eigen::RowVectorXd z = table.row(indices[t]) * w + hv * u + bias;
            for (int j = 0; j < h; ++j) {
                const double ig = sig(z(j)), fg = sig(z(h + j)), gg = std::tanh(z(2 * h + j)), og = sig(z(3 * h + j));
                cv(j) = fg * cv(j) + ig * gg;
                hv(j) = og * std::tanh(cv(j));
            }
            hs[t] = hv.transpose();
        }
        return hs;
    };
    BiLstmState s;
    s.forward = run("fwd", false);
    s.backward = run("bwd", true);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd c(2 * h);
        c << s.backward[i], s.forward[i];
        s.contexts.push_back(std::move(c));
    }
    return s;
}

}  // namespace temsa::models
