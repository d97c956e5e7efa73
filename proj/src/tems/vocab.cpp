#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "temsa/rng.hpp"
#include "temsa/tems.hpp"

namespace temsa::tems {

Vocabulary::Vocabulary() {
    add("<pad>");
    add("<unk>");
    add("<cls>");
    oov_ = 1;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, const std::string& unk_token) {
    if (tokens.empty()) throw Error("vocabulary needs at least a padding token");
    for (const auto& t : tokens) add(t);
    auto it = lookup_.find(unk_token);
    if (it == lookup_.end()) throw Error("vocabulary lacks the unknown token '" + unk_token + "'");
    oov_ = it->second;
    if (oov_ == kPad) throw Error("the unknown token cannot share the padding index");
}

Vocabulary Vocabulary::build(const std::vector<TokenSeq>& corpus, std::size_t min_count) {
    // Frequency-descending, ties alphabetical, so the index map is independent
    // of corpus order.
    std::map<std::string, std::size_t> freq;
    for (const auto& seq : corpus)
        for (const auto& tok : seq) ++freq[tok];
    std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(), freq.end());
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary v;
    for (const auto& [tok, count] : entries)
        if (count >= min_count) v.add(tok);
    return v;
}

Vocabulary Vocabulary::load(const std::string& path, const std::string& unk_token) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vocabulary '" + path + "'");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens), unk_token);
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write vocabulary '" + path + "'");
    for (const auto& t : tokens_) out << t << '\n';
}

int Vocabulary::add(const std::string& token) {
    if (auto it = lookup_.find(token); it != lookup_.end()) return it->second;
    const int idx = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
    lookup_.emplace(token, idx);
    return idx;
}

int Vocabulary::index_of(std::string_view token) const {
    auto it = lookup_.find(std::string(token));
    return it == lookup_.end() ? oov_ : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return lookup_.count(std::string(token)) > 0; }

const std::string& Vocabulary::token_at(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size())
        throw Error("vocabulary index out of range: " + std::to_string(index));
    return tokens_[static_cast<std::size_t>(index)];
}

std::optional<int> Vocabulary::cls() const {
    for (const char* name : {"<cls>", "[CLS]"})
        if (auto it = lookup_.find(name); it != lookup_.end()) return it->second;
    return std::nullopt;
}

std::string Vocabulary::id() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : tokens_) {
        h = fnv1a(t, h);
        h = fnv1a("\n", h);
    }
    return hex64(h);
}

std::size_t EncodedSeq::length() const {
    std::size_t n = 0;
    for (auto m : mask) n += m;
    return n;
}

namespace {
EncodedSeq encode_impl(const TokenSeq& tokens, int max_len, const Vocabulary& vocab, std::optional<int> lead) {
    if (max_len <= 0) throw Error("max_len must be positive");
    EncodedSeq enc;
    enc.indices.assign(static_cast<std::size_t>(max_len), Vocabulary::kPad);
    enc.mask.assign(static_cast<std::size_t>(max_len), 0);
    enc.vocab_id = vocab.id();
    std::size_t pos = 0;
    if (lead) {
        enc.indices[pos] = *lead;
        enc.mask[pos] = 1;
        ++pos;
    }
    for (std::size_t i = 0; i < tokens.size() && pos < enc.indices.size(); ++i, ++pos) {
        enc.indices[pos] = vocab.index_of(tokens[i]);
        enc.mask[pos] = 1;
    }
    return enc;
}
}  // namespace

EncodedSeq encode_pad(const TokenSeq& tokens, int max_len, const Vocabulary& vocab) {
    return encode_impl(tokens, max_len, vocab, std::nullopt);
}

EncodedSeq encode_pad_with_cls(const TokenSeq& tokens, int max_len, const Vocabulary& vocab) {
    auto cls = vocab.cls();
    if (!cls) throw Error("vocabulary has no sequence-start token");
    return encode_impl(tokens, max_len, vocab, cls);
}

TokenSeq decode(const EncodedSeq& encoded, const Vocabulary& vocab) {
    TokenSeq out;
    for (std::size_t i = 0; i < encoded.indices.size(); ++i)
        if (encoded.mask[i]) out.push_back(vocab.token_at(encoded.indices[i]));
    return out;
}

Eigen::MatrixXd random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed, double range) {
    if (dim <= 0) throw Error("embedding dimension must be positive");
    Rng rng(seed);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(vocab.size()), dim);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-range, range);
    m.row(Vocabulary::kPad).setZero();
    return m;
}

Eigen::MatrixXd load_embeddings(const Vocabulary& vocab, const std::string& table_path,
                                const EmbeddingOptions& options) {
    std::ifstream in(table_path);
    if (!in) throw Error("cannot open embedding table '" + table_path + "'");

    int dim = options.dim;
    std::vector<std::pair<int, std::vector<double>>> found;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string token;
        fields >> token;
        std::vector<double> values;
        std::string cell;
        while (fields >> cell) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error("embedding table line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
        }
        // word2vec-style "count dim" header
        if (line_no == 1 && values.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos)
            continue;
        if (dim == 0) dim = static_cast<int>(values.size());
        if (static_cast<int>(values.size()) != dim)
            throw Error("embedding table line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " values, got " + std::to_string(values.size()));
        if (vocab.contains(token)) {
            const int idx = vocab.index_of(token);
            if (idx != Vocabulary::kPad) found.emplace_back(idx, std::move(values));
        }
    }
    if (dim <= 0) throw Error("embedding table '" + table_path + "' is empty");

    Eigen::MatrixXd m = random_embeddings(vocab, dim, options.seed, options.oov_range);
    for (const auto& [idx, values] : found)
        for (int c = 0; c < dim; ++c) m(idx, c) = values[static_cast<std::size_t>(c)];
    return m;
}

}  // namespace temsa::tems
