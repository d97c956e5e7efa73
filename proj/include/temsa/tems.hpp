#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "temsa/common.hpp"
#include "temsa/detect.hpp"

namespace temsa::tems {

/// Lowercase tokens without whitespace; no empty entries.
using TokenSeq = std::vector<std::string>;

/// Removes emails and @/# tags, replaces every other non-alphanumeric
/// character with a space (apostrophes survive only between alphanumerics),
/// lowercases and collapses whitespace. Non-ASCII characters are dropped,
/// except that U+2019 is read as an apostrophe. Idempotent.
std::string clean_text(std::string_view raw);

/// Subword tokenizer owned by a pretrained encoder. One instance per worker.
class TokenizerAdapter {
public:
    virtual ~TokenizerAdapter() = default;
    virtual TokenSeq tokenize(std::string_view cleaned) const = 0;
};

/// Greedy longest-match-first WordPiece over a BERT-style vocab.txt.
class WordpieceTokenizer final : public TokenizerAdapter {
public:
    explicit WordpieceTokenizer(std::vector<std::string> vocab, std::string unk_token = "[UNK]",
                                std::size_t max_chars_per_word = 100);
    static WordpieceTokenizer from_file(const std::string& vocab_path);

    TokenSeq tokenize(std::string_view cleaned) const override;
    const std::vector<std::string>& vocab() const { return vocab_; }

private:
    std::vector<std::string> vocab_;
    std::unordered_map<std::string, int> lookup_;
    std::string unk_;
    std::size_t max_chars_;
};

enum class TokenScheme { whitespace, wordpiece };

/// Whitespace scheme splits on runs of spaces. Wordpiece delegates to the
/// adapter, which must be supplied.
TokenSeq tokenize(std::string_view cleaned, TokenScheme scheme = TokenScheme::whitespace,
                  const TokenizerAdapter* adapter = nullptr);

/// Length budget. The TEMS budget is additive: tems_max = text_max + max_objects.
struct LengthPolicy {
    int text_max = 55;
    int max_objects = 20;

    int tems_max() const { return text_max + max_objects; }

    static LengthPolicy simpson() { return {55, 20}; }
    static LengthPolicy mvsa() { return {21, 20}; }
    /// `simpson` or `mvsa`.
    static LengthPolicy for_dataset(std::string_view dataset);
    void validate() const;
};

struct TemsSequence {
    TokenSeq text_part;
    TokenSeq object_part;
    TokenSeq combined;
};

/// Truncates the text to text_max, keeps the first max_objects names, and
/// concatenates text then names.
TemsSequence build_tems(const TokenSeq& text_tokens, const detect::ObjectNameList& names,
                        const LengthPolicy& policy);

/// Token <-> index map. Index 0 is always padding.
class Vocabulary {
public:
    static constexpr int kPad = 0;

    /// Fresh vocabulary with <pad>=0, <unk>=1, <cls>=2.
    Vocabulary();
    /// Wraps an existing token list (e.g. a pretrained vocab.txt). tokens[0]
    /// is the padding token; `unk_token` must be present.
    Vocabulary(std::vector<std::string> tokens, const std::string& unk_token);

    static Vocabulary build(const std::vector<TokenSeq>& corpus, std::size_t min_count = 1);
    static Vocabulary load(const std::string& path, const std::string& unk_token = "<unk>");
    void save(const std::string& path) const;

    int add(const std::string& token);
    int index_of(std::string_view token) const;  // oov() when unknown
    bool contains(std::string_view token) const;
    const std::string& token_at(int index) const;
    int oov() const { return oov_; }
    /// Index of the sequence-start token, if the vocabulary has one.
    std::optional<int> cls() const;
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    /// Content hash; identifies the vocabulary an encoding was made with.
    std::string id() const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> lookup_;
    int oov_ = 1;
};

/// Fixed-length encoding; padding (0) only at the tail.
struct EncodedSeq {
    std::vector<int> indices;
    std::vector<std::uint8_t> mask;
    std::string vocab_id;

    std::size_t length() const;  // number of real tokens
};

/// Maps the first max_len tokens to indices; the rest of the array is 0.
EncodedSeq encode_pad(const TokenSeq& tokens, int max_len, const Vocabulary& vocab);
/// Same, with the vocabulary's sequence-start token prepended (encoder input).
EncodedSeq encode_pad_with_cls(const TokenSeq& tokens, int max_len, const Vocabulary& vocab);
TokenSeq decode(const EncodedSeq& encoded, const Vocabulary& vocab);

struct EmbeddingOptions {
    std::uint64_t seed = 0;
    double oov_range = 0.05;
    /// Expected width; 0 accepts whatever the file uses.
    int dim = 0;
};

inline constexpr int kGloveDim = 300;
inline constexpr int kEncoderDim = 768;

/// Builds a |vocab| x dim matrix from a `token f1 ... fd` text table. Rows of
/// tokens absent from the table are uniform in [-oov_range, oov_range]; the
/// padding row is zero. A line whose width disagrees throws with its number.
Eigen::MatrixXd load_embeddings(const Vocabulary& vocab, const std::string& table_path,
                                const EmbeddingOptions& options = {});
/// Table-free initialisation: every non-padding row uniform in [-range, range].
Eigen::MatrixXd random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed, double range = 0.05);

}  // namespace temsa::tems
