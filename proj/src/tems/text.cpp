#include <cctype>
#include <fstream>

#include "temsa/tems.hpp"

namespace temsa::tems {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_ascii_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_ascii_space(s[i])) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

bool is_email(std::string_view token) {
    const auto at = token.find('@');
    return at != std::string_view::npos && token.find('.', at + 1) != std::string_view::npos;
}

bool is_tag(std::string_view token) {
    std::size_t i = 0;
    while (i < token.size() && !is_alnum(token[i]) && token[i] != '@' && token[i] != '#') ++i;
    return i < token.size() && (token[i] == '@' || token[i] == '#');
}

// Keeps an apostrophe only when both neighbours are alphanumeric.
void append_word(std::string& out, std::string_view word) {
    std::string kept;
    for (std::size_t i = 0; i < word.size(); ++i) {
        const char c = word[i];
        if (c != '\'') {
            kept.push_back(c);
            continue;
        }
        if (i > 0 && is_alnum(word[i - 1]) && i + 1 < word.size() && is_alnum(word[i + 1])) kept.push_back(c);
    }
    if (kept.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += kept;
}

}  // namespace

std::string clean_text(std::string_view raw) {
    // Right single quotation mark reads as an apostrophe.
    std::string normalized;
    normalized.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i + 2 < raw.size() && static_cast<unsigned char>(raw[i]) == 0xE2 &&
            static_cast<unsigned char>(raw[i + 1]) == 0x80 && static_cast<unsigned char>(raw[i + 2]) == 0x99) {
            normalized.push_back('\'');
            i += 2;
        } else {
            normalized.push_back(raw[i]);
        }
    }

    std::string out;
    for (auto token : split_whitespace(normalized)) {
        if (is_email(token) || is_tag(token)) continue;
        std::string word;
        for (char c : token) {
            const auto u = static_cast<unsigned char>(c);
            if (u >= 0x80) continue;
            if (is_alnum(c)) {
                word.push_back(static_cast<char>(std::tolower(u)));
            } else if (c == '\'') {
                word.push_back(c);
            } else {
                append_word(out, word);
                word.clear();
            }
        }
        append_word(out, word);
    }
    return out;
}

TokenSeq tokenize(std::string_view cleaned, TokenScheme scheme, const TokenizerAdapter* adapter) {
    if (scheme == TokenScheme::wordpiece) {
        if (!adapter) throw Error("wordpiece tokenization needs a tokenizer adapter");
        return adapter->tokenize(cleaned);
    }
    TokenSeq out;
    for (auto piece : split_whitespace(cleaned)) out.emplace_back(piece);
    return out;
}

// --- WordPiece ----------------------------------------------------------------

WordpieceTokenizer::WordpieceTokenizer(std::vector<std::string> vocab, std::string unk_token,
                                       std::size_t max_chars_per_word)
    : vocab_(std::move(vocab)), unk_(std::move(unk_token)), max_chars_(max_chars_per_word) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) lookup_.emplace(vocab_[i], static_cast<int>(i));
    if (!lookup_.count(unk_)) throw Error("wordpiece vocabulary lacks the unknown token '" + unk_ + "'");
}

WordpieceTokenizer WordpieceTokenizer::from_file(const std::string& vocab_path) {
    std::ifstream in(vocab_path);
    if (!in) throw Error("cannot open wordpiece vocabulary '" + vocab_path + "'");
    std::vector<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        vocab.push_back(line);
    }
    return WordpieceTokenizer(std::move(vocab));
}

TokenSeq WordpieceTokenizer::tokenize(std::string_view cleaned) const {
    // Basic pre-split: whitespace, then punctuation becomes its own piece.
    std::vector<std::string> words;
    for (auto chunk : split_whitespace(cleaned)) {
        std::string current;
        for (char c : chunk) {
            if (std::ispunct(static_cast<unsigned char>(c))) {
                if (!current.empty()) words.push_back(std::move(current));
                current.clear();
                words.emplace_back(1, c);
            } else {
                current.push_back(c);
            }
        }
        if (!current.empty()) words.push_back(std::move(current));
    }

    TokenSeq out;
    for (const auto& word : words) {
        if (word.size() > max_chars_) {
            out.push_back(unk_);
            continue;
        }
        TokenSeq pieces;
        std::size_t start = 0;
        bool bad = false;
        while (start < word.size()) {
            std::size_t end = word.size();
            std::string match;
            while (start < end) {
                std::string candidate = word.substr(start, end - start);
                if (start > 0) candidate = "##" + candidate;
                if (lookup_.count(candidate)) {
                    match = std::move(candidate);
                    break;
                }
                --end;
            }
            if (match.empty()) {
                bad = true;
                break;
            }
            pieces.push_back(std::move(match));
            start = end;
        }
        if (bad)
            out.push_back(unk_);
        else
            out.insert(out.end(), pieces.begin(), pieces.end());
    }
    return out;
}

// --- TEMS -----------------------------------------------------------------------

LengthPolicy LengthPolicy::for_dataset(std::string_view dataset) {
    if (dataset == "simpson") return simpson();
    if (dataset == "mvsa") return mvsa();
    throw Error("no length policy for dataset '" + std::string(dataset) + "' (expected simpson|mvsa)");
}

void LengthPolicy::validate() const {
    if (text_max <= 0) throw Error("text_max must be positive");
    if (max_objects < 0) throw Error("max_objects must be non-negative");
}

TemsSequence build_tems(const TokenSeq& text_tokens, const detect::ObjectNameList& names, const LengthPolicy& policy) {
    policy.validate();
    TemsSequence seq;
    const auto n_text = std::min(text_tokens.size(), static_cast<std::size_t>(policy.text_max));
    seq.text_part.assign(text_tokens.begin(), text_tokens.begin() + static_cast<std::ptrdiff_t>(n_text));
    const auto n_obj = std::min(names.size(), static_cast<std::size_t>(policy.max_objects));
    for (std::size_t i = 0; i < n_obj; ++i) {
        auto name = detect::normalize_object_name(names[i]);
        if (!name.empty()) seq.object_part.push_back(std::move(name));
    }
    seq.combined = seq.text_part;
    seq.combined.insert(seq.combined.end(), seq.object_part.begin(), seq.object_part.end());
    return seq;
}

}  // namespace temsa::tems
