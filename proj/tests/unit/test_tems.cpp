#include <doctest.h>

#include <cctype>

#include "temsa/rng.hpp"
#include "temsa/tems.hpp"
#include "test_support.hpp"

using namespace temsa;
using namespace temsa::tems;

namespace {

std::string random_raw(Rng& rng) {
    static const std::string alphabet =
        "abcXYZ019 '\"@#.,!?-_:/\\()[]{}\t\n" "\xc3\xa9" "\xe2\x80\x99";
    std::string s;
    const auto n = rng.below(40);
    for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[rng.below(alphabet.size())]);
    return s;
}

TokenSeq words(std::initializer_list<const char*> list) { return TokenSeq(list.begin(), list.end()); }

}  // namespace

TEST_SUITE("tems") {

TEST_CASE("clean_text rules") {
    CHECK(clean_text("Families belong together") == "families belong together");
    CHECK(clean_text("email me a@b.com #now!!!") == "email me");
    CHECK(clean_text("  @user   thanks,  friend!! ") == "thanks friend");
    CHECK(clean_text("don't 'quote' rock'n'roll ''") == "don't quote rock'n'roll");
    CHECK(clean_text("it\xe2\x80\x99s fine") == "it's fine");
    CHECK(clean_text("well-being (#tag)") == "well being");
    CHECK(clean_text("caf\xc3\xa9 OK") == "caf ok");
    CHECK(clean_text("") == "");
}

TEST_CASE("clean_text is idempotent and never emits uppercase") {
    Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
        const auto raw = random_raw(rng);
        const auto once = clean_text(raw);
        CHECK(clean_text(once) == once);
        for (char c : once) CHECK_FALSE(std::isupper(static_cast<unsigned char>(c)));
        CHECK(once.find("  ") == std::string::npos);
    }
}

TEST_CASE("whitespace tokenization") {
    CHECK(tokenize("the bucket list bora bora") == words({"the", "bucket", "list", "bora", "bora"}));
    CHECK(tokenize("").empty());
    CHECK(tokenize("  a   b ") == words({"a", "b"}));

    Rng rng(4);
    for (int i = 0; i < 300; ++i) {
        const auto cleaned = clean_text(random_raw(rng));
        const auto toks = tokenize(cleaned);
        std::string joined;
        for (std::size_t k = 0; k < toks.size(); ++k) joined += (k ? " " : "") + toks[k];
        CHECK(joined == cleaned);
        for (const auto& t : toks) {
            CHECK_FALSE(t.empty());
            CHECK(t.find(' ') == std::string::npos);
        }
    }
}

TEST_CASE("wordpiece adapter") {
    WordpieceTokenizer wp({"[PAD]", "[UNK]", "[CLS]", "un", "##aff", "##able", "the", "'", "s", "it"});
    CHECK(wp.tokenize("the unaffable") == words({"the", "un", "##aff", "##able"}));
    CHECK(wp.tokenize("it's xyz") == words({"it", "'", "s", "[UNK]"}));
    CHECK(tokenize("the", TokenScheme::wordpiece, &wp) == words({"the"}));
    CHECK_THROWS_AS(tokenize("the", TokenScheme::wordpiece, nullptr), Error);
    CHECK_THROWS_AS(WordpieceTokenizer({"a", "b"}), Error);
}

TEST_CASE("build_tems on the three captioned examples") {
    const auto policy = LengthPolicy::simpson();
    struct Row {
        const char* text;
        detect::ObjectNameList names;
        TokenSeq expected;
    };
    const std::vector<Row> rows = {
        {"the kid genin",
         {"man", "hat", "head", "flag", "woman", "arm", "person"},
         words({"the", "kid", "genin", "man", "hat", "head", "flag", "woman", "arm", "person"})},
        {"Families belong together",
         {"person", "person", "hair", "head", "chair"},
         words({"families", "belong", "together", "person", "person", "hair", "head", "chair"})},
        {"the bucket list bora bora",
         {"tree", "water", "roof", "plant", "sky", "sky", "wall", "building", "house"},
         words({"the", "bucket", "list", "bora", "bora", "tree", "water", "roof", "plant", "sky", "sky", "wall",
                "building", "house"})},
    };
    for (const auto& row : rows) {
        auto seq = build_tems(tokenize(clean_text(row.text)), row.names, policy);
        CHECK(seq.combined == row.expected);
        CHECK(seq.object_part == TokenSeq(row.names.begin(), row.names.end()));
    }
}

TEST_CASE("build_tems caps and truncation") {
    const auto policy = LengthPolicy::simpson();
    auto text = words({"a", "b"});
    CHECK(build_tems(text, {}, policy).combined == text);

    detect::ObjectNameList thirty;
    for (int i = 0; i < 30; ++i) thirty.push_back("n" + std::to_string(i));
    auto seq = build_tems(text, thirty, policy);
    REQUIRE(seq.object_part.size() == 20);
    CHECK(seq.object_part.front() == "n0");
    CHECK(seq.object_part.back() == "n19");

    TokenSeq long_text;
    for (int i = 0; i < 80; ++i) long_text.push_back("w" + std::to_string(i));
    auto truncated = build_tems(long_text, thirty, LengthPolicy::mvsa());
    CHECK(truncated.text_part.size() == 21);
    CHECK(truncated.text_part.back() == "w20");
    CHECK(truncated.combined.size() == 41);

    CHECK(LengthPolicy::simpson().tems_max() == 75);
    CHECK(LengthPolicy::mvsa().tems_max() == 41);
    CHECK_THROWS_AS(LengthPolicy::for_dataset("imdb"), Error);
    CHECK_THROWS_AS(build_tems(text, {}, LengthPolicy{0, 20}), Error);
}

TEST_CASE("encode_pad") {
    auto vocab = Vocabulary::build({words({"a", "b", "c"})});
    auto enc = encode_pad(words({"a", "b", "c"}), 55, vocab);
    REQUIRE(enc.indices.size() == 55);
    CHECK(enc.length() == 3);
    for (std::size_t i = 3; i < 55; ++i) CHECK(enc.indices[i] == 0);
    CHECK(enc.vocab_id == vocab.id());

    TokenSeq sixty;
    for (int i = 0; i < 60; ++i) sixty.push_back(i % 2 ? "a" : "b");
    auto cut = encode_pad(sixty, 55, vocab);
    CHECK(cut.length() == 55);
    CHECK(decode(cut, vocab) == TokenSeq(sixty.begin(), sixty.begin() + 55));

    auto unknown = encode_pad(words({"zzz"}), 4, vocab);
    CHECK(unknown.indices[0] == vocab.oov());

    auto with_cls = encode_pad_with_cls(words({"a"}), 4, vocab);
    CHECK(with_cls.indices[0] == *vocab.cls());
    CHECK(with_cls.length() == 2);
}

TEST_CASE("encode/decode round-trip on random in-vocab sequences") {
    Rng rng(8);
    std::vector<TokenSeq> corpus;
    TokenSeq pool;
    for (int i = 0; i < 50; ++i) pool.push_back("t" + std::to_string(i));
    corpus.push_back(pool);
    auto vocab = Vocabulary::build(corpus);
    for (int trial = 0; trial < 300; ++trial) {
        TokenSeq seq;
        for (auto n = rng.below(90); n > 0; --n) seq.push_back(pool[rng.below(pool.size())]);
        const int max_len = 1 + static_cast<int>(rng.below(80));
        auto enc = encode_pad(seq, max_len, vocab);
        CHECK(enc.indices.size() == static_cast<std::size_t>(max_len));
        const auto keep = std::min(seq.size(), static_cast<std::size_t>(max_len));
        CHECK(decode(enc, vocab) == TokenSeq(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(keep)));
        bool seen_pad = false;
        for (std::size_t i = 0; i < enc.indices.size(); ++i) {
            if (enc.indices[i] == 0) seen_pad = true;
            CHECK((enc.mask[i] == 1) == !seen_pad);
        }
    }
}

TEST_CASE("vocabulary build is order-independent and persists") {
    auto a = Vocabulary::build({words({"x", "y", "y"}), words({"z"})});
    auto b = Vocabulary::build({words({"z"}), words({"y", "x", "y"})});
    CHECK(a.tokens() == b.tokens());
    CHECK(a.token_at(0) == "<pad>");
    CHECK(a.token_at(3) == "y");

    auto dir = temsa::testing::scratch_dir("vocab");
    a.save((dir / "v.txt").string());
    auto c = Vocabulary::load((dir / "v.txt").string());
    CHECK(c.tokens() == a.tokens());
    CHECK(c.id() == a.id());
    CHECK_THROWS_AS(a.token_at(99), Error);
}

TEST_CASE("embedding tables") {
    auto dir = temsa::testing::scratch_dir("emb");
    auto vocab = Vocabulary::build({words({"sky", "tree", "unknownword"})});

    std::string table;
    for (const char* tok : {"sky", "tree", "ocean"}) {
        table += tok;
        for (int c = 0; c < kGloveDim; ++c) table += " " + std::to_string(0.001 * (c + 1));
        table += "\n";
    }
    temsa::testing::write_file((dir / "glove.txt").string(), table);
    auto m = load_embeddings(vocab, (dir / "glove.txt").string(), EmbeddingOptions{7, 0.05, 0});
    CHECK(m.cols() == kGloveDim);
    CHECK(m.rows() == static_cast<Eigen::Index>(vocab.size()));
    CHECK(m.row(0).isZero());
    CHECK(m(vocab.index_of("sky"), 0) == doctest::Approx(0.001));
    CHECK(m(vocab.index_of("tree"), kGloveDim - 1) == doctest::Approx(0.3));
    const auto oov_row = m.row(vocab.index_of("unknownword"));
    CHECK(oov_row.maxCoeff() <= 0.05);
    CHECK(oov_row.minCoeff() >= -0.05);

    auto again = load_embeddings(vocab, (dir / "glove.txt").string(), EmbeddingOptions{7, 0.05, 0});
    CHECK(again == m);

    temsa::testing::write_file((dir / "bad.txt").string(), "a 1 2 3\nb 1 2\n");
    try {
        load_embeddings(vocab, (dir / "bad.txt").string());
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(load_embeddings(vocab, (dir / "glove.txt").string(), EmbeddingOptions{0, 0.05, 50}), Error);
}

TEST_CASE("OOV rows are uniform on [-0.05, 0.05]") {
    Vocabulary vocab;
    for (int i = 0; i < 500; ++i) vocab.add("w" + std::to_string(i));
    auto m = random_embeddings(vocab, kGloveDim, 99);
    const auto body = m.bottomRows(m.rows() - 1);
    CHECK(m.row(0).isZero());
    CHECK(body.maxCoeff() <= 0.05);
    CHECK(body.minCoeff() >= -0.05);
    const double n = static_cast<double>(body.size());
    const double mean = body.sum() / n;
    const double var = (body.array() - mean).square().sum() / n;
    CHECK(std::abs(mean) < 5e-4);  // sd of the mean is ~7e-5
    CHECK(var == doctest::Approx(0.05 * 0.05 / 3.0).epsilon(0.02));
    // Each tenth of the range holds ~10% of the values.
    for (int bin = 0; bin < 10; ++bin) {
        const double lo = -0.05 + 0.01 * bin;
        const double frac = ((body.array() >= lo) && (body.array() < lo + 0.01)).cast<double>().sum() / n;
        CHECK(frac == doctest::Approx(0.1).epsilon(0.05));
    }
}

}  // TEST_SUITE
