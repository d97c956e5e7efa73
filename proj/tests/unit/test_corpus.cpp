#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "temsa/corpus.hpp"
#include "temsa/rng.hpp"
#include "test_support.hpp"

using namespace temsa;
using namespace temsa::corpus;
using temsa::testing::fixture;

namespace {

const char* kHeader = "id,image_path,text,image_label,text_label,joint_label\n";

Dataset random_dataset(Rng& rng, std::size_t n, bool allow_missing) {
    std::vector<Sample> samples;
    auto draw = [&]() -> std::optional<Sentiment> {
        if (allow_missing && rng.below(5) == 0) return std::nullopt;
        return sentiment_from_index(static_cast<int>(rng.below(3)));
    };
    for (std::size_t i = 0; i < n; ++i) {
        Sample s;
        s.id = "r" + std::to_string(i);
        s.text = "text " + std::to_string(i);
        s.image_label = draw();
        s.text_label = draw();
        s.joint_label = draw();
        samples.push_back(std::move(s));
    }
    return Dataset("random", std::move(samples));
}

std::map<std::string, std::string> read_oracle(const std::string& path) {
    std::map<std::string, std::string> out;
    auto lines = temsa::testing::read_lines(path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto comma = lines[i].find(',');
        out[lines[i].substr(0, comma)] = lines[i].substr(comma + 1);
    }
    return out;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("well-formed manifest maps rows to samples") {
    std::string content = std::string(kHeader) +
                          "a,img/a.jpg,Hello there,positive,negative,\n"
                          "b,,\"quoted, with comma\",neutral,,neutral\n"
                          "c,img/c.jpg,\"multi\nline \"\"quote\"\"\",,,\n";
    auto d = parse_manifest(content, ManifestSchema::csv, "demo");
    REQUIRE(d.size() == 3);
    CHECK(d.name() == "demo");
    CHECK(d[0].id == "a");
    CHECK(d[0].image_ref == std::optional<std::string>("img/a.jpg"));
    CHECK(d[0].text == "Hello there");
    CHECK(d[0].image_label == Sentiment::positive);
    CHECK(d[0].text_label == Sentiment::negative);
    CHECK_FALSE(d[0].joint_label.has_value());
    CHECK_FALSE(d[1].image_ref.has_value());
    CHECK(d[1].text == "quoted, with comma");
    CHECK(d[2].text == "multi\nline \"quote\"");
    CHECK_FALSE(d[2].image_label.has_value());
}

TEST_CASE("unknown label is rejected by name") {
    std::string content = std::string(kHeader) + "a,,x,pos!,,\n";
    try {
        parse_manifest(content, ManifestSchema::csv, "d");
        FAIL("expected an error");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("unknown label") != std::string::npos);
        CHECK(msg.find("pos!") != std::string::npos);
    }
}

TEST_CASE("header-only manifest is an empty dataset") {
    auto d = parse_manifest(kHeader, ManifestSchema::csv, "d");
    CHECK(d.empty());
}

TEST_CASE("malformed rows name their row number") {
    std::string content = std::string(kHeader) + "a,,ok,,,\n" + "b,,too,few\n";
    try {
        parse_manifest(content, ManifestSchema::csv, "d");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_manifest("id,text\n", ManifestSchema::csv, "d"), Error);
    CHECK_THROWS_AS(parse_manifest(std::string(kHeader) + "a,,\"open,,,,\n", ManifestSchema::csv, "d"), Error);
    CHECK_THROWS_AS(parse_manifest(std::string(kHeader) + "a,,x,,,\na,,y,,,\n", ManifestSchema::csv, "d"), Error);
}

TEST_CASE("TSV manifests use tabs") {
    std::string content = "id\timage_path\ttext\timage_label\ttext_label\tjoint_label\n"
                          "a\t\tcommas, stay\tneutral\tneutral\tneutral\n";
    auto d = parse_manifest(content, ManifestSchema::tsv, "t");
    REQUIRE(d.size() == 1);
    CHECK(d[0].text == "commas, stay");
    CHECK(schema_for_path("x/y.tsv") == ManifestSchema::tsv);
    CHECK(schema_for_path("x/y.csv") == ManifestSchema::csv);
}

TEST_CASE("serialization round-trip keeps sample order and content") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto d = random_dataset(rng, 1 + rng.below(40), true);
        for (auto schema : {ManifestSchema::csv, ManifestSchema::tsv}) {
            auto again = parse_manifest(format_manifest(d, schema), schema, d.name());
            CHECK(again == d);
        }
    }
}

TEST_CASE("joint labels: opposing polar pairs are removed") {
    std::vector<Sample> s(4);
    s[0] = {"pn", {}, "", Sentiment::positive, Sentiment::negative, {}};
    s[1] = {"np", {}, "", Sentiment::negative, Sentiment::positive, {}};
    s[2] = {"pp", {}, "", Sentiment::positive, Sentiment::positive, {}};
    s[3] = {"up", {}, "", Sentiment::neutral, Sentiment::positive, {}};
    Dataset d("d", s);

    auto strict = derive_joint_labels(d, JointPolicy::strict_equal);
    REQUIRE(strict.size() == 1);
    CHECK(strict[0].id == "pp");
    CHECK(strict[0].joint_label == Sentiment::positive);

    auto polar = derive_joint_labels(d, JointPolicy::keep_polar);
    REQUIRE(polar.size() == 2);
    CHECK(polar.find("up")->joint_label == Sentiment::positive);
    CHECK(polar.find("pn") == nullptr);
}

TEST_CASE("joint labels: both policies match the hand-built oracle tables") {
    auto d = load_manifest(fixture("joint_pairs.csv"), ManifestSchema::csv);
    REQUIRE(d.size() == 30);
    for (auto [policy, file] : {std::pair{JointPolicy::strict_equal, "joint_oracle_strict_equal.csv"},
                                std::pair{JointPolicy::keep_polar, "joint_oracle_keep_polar.csv"}}) {
        auto oracle = read_oracle(fixture(file));
        auto out = derive_joint_labels(d, policy);
        CHECK(out.size() == oracle.size());
        for (const auto& s : out.samples()) {
            REQUIRE(oracle.count(s.id));
            CHECK(std::string(to_string(*s.joint_label)) == oracle[s.id]);
        }
    }
}

TEST_CASE("joint labels: missing modality label names the sample") {
    Dataset d("d", {Sample{"lonely", {}, "", Sentiment::positive, std::nullopt, {}}});
    try {
        derive_joint_labels(d);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("lonely") != std::string::npos);
    }
}

TEST_CASE("joint labels: invariants over random inputs") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto d = random_dataset(rng, rng.below(30), false);
        for (auto policy : {JointPolicy::strict_equal, JointPolicy::keep_polar}) {
            auto out = derive_joint_labels(d, policy);
            CHECK(out.size() <= d.size());
            for (const auto& s : out.samples()) {
                CHECK_FALSE((is_polar(*s.image_label) && is_polar(*s.text_label) && *s.image_label != *s.text_label));
                if (policy == JointPolicy::strict_equal) {
                    CHECK(*s.image_label == *s.text_label);
                    CHECK(*s.joint_label == *s.image_label);
                }
            }
        }
    }
}

TEST_CASE("english filter") {
    SUBCASE("empty text is dropped, plain English caption kept") {
        Dataset d("d", {Sample{"empty", {}, "", {}, {}, {}}, Sample{"blank", {}, "   ", {}, {}, {}},
                        Sample{"t1", {}, "families belong together", {}, {}, {}}});
        auto out = filter_english_text(d);
        REQUIRE(out.size() == 1);
        CHECK(out[0].id == "t1");
    }
    SUBCASE("hand-labelled mix keeps exactly the English rows") {
        auto d = load_manifest(fixture("english_mix.csv"), ManifestSchema::csv);
        auto out = filter_english_text(d);
        auto expected = temsa::testing::read_lines(fixture("english_mix_expected.txt"));
        CHECK(out.ids() == expected);
    }
    SUBCASE("non-ASCII script is rejected") {
        CHECK_FALSE(EnglishHeuristic{}("\xe4\xbd\xa0\xe5\xa5\xbd\xe4\xb8\x96\xe7\x95\x8c"));
    }
    SUBCASE("a throwing predicate counts as non-English") {
        Dataset d("d", {Sample{"a", {}, "hello", {}, {}, {}}});
        auto out = filter_english_text(d, [](std::string_view) -> bool { throw std::runtime_error("boom"); });
        CHECK(out.empty());
    }
    SUBCASE("predicate is injectable") {
        Dataset d("d", {Sample{"a", {}, "zzz", {}, {}, {}}});
        CHECK(filter_english_text(d, [](std::string_view) { return true; }).size() == 1);
    }
}

TEST_CASE("split sizes and determinism") {
    Rng rng(1);
    auto d100 = random_dataset(rng, 100, true);
    auto [train, test] = split_train_test(d100, 0.8, 42);
    CHECK(train.size() == 80);
    CHECK(test.size() == 20);

    auto [train2, test2] = split_train_test(d100, 0.8, 42);
    CHECK(train2.ids() == train.ids());
    CHECK(test2.ids() == test.ids());

    auto [train3, test3] = split_train_test(d100, 0.8, 43);
    CHECK(train3.ids() != train.ids());

    auto d1 = random_dataset(rng, 1, true);
    auto [tr1, te1] = split_train_test(d1, 0.8, 0);
    CHECK(tr1.size() == 1);
    CHECK(te1.size() == 0);

    CHECK_THROWS_AS(split_train_test(d100, 0.0, 1), Error);
    CHECK_THROWS_AS(split_train_test(d100, 1.0, 1), Error);
    CHECK_THROWS_AS(split_train_test(d100, -0.5, 1), Error);
}

TEST_CASE("split is a partition") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        auto d = random_dataset(rng, rng.below(60), true);
        const double ratio = 0.05 + 0.9 * rng.uniform();
        SplitOptions opts{ratio, rng.next(), std::nullopt};
        if (trial % 2) opts.stratify_by = LabelField::joint;
        auto [train, test] = split_train_test(d, opts);
        const auto train_ids = train.ids();
        std::set<std::string> a(train_ids.begin(), train_ids.end());
        std::set<std::string> b;
        for (const auto& id : test.ids()) {
            CHECK(a.count(id) == 0);
            b.insert(id);
        }
        CHECK(a.size() + b.size() == d.size());
        for (const auto& id : d.ids()) CHECK((a.count(id) + b.count(id)) == 1);
        if (!opts.stratify_by)
            CHECK(train.size() == static_cast<std::size_t>(std::lround(ratio * static_cast<double>(d.size()))));
    }
}

TEST_CASE("stratified split keeps class proportions") {
    std::vector<Sample> samples;
    for (int i = 0; i < 50; ++i) samples.push_back({"p" + std::to_string(i), {}, "", {}, {}, Sentiment::positive});
    for (int i = 0; i < 10; ++i) samples.push_back({"n" + std::to_string(i), {}, "", {}, {}, Sentiment::negative});
    Dataset d("d", samples);
    auto [train, test] = split_train_test(d, SplitOptions{0.8, 3, LabelField::joint});
    auto stats = summarize(test);
    CHECK(stats.joint[Sentiment::positive] == 10);
    CHECK(stats.joint[Sentiment::negative] == 2);
}

TEST_CASE("summarize") {
    SUBCASE("fixture counts") {
        Dataset d("d", {Sample{"a", {}, "", Sentiment::positive, {}, {}},
                        Sample{"b", {}, "", Sentiment::positive, {}, {}},
                        Sample{"c", {}, "", Sentiment::negative, {}, {}}});
        auto s = summarize(d);
        CHECK(s.image[Sentiment::positive] == 2);
        CHECK(s.image[Sentiment::negative] == 1);
        CHECK(s.image[Sentiment::neutral] == 0);
        CHECK(s.image.total == 3);
        CHECK(s.text.total == 0);
        CHECK(s.text.missing == 3);
    }
    SUBCASE("empty dataset") {
        auto s = summarize(Dataset{});
        CHECK(s == LabelStats{});
    }
    SUBCASE("brute-force tally on random fixtures") {
        Rng rng(9);
        for (int trial = 0; trial < 50; ++trial) {
            auto d = random_dataset(rng, rng.below(80), true);
            auto stats = summarize(d);
            for (auto field : {LabelField::image, LabelField::text, LabelField::joint}) {
                std::size_t total = 0;
                for (auto sent : kAllSentiments) {
                    std::size_t n = 0;
                    for (const auto& s : d.samples())
                        if (label_of(s, field) == sent) ++n;
                    CHECK(stats.of(field)[sent] == n);
                    total += n;
                }
                CHECK(stats.of(field).total == total);
                CHECK(stats.of(field).total + stats.of(field).missing == d.size());
            }
        }
    }
}

}  // TEST_SUITE
