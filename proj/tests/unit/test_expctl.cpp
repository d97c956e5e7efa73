#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "temsa/detect.hpp"
#include "temsa/expctl.hpp"
#include "test_support.hpp"

using namespace temsa;
using namespace temsa::expctl;
namespace fs = std::filesystem;

namespace {

/// Shared desk corpus; written once per process.
const DeskFixture& desk() {
    static const DeskFixture f = [] {
        DeskFixtureOptions o;
        o.samples = 60;
        o.seed = 7;
        return make_desk_fixture((testing::scratch_dir("expctl_desk")).string(), o);
    }();
    return f;
}

ExperimentConfig small_config(int experiment, const std::string& model, const std::string& out) {
    auto c = ExperimentConfig::defaults(experiment, "mvsa", model);
    c.manifest = desk().manifest;
    c.detection_cache = desk().detection_cache;
    c.primary_source = "fixture";
    c.secondary_source = "";
    c.out_dir = out;
    c.epochs = 2;
    c.batch_size = 8;
    c.embed_dim = 8;
    c.hidden_units = 4;
    c.seed = 3;
    return c;
}

void check_unit_interval(const eval::MetricSet& m) {
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

}  // namespace

TEST_SUITE("expctl") {

TEST_CASE("config text parses keys, values and comments") {
    const auto m = parse_config_text("# header\nexperiment = 2\n  model=bilstm   # trailing\n\nmanifest = a b.csv\n");
    CHECK(m.size() == 3);
    CHECK(m.at("experiment") == "2");
    CHECK(m.at("model") == "bilstm");
    CHECK(m.at("manifest") == "a b.csv");
}

TEST_CASE("config text errors name the line") {
    CHECK_THROWS_WITH_AS(parse_config_text("a=1\nnot a pair\n"), doctest::Contains("line 2"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("a=1\nb=2\na=3\n"), doctest::Contains("duplicate key 'a'"), Error);
    CHECK_THROWS_WITH_AS(parse_config_text("=1\n"), doctest::Contains("empty key"), Error);
}

TEST_CASE("dataset and model pick their default budgets and learning rate") {
    const auto s = ExperimentConfig::from_map({{"dataset", "simpson"}, {"model", "encoder"}, {"experiment", "3"}});
    CHECK(s.policy.text_max == 55);
    CHECK(s.policy.tems_max() == 75);
    CHECK(s.learning_rate == doctest::Approx(6e-6));
    const auto m = ExperimentConfig::from_map({{"dataset", "mvsa"}, {"model", "bilstm"}});
    CHECK(m.policy.tems_max() == 41);
    CHECK(m.learning_rate == doctest::Approx(1e-2));
}

TEST_CASE("explicit keys win over defaults regardless of order") {
    const auto c = ExperimentConfig::from_map(
        {{"dataset", "simpson"}, {"model", "vgg16"}, {"learning_rate", "0.5"}, {"text_max", "10"}, {"experiment", "1"}});
    CHECK(c.learning_rate == 0.5);
    CHECK(c.policy.text_max == 10);
    auto d = c;
    d.set("epochs", "4");
    CHECK(d.epochs == 4);
}

TEST_CASE("unknown and malformed keys are rejected") {
    CHECK_THROWS_WITH_AS(ExperimentConfig::from_map({{"epochz", "3"}}), doctest::Contains("unknown config key 'epochz'"),
                         Error);
    ExperimentConfig c;
    CHECK_THROWS_WITH_AS(c.set("epochs", "three"), doctest::Contains("not a number"), Error);
    CHECK_THROWS_WITH_AS(c.set("encoder_freeze", "maybe"), doctest::Contains("not a boolean"), Error);
    CHECK_THROWS_AS(c.set("joint_policy", "loose"), Error);
}

TEST_CASE("to_map round-trips through from_map") {
    auto c = ExperimentConfig::defaults(4, "simpson", "encoder");
    c.manifest = "m.csv";
    c.detection_cache = "d.jsonl";
    c.seed = 99;
    c.split_ratio = 0.7;
    c.joint_policy = corpus::JointPolicy::keep_polar;
    c.encoder_freeze = true;
    c.averaging = eval::Averaging::weighted;
    const auto back = ExperimentConfig::from_map(c.to_map());
    CHECK(back.to_map() == c.to_map());
}

TEST_CASE("experiments map to their label columns") {
    CHECK(ExperimentConfig::defaults(1, "mvsa", "vgg16").required_label() == corpus::LabelField::image);
    CHECK(ExperimentConfig::defaults(2, "mvsa", "bilstm").required_label() == corpus::LabelField::text);
    CHECK(ExperimentConfig::defaults(3, "mvsa", "bilstm").required_label() == corpus::LabelField::joint);
    CHECK(ExperimentConfig::defaults(4, "mvsa", "encoder").required_label() == corpus::LabelField::joint);
}

TEST_CASE("validation enforces model kind and detection cache per experiment") {
    auto c = ExperimentConfig::defaults(1, "mvsa", "bilstm");
    c.manifest = "m.csv";
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("requires an image model"), Error);
    c = ExperimentConfig::defaults(2, "mvsa", "resnet50");
    c.manifest = "m.csv";
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("requires a text model"), Error);
    for (int e : {3, 4}) {
        c = ExperimentConfig::defaults(e, "mvsa", "bilstm");
        c.manifest = "m.csv";
        CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("requires a detection cache"), Error);
        c.detection_cache = "d.jsonl";
        CHECK_NOTHROW(c.validate());
    }
    c.experiment = 5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = ExperimentConfig::defaults(2, "mvsa", "bilstm");
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("no manifest"), Error);
}

TEST_CASE("desk fixture covers every label pair and caches every image") {
    const auto d = corpus::load_manifest(desk().manifest, corpus::ManifestSchema::csv);
    CHECK(d.size() == 60);
    std::set<std::pair<int, int>> pairs;
    for (const auto& s : d.samples()) pairs.insert({class_index(*s.image_label), class_index(*s.text_label)});
    CHECK(pairs.size() == 9);
    const auto idx = detect::load_detection_index(desk().detection_cache);
    CHECK(idx.size() == 60);
}

TEST_CASE("detect_dataset reuses cached entries") {
    const auto dir = testing::scratch_dir("expctl_detect_reuse");
    const auto d = corpus::load_manifest(desk().manifest, corpus::ManifestSchema::csv);
    detect::DetectionCache cache((dir / "c.jsonl").string());
    detect::FixtureDetector det;
    const auto first = detect::detect_dataset(d, det, cache, desk().image_root);
    CHECK(first.detected == 60);
    detect::DetectionCache again((dir / "c.jsonl").string());
    again.load();
    const auto second = detect::detect_dataset(d, det, again, desk().image_root);
    CHECK(second.detected == 0);
    CHECK(second.reused == 60);
}

TEST_CASE("experiment 2 on a small fixture yields metrics in the unit interval") {
    const auto out = testing::scratch_dir("expctl_exp2");
    const auto r = run_experiment(small_config(2, "bilstm", out.string()));
    CHECK(r.experiment == 2);
    CHECK(r.model == "bilstm");
    CHECK(!r.ids.empty());
    CHECK(r.ids.size() == r.predictions.size());
    check_unit_interval(r.metrics);
    CHECK(fs::exists(out / "record.json"));
    CHECK(fs::exists(out / "checkpoint" / "manifest.json"));
    CHECK(load((out / "record.json").string()) == r);
    CHECK(r.history.size() == 2);
}

TEST_CASE("experiments share one split realization per dataset and seed") {
    const auto c2 = small_config(2, "bilstm", "unused2");
    const auto c3 = small_config(3, "bilstm", "unused3");
    const auto d2 = prepare_data(c2);
    const auto d3 = prepare_data(c3);
    const auto test2 = d2.test.ids();
    const std::set<std::string> test2_set(test2.begin(), test2.end());
    const auto train2 = d2.train.ids();
    const std::set<std::string> train2_set(train2.begin(), train2.end());
    for (const auto& id : d3.test.ids()) CHECK(test2_set.count(id) == 1);
    for (const auto& id : d3.train.ids()) CHECK(train2_set.count(id) == 1);
    for (const auto& id : test2) CHECK(train2_set.count(id) == 0);
}

TEST_CASE("TEMS inputs respect the combined budget") {
    const auto c = small_config(3, "bilstm", "unused");
    const auto d = prepare_data(c);
    for (const auto& ex : d.train_examples) CHECK(ex.indices.size() == 41);
    for (const auto& [id, toks] : d.tokens) CHECK(toks.size() <= 41);
    auto enc = small_config(3, "encoder", "unused");
    const auto de = prepare_data(enc);
    for (const auto& ex : de.test_examples) {
        CHECK(ex.indices.size() == 42);
        CHECK(ex.indices[0] == *de.vocab.cls());
    }
}

TEST_CASE("missing label column names the requirement") {
    const auto dir = testing::scratch_dir("expctl_nolabels");
    auto d = corpus::load_manifest(desk().manifest, corpus::ManifestSchema::csv);
    std::vector<corpus::Sample> stripped;
    for (auto s : d.samples()) {
        s.text_label.reset();
        stripped.push_back(s);
    }
    const auto path = (dir / "manifest.csv").string();
    corpus::save_manifest(corpus::Dataset("mvsa", stripped), path, corpus::ManifestSchema::csv);
    auto c = small_config(2, "bilstm", (dir / "out").string());
    c.manifest = path;
    CHECK_THROWS_WITH_AS(run_experiment(c), doctest::Contains("experiment 2 requires text labels"), Error);
    c.experiment = 3;
    CHECK_THROWS_WITH_AS(run_experiment(c), doctest::Contains("experiment 3 requires joint labels"), Error);
}

TEST_CASE("experiment 4 without single-object samples fails with empty subset") {
    const auto dir = testing::scratch_dir("expctl_exp4_empty");
    const auto d = corpus::load_manifest(desk().manifest, corpus::ManifestSchema::csv);
    detect::DetectionCache cache((dir / "two_each.jsonl").string());
    for (const auto& s : d.samples()) {
        detect::Detections dets{s.id, "coco", {}};
        dets.items.push_back({"dog", 0.9, {}, "coco"});
        dets.items.push_back({"cat", 0.8, {}, "coco"});
        cache.append(dets, 0.7);
    }
    auto c = small_config(4, "bilstm", (dir / "out").string());
    c.detection_cache = cache.path();
    c.primary_source = "coco";
    CHECK_THROWS_WITH_AS(run_experiment(c), doctest::Contains("empty subset"), Error);
}

TEST_CASE("experiment 4 trains on the single-object subset only") {
    const auto c = small_config(4, "bilstm", testing::scratch_dir("expctl_exp4").string());
    const auto idx = detect::load_detection_index(c.detection_cache);
    const auto d = prepare_data(c);
    for (const auto* part : {&d.train, &d.test})
        for (const auto& s : part->samples()) CHECK(idx.count(s.id, "fixture") == 1);
}

TEST_CASE("missing detection cache is reported before training") {
    auto c = small_config(3, "bilstm", "unused");
    c.detection_cache = "/nonexistent/cache.jsonl";
    CHECK_THROWS_WITH_AS(prepare_data(c), doctest::Contains("does not exist"), Error);
}

TEST_CASE("same config and seed rerun gives identical metrics") {
    const auto a = run_experiment(small_config(3, "bilstm", testing::scratch_dir("expctl_rerun_a").string()));
    const auto b = run_experiment(small_config(3, "bilstm", testing::scratch_dir("expctl_rerun_b").string()));
    CHECK(a.metrics == b.metrics);
    CHECK(a.predictions == b.predictions);
    CHECK(a.history == b.history);
}

TEST_CASE("evaluating a saved checkpoint reproduces the run") {
    const auto out = testing::scratch_dir("expctl_eval_ckpt");
    const auto r = run_experiment(small_config(3, "bilstm", out.string()));
    const auto e = evaluate_checkpoint((out / "checkpoint").string());
    CHECK(e.metrics == r.metrics);
    CHECK(e.predictions == r.predictions);
    CHECK(e.ids == r.ids);
    CHECK_THROWS_AS(evaluate_checkpoint((out / "checkpoint").string(), "dev"), Error);
}

TEST_CASE("image and encoder pipelines run end to end") {
    auto img = small_config(1, "vgg16", testing::scratch_dir("expctl_img").string());
    img.epochs = 1;
    check_unit_interval(run_experiment(img).metrics);

    auto enc = small_config(3, "encoder", testing::scratch_dir("expctl_enc").string());
    enc.encoder_preset = "tiny";
    enc.epochs = 1;
    enc.learning_rate = 1e-3;
    const auto r = run_experiment(enc);
    check_unit_interval(r.metrics);
    const auto e = evaluate_checkpoint((fs::path(enc.out_dir) / "checkpoint").string());
    CHECK(e.predictions == r.predictions);
}

TEST_CASE("parallel runs match serial runs") {
    std::vector<ExperimentConfig> cfgs;
    for (int e : {2, 3}) cfgs.push_back(small_config(e, "bilstm", testing::scratch_dir("expctl_par_" + std::to_string(e)).string()));
    const auto serial = run_experiments(cfgs, false);
    const auto parallel = run_experiments(cfgs, true);
    REQUIRE(serial.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(serial[i].metrics == parallel[i].metrics);
        CHECK(serial[i].predictions == parallel[i].predictions);
    }
    cfgs[1].out_dir = cfgs[0].out_dir;
    CHECK_THROWS_WITH_AS(run_experiments(cfgs, true), doctest::Contains("share the output directory"), Error);
}

}  // TEST_SUITE
