#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "temsa/corpus.hpp"
#include "temsa/models/classifier.hpp"
#include "temsa/models/train.hpp"
#include "temsa/report.hpp"
#include "temsa/tems.hpp"

namespace temsa::expctl {

using ConfigMap = std::map<std::string, std::string>;

/// Parses `key = value` lines; `#` starts a comment. Duplicate keys throw
/// with the line number.
ConfigMap parse_config_text(std::string_view text);
ConfigMap load_config_file(const std::string& path);

/// Everything one experiment run depends on. Experiments 1 to 4 differ in a
/// handful of keys; the rest have published defaults.
struct ExperimentConfig {
    int experiment = 3;
    std::string dataset = "mvsa";
    std::string model = "bilstm";

    std::string manifest;
    std::string detection_cache;
    std::string out_dir = "temsa_out";
    /// Base for relative image paths; defaults to the manifest's directory.
    std::string image_root;

    std::uint64_t seed = 0;
    double split_ratio = 0.8;
    /// none, image, text or joint.
    std::string stratify = "none";
    corpus::JointPolicy joint_policy = corpus::JointPolicy::strict_equal;
    /// auto derives joint labels when a run needs them and the manifest has none.
    std::string derive_joint = "auto";
    /// auto filters SIMPSoN only.
    std::string english_filter = "auto";
    std::size_t max_samples = 0;

    tems::LengthPolicy policy = tems::LengthPolicy::mvsa();
    std::string primary_source = "coco";
    std::string secondary_source = "vg";

    int epochs = 10;
    int batch_size = 32;
    double learning_rate = 1e-2;
    eval::Averaging averaging = eval::Averaging::macro;
    double alpha = 0.05;

    std::string embeddings;
    int embed_dim = 300;
    int hidden_units = 32;
    double dropout = 0.1;
    bool freeze_embeddings = false;

    std::string encoder_dir;
    std::string encoder_preset = "base";
    bool encoder_freeze = false;
    std::string attention = "scaled";

    std::string backbone_source = "fixture";

    /// Defaults for an experiment/dataset/model triple.
    static ExperimentConfig defaults(int experiment, const std::string& dataset, const std::string& model);
    /// Defaults first, then every key of `values` (unknown keys throw).
    static ExperimentConfig from_map(const ConfigMap& values);
    static ExperimentConfig load(const std::string& path);

    /// Overrides one key (CLI flags go through here).
    void set(const std::string& key, const std::string& value);
    ConfigMap to_map() const;
    void validate() const;

    bool is_image_model() const;
    /// Label column the experiment is scored on.
    corpus::LabelField required_label() const;
    bool needs_detections() const { return experiment == 3 || experiment == 4; }
};

/// Train/test partition and the model inputs built from it.
struct PreparedData {
    corpus::Dataset train;
    corpus::Dataset test;
    std::vector<models::Example> train_examples;
    std::vector<models::Example> test_examples;
    tems::Vocabulary vocab;
    /// TEMS or text token sequences per example id (text models only).
    std::map<std::string, tems::TokenSeq> tokens;
};

/// Shared split first (same ids for every experiment on a dataset and seed),
/// then experiment-specific labels, detections and encodings. `vocab`, when
/// given, fixes the token indices (evaluation of a saved model).
PreparedData prepare_data(const ExperimentConfig& cfg, const tems::Vocabulary* vocab = nullptr);

struct TrainedModel {
    std::unique_ptr<models::Classifier> model;
    PreparedData data;
    models::TrainHistory history;
    std::string checkpoint_dir;
};

/// Prepares data, trains and saves a checkpoint under `<out_dir>/checkpoint`.
TrainedModel train_model(const ExperimentConfig& cfg);

/// Scores a model on prepared test data and fills a result record.
eval::ResultRecord evaluate_model(models::Classifier& model, const PreparedData& data, const ExperimentConfig& cfg);

/// Reloads a checkpoint written by train_model and scores `split`
/// (`test` or `train`).
eval::ResultRecord evaluate_checkpoint(const std::string& checkpoint_dir, const std::string& split = "test");

/// prepare, detect-cache lookup, train, evaluate; persists
/// `<out_dir>/record.json` and the checkpoint.
eval::ResultRecord run_experiment(const ExperimentConfig& cfg);

/// Runs independent configs serially, or one thread per config.
std::vector<eval::ResultRecord> run_experiments(const std::vector<ExperimentConfig>& cfgs, bool parallel = false);

inline std::string persist(const eval::ResultRecord& r, const std::string& path) { return eval::persist(r, path); }
inline eval::ResultRecord load(const std::string& path) { return eval::load_record(path); }


struct DeskFixtureOptions {
    std::size_t samples = 200;
    std::uint64_t seed = 0;
    int image_size = 16;
};

struct DeskFixture {
    std::string manifest;
    std::string detection_cache;
    std::string image_root;
};

/// Writes a small synthetic MVSA-shaped corpus under `dir`: PPM images whose
/// colour follows the image label, captions carrying a sentiment cue word,
/// image/text labels covering every pair (joint left for derivation), and a
/// detection cache filled by the fixture detector.
DeskFixture make_desk_fixture(const std::string& dir, const DeskFixtureOptions& options = {});

}  // namespace temsa::expctl
