#include <chrono>
#include <exception>
#include <filesystem>
#include <set>
#include <thread>

#include "temsa/detect.hpp"
#include "temsa/expctl.hpp"
#include "temsa/models/models.hpp"

namespace fs = std::filesystem;

namespace temsa::expctl {

namespace {

std::string label_requirement(const ExperimentConfig& cfg) {
    const auto field = cfg.required_label();
    const std::string column(corpus::to_string(field));
    return "experiment " + std::to_string(cfg.experiment) + " requires " + column.substr(0, column.find('_')) +
           " labels (column " + column + ")";
}

bool any_has(const corpus::Dataset& d, corpus::LabelField f) {
    for (const auto& s : d.samples())
        if (corpus::label_of(s, f)) return true;
    return false;
}

bool wants_english_filter(const ExperimentConfig& cfg) {
    if (cfg.english_filter == "auto") return cfg.dataset == "simpson";
    return cfg.english_filter == "true";
}

std::optional<corpus::LabelField> stratify_field(const std::string& s) {
    if (s == "image") return corpus::LabelField::image;
    if (s == "text") return corpus::LabelField::text;
    if (s == "joint") return corpus::LabelField::joint;
    return std::nullopt;
}

/// Joint labels for one side of the split, derived when the config asks for it.
corpus::Dataset with_joint_labels(const corpus::Dataset& d, const ExperimentConfig& cfg, bool manifest_has_joint) {
    const bool derive = cfg.derive_joint == "always" || (cfg.derive_joint == "auto" && !manifest_has_joint);
    if (!derive) return d;
    auto labelled = d.filter([](const corpus::Sample& s) { return s.image_label && s.text_label; });
    return corpus::derive_joint_labels(labelled, cfg.joint_policy);
}

bool is_encoder(const ExperimentConfig& cfg) { return cfg.model == "encoder"; }

/// Token budget without the sequence-start slot.
int token_budget(const ExperimentConfig& cfg) {
    return cfg.experiment == 2 ? cfg.policy.text_max : cfg.policy.tems_max();
}

fs::path image_base(const ExperimentConfig& cfg) {
    if (!cfg.image_root.empty()) return cfg.image_root;
    return fs::path(cfg.manifest).parent_path();
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : cfg.to_map()) j[k] = v;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ConfigMap m;
    for (const auto& [k, v] : j.items()) m[k] = v.get<std::string>();
    return ExperimentConfig::from_map(m);
}

nlohmann::json history_json(const models::TrainHistory& h) {
    auto out = nlohmann::json::array();
    for (const auto& e : h.epochs) out.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
    return out;
}

std::unique_ptr<models::Classifier> build_model(const ExperimentConfig& cfg, const PreparedData& data,
                                                const SeedSet& seeds) {
    if (cfg.model == "bilstm") {
        models::BiLstmConfig mc;
        mc.vocab_size = static_cast<int>(data.vocab.size());
        mc.hidden_units = cfg.hidden_units;
        mc.embed_dim = cfg.embed_dim;
        mc.dropout = cfg.dropout;
        mc.freeze_embeddings = cfg.freeze_embeddings;
        Eigen::MatrixXd emb;
        if (cfg.embeddings.empty()) {
            emb = tems::random_embeddings(data.vocab, cfg.embed_dim, seeds.init);
        } else {
            tems::EmbeddingOptions opts;
            opts.seed = seeds.init;
            opts.dim = cfg.embed_dim;
            emb = tems::load_embeddings(data.vocab, cfg.embeddings, opts);
        }
        return std::make_unique<models::BiLstmClassifier>(mc, seeds.init, &emb);
    }
    if (cfg.model == "encoder") {
        std::unique_ptr<models::Classifier> model;
        const int needed = token_budget(cfg) + 1;
        if (!cfg.encoder_dir.empty()) {
            auto loaded = models::load_checkpoint(cfg.encoder_dir, /*partial=*/true, seeds.init);
            if (loaded.model->kind() != "encoder")
                throw Error("encoder_dir '" + cfg.encoder_dir + "' holds a '" + loaded.model->kind() + "' model");
            const auto ec = models::EncoderConfig::from_json(loaded.model->config());
            if (ec.max_positions < needed)
                throw Error("pretrained encoder supports " + std::to_string(ec.max_positions) +
                            " positions, the run needs " + std::to_string(needed));
            model = std::move(loaded.model);
        } else {
            auto ec = cfg.encoder_preset == "tiny" ? models::EncoderConfig::tiny(static_cast<int>(data.vocab.size()))
                                                   : models::EncoderConfig::base(static_cast<int>(data.vocab.size()));
            ec.scaling = models::parse_attention_scaling(cfg.attention);
            ec.dropout = cfg.dropout;
            ec.max_positions = std::max(ec.max_positions, needed);
            model = std::make_unique<models::EncoderClassifier>(ec, seeds.init);
        }
        if (cfg.encoder_freeze) model->params().set_trainable("encoder.", false);
        return model;
    }
    auto backbone = models::make_backbone(cfg.model, cfg.backbone_source);
    return std::make_unique<models::ImageClassifier>(std::move(backbone),
                                                     models::ImageClassifier::default_head(cfg.model), seeds.init);
}

models::TrainConfig train_config(const ExperimentConfig& cfg, const SeedSet& seeds) {
    auto tc = models::TrainConfig::for_model(cfg.model);
    tc.learning_rate = cfg.learning_rate;
    tc.batch_size = cfg.batch_size;
    tc.epochs = cfg.epochs;
    tc.shuffle_seed = seeds.shuffle;
    tc.augment_seed = seeds.augment;
    return tc;
}

std::vector<Sentiment> gold_labels(const std::vector<models::Example>& xs) {
    std::vector<Sentiment> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(sentiment_from_index(x.label));
    return out;
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg, const tems::Vocabulary* fixed_vocab) {
    cfg.validate();
    const auto seeds = SeedSet::expand(cfg.seed);
    const auto field = cfg.required_label();

    auto all = corpus::load_manifest(cfg.manifest, corpus::schema_for_path(cfg.manifest), cfg.dataset);
    if (wants_english_filter(cfg)) {
        const auto before = all.size();
        all = corpus::filter_english_text(all);
        log_info("english filter kept " + std::to_string(all.size()) + " of " + std::to_string(before) + " samples");
    }
    if (cfg.max_samples > 0 && all.size() > cfg.max_samples) {
        std::vector<corpus::Sample> head(all.samples().begin(), all.samples().begin() + cfg.max_samples);
        all = corpus::Dataset(all.name(), std::move(head));
    }

    // One realization per (dataset, seed): the split ignores the experiment.
    corpus::SplitOptions so;
    so.ratio = cfg.split_ratio;
    so.seed = seeds.split;
    so.stratify_by = stratify_field(cfg.stratify);
    auto [train, test] = corpus::split_train_test(all, so);

    if (field == corpus::LabelField::joint) {
        const bool has_joint = any_has(all, corpus::LabelField::joint);
        const bool has_pairs = std::any_of(all.samples().begin(), all.samples().end(),
                                           [](const corpus::Sample& s) { return s.image_label && s.text_label; });
        if (!has_joint && (cfg.derive_joint == "never" || !has_pairs)) throw Error(label_requirement(cfg));
        train = with_joint_labels(train, cfg, has_joint);
        test = with_joint_labels(test, cfg, has_joint);
    } else if (!any_has(all, field)) {
        throw Error(label_requirement(cfg));
    }
    auto keep = [&](const corpus::Sample& s) {
        if (!corpus::label_of(s, field)) return false;
        return !(cfg.experiment == 1 && !s.image_ref);
    };
    train = train.filter(keep);
    test = test.filter(keep);

    std::optional<detect::DetectionIndex> index;
    if (cfg.needs_detections()) {
        if (!fs::exists(cfg.detection_cache))
            throw Error("detection cache '" + cfg.detection_cache + "' does not exist; run `temsa detect` first");
        index = detect::load_detection_index(cfg.detection_cache);
        const auto before = train.size() + test.size();
        auto cached = [&](const corpus::Sample& s) { return index->contains(s.id); };
        train = train.filter(cached);
        test = test.filter(cached);
        if (const auto dropped = before - train.size() - test.size(); dropped > 0)
            log_warn(std::to_string(dropped) + " samples have no cached detections and were left out");
        if (cfg.experiment == 4) {
            train = detect::single_object_subset(train, *index, cfg.primary_source);
            test = detect::single_object_subset(test, *index, cfg.primary_source);
            if (train.empty() || test.empty())
                throw Error("empty subset: no " + std::string(train.empty() ? "training" : "test") +
                            " sample has exactly one '" + cfg.primary_source + "' object");
        }
    }
    if (train.empty()) throw Error("no training samples left for " + label_requirement(cfg));
    if (test.empty()) throw Error("no test samples left for " + label_requirement(cfg));

    PreparedData out;
    out.train = std::move(train);
    out.test = std::move(test);

    auto to_example = [&](const corpus::Sample& s) {
        models::Example ex;
        ex.id = s.id;
        ex.label = class_index(*corpus::label_of(s, field));
        return ex;
    };

    if (cfg.is_image_model()) {
        auto probe = models::make_backbone(cfg.model, cfg.backbone_source);
        const bool pixels = probe->reads_pixels();
        const auto base = image_base(cfg);
        auto load = [&](const corpus::Dataset& d, std::vector<models::Example>& xs) {
            for (const auto& s : d.samples()) {
                auto ex = to_example(s);
                if (pixels) {
                    fs::path p(*s.image_ref);
                    if (p.is_relative()) p = base / p;
                    ex.image = std::make_shared<const Image>(load_image(p.string()));
                }
                xs.push_back(std::move(ex));
            }
        };
        load(out.train, out.train_examples);
        load(out.test, out.test_examples);
        return out;
    }

    std::unique_ptr<tems::WordpieceTokenizer> wordpiece;
    std::optional<tems::Vocabulary> pretrained_vocab;
    if (is_encoder(cfg) && !cfg.encoder_dir.empty() && !fixed_vocab) {
        const auto vocab_path = (fs::path(cfg.encoder_dir) / "vocab.txt").string();
        wordpiece = std::make_unique<tems::WordpieceTokenizer>(tems::WordpieceTokenizer::from_file(vocab_path));
        pretrained_vocab = tems::Vocabulary(wordpiece->vocab(), "[UNK]");
    } else if (is_encoder(cfg) && fixed_vocab && fixed_vocab->contains("[UNK]")) {
        wordpiece = std::make_unique<tems::WordpieceTokenizer>(fixed_vocab->tokens(), "[UNK]");
    }
    const auto scheme = wordpiece ? tems::TokenScheme::wordpiece : tems::TokenScheme::whitespace;

    auto sequence = [&](const corpus::Sample& s) {
        auto tokens = tems::tokenize(tems::clean_text(s.text), scheme, wordpiece.get());
        if (cfg.experiment == 2) {
            if (tokens.size() > static_cast<std::size_t>(cfg.policy.text_max)) tokens.resize(cfg.policy.text_max);
            return tokens;
        }
        const auto mode = cfg.experiment == 4 ? detect::NameMode::primary_only : detect::NameMode::merged;
        const auto names = detect::object_names_for(*index, s.id, cfg.primary_source, cfg.secondary_source, mode);
        return tems::build_tems(tokens, names, cfg.policy).combined;
    };
    for (const auto* d : {&out.train, &out.test})
        for (const auto& s : d->samples()) out.tokens[s.id] = sequence(s);

    if (fixed_vocab) {
        out.vocab = *fixed_vocab;
    } else if (pretrained_vocab) {
        out.vocab = std::move(*pretrained_vocab);
    } else {
        std::vector<tems::TokenSeq> corpus_tokens;
        for (const auto& s : out.train.samples()) corpus_tokens.push_back(out.tokens.at(s.id));
        out.vocab = tems::Vocabulary::build(corpus_tokens);
    }

    const int budget = token_budget(cfg);
    auto encode = [&](const corpus::Dataset& d, std::vector<models::Example>& xs) {
        for (const auto& s : d.samples()) {
            auto ex = to_example(s);
            const auto& toks = out.tokens.at(s.id);
            ex.indices = is_encoder(cfg) ? tems::encode_pad_with_cls(toks, budget + 1, out.vocab).indices
                                         : tems::encode_pad(toks, budget, out.vocab).indices;
            xs.push_back(std::move(ex));
        }
    };
    encode(out.train, out.train_examples);
    encode(out.test, out.test_examples);
    return out;
}

TrainedModel train_model(const ExperimentConfig& cfg) {
    const auto seeds = SeedSet::expand(cfg.seed);
    TrainedModel tm;
    tm.data = prepare_data(cfg);
    tm.model = build_model(cfg, tm.data, seeds);
    const auto tc = train_config(cfg, seeds);
    log_info("training " + cfg.model + " on " + std::to_string(tm.data.train_examples.size()) + " samples (experiment " +
             std::to_string(cfg.experiment) + ", " + cfg.dataset + ")");
    tm.history = models::train(*tm.model, tm.data.train_examples, tc, [](const models::EpochStats& e) {
        log_info("epoch " + std::to_string(e.epoch) + " loss " + eval::format_number(e.loss) + " accuracy " +
                 eval::format_number(e.accuracy));
    });

    tm.checkpoint_dir = (fs::path(cfg.out_dir) / "checkpoint").string();
    nlohmann::json extra = {{"experiment_config", config_json(cfg)},
                            {"train_config", tc.to_json()},
                            {"history", history_json(tm.history)}};
    models::save_checkpoint(tm.checkpoint_dir, *tm.model, extra, cfg.is_image_model() ? nullptr : &tm.data.vocab);
    return tm;
}

eval::ResultRecord evaluate_model(models::Classifier& model, const PreparedData& data, const ExperimentConfig& cfg) {
    const auto preds_idx = models::predict(model, data.test_examples, static_cast<std::size_t>(cfg.batch_size));
    eval::ResultRecord r;
    r.experiment = cfg.experiment;
    r.dataset = cfg.dataset;
    r.model = cfg.model;
    r.config = config_json(cfg);
    r.golds = gold_labels(data.test_examples);
    for (std::size_t i = 0; i < preds_idx.size(); ++i) {
        r.ids.push_back(data.test_examples[i].id);
        r.predictions.push_back(sentiment_from_index(preds_idx[i]));
    }
    r.metrics = eval::metrics(eval::confusion(r.predictions, r.golds), cfg.averaging);
    r.wilcoxon.push_back(eval::prediction_vs_gold(r.predictions, r.golds, cfg.alpha));
    r.hashes["manifest"] = file_fingerprint(cfg.manifest);
    if (cfg.needs_detections()) r.hashes["detection_cache"] = file_fingerprint(cfg.detection_cache);
    if (!cfg.embeddings.empty() && cfg.model == "bilstm") r.hashes["embeddings"] = file_fingerprint(cfg.embeddings);
    if (!cfg.is_image_model()) r.hashes["vocab"] = data.vocab.id();
    return r;
}

eval::ResultRecord evaluate_checkpoint(const std::string& checkpoint_dir, const std::string& split) {
    if (split != "test" && split != "train") throw Error("split must be test or train (got '" + split + "')");
    const auto t0 = std::chrono::steady_clock::now();
    auto loaded = models::load_checkpoint(checkpoint_dir);
    const auto& extra = loaded.manifest.at("extra");
    if (!extra.contains("experiment_config"))
        throw Error("checkpoint '" + checkpoint_dir + "' has no experiment config; it was not written by train");
    const auto cfg = config_from_json(extra.at("experiment_config"));
    auto data = prepare_data(cfg, loaded.vocab ? &*loaded.vocab : nullptr);
    if (split == "train") {
        data.test_examples = data.train_examples;
        data.test = data.train;
    }
    auto r = evaluate_model(*loaded.model, data, cfg);
    r.history = extra.value("history", nlohmann::json::array());
    r.hashes["checkpoint"] = file_fingerprint((fs::path(checkpoint_dir) / "tensors.bin").string());
    r.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

eval::ResultRecord run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    auto tm = train_model(cfg);
    auto r = evaluate_model(*tm.model, tm.data, cfg);
    r.history = history_json(tm.history);
    r.hashes["checkpoint"] = file_fingerprint((fs::path(tm.checkpoint_dir) / "tensors.bin").string());
    r.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto path = eval::persist(r, (fs::path(cfg.out_dir) / "record.json").string());
    log_info("experiment " + std::to_string(cfg.experiment) + " (" + cfg.model + ", " + cfg.dataset +
             ") accuracy " + eval::format_number(r.metrics.accuracy) + "; record at " + path);
    return r;
}

std::vector<eval::ResultRecord> run_experiments(const std::vector<ExperimentConfig>& cfgs, bool parallel) {
    std::set<std::string> dirs;
    for (const auto& c : cfgs) {
        c.validate();
        if (!dirs.insert(fs::weakly_canonical(c.out_dir).string()).second)
            throw Error("two experiments share the output directory '" + c.out_dir + "'");
    }
    std::vector<eval::ResultRecord> out(cfgs.size());
    if (!parallel) {
        for (std::size_t i = 0; i < cfgs.size(); ++i) out[i] = run_experiment(cfgs[i]);
        return out;
    }
    std::vector<std::exception_ptr> errors(cfgs.size());
    std::vector<std::thread> workers;
    workers.reserve(cfgs.size());
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        workers.emplace_back([&, i] {
            try {
                out[i] = run_experiment(cfgs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace temsa::expctl
