#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "temsa/corpus.hpp"
#include "temsa/detect.hpp"
#include "temsa/expctl.hpp"
#include "temsa/report.hpp"
#include "temsa/tems.hpp"

namespace fs = std::filesystem;
using namespace temsa;

namespace {

/// `$TEMSA_CACHE_DIR/detections.jsonl`, or empty when the variable is unset.
std::string default_cache_path() {
    const char* dir = std::getenv("TEMSA_CACHE_DIR");
    if (!dir || !*dir) return {};
    return (fs::path(dir) / "detections.jsonl").string();
}

std::string require_cache(std::string path) {
    if (path.empty()) path = default_cache_path();
    if (path.empty()) throw Error("no detection cache given (use --cache or set TEMSA_CACHE_DIR)");
    return path;
}

void ensure_parent(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_text(const std::string& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

std::string counts_line(const char* name, const corpus::LabelCounts& c) {
    return std::string(name) + ": positive=" + std::to_string(c[Sentiment::positive]) +
           " negative=" + std::to_string(c[Sentiment::negative]) + " neutral=" + std::to_string(c[Sentiment::neutral]) +
           " total=" + std::to_string(c.total);
}

void print_metrics(const eval::ResultRecord& r) {
    std::cout << eval::experiment_label(r.experiment, r.model) << " on " << r.dataset << ": accuracy "
              << eval::format_number(r.metrics.accuracy) << ", precision " << eval::format_number(r.metrics.precision)
              << ", recall " << eval::format_number(r.metrics.recall) << ", f1 " << eval::format_number(r.metrics.f1)
              << " (" << eval::to_string(r.metrics.averaging) << ", n=" << r.ids.size() << ")\n";
}

/// Config-driven options shared by `train` and `run`.
struct ExperimentOptions {
    std::vector<std::string> config_paths;
    std::vector<std::string> sets;
    std::optional<int> experiment;
    std::string model, dataset, manifest, cache, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;

    void add_to(CLI::App* app, bool many_configs) {
        if (many_configs)
            app->add_option("--config", config_paths, "Experiment config file(s); one run per file")->check(CLI::ExistingFile);
        else
            app->add_option("--config", config_paths, "Experiment config file")->check(CLI::ExistingFile)->expected(0, 1);
        app->add_option("--experiment", experiment, "Experiment id")->check(CLI::Range(1, 4));
        app->add_option("--model", model, "Model id")
            ->check(CLI::IsMember({"bilstm", "encoder", "vgg16", "vgg19", "resnet50", "vit"}));
        app->add_option("--dataset", dataset, "Dataset id")->check(CLI::IsMember({"simpson", "mvsa"}));
        app->add_option("--manifest", manifest, "Manifest path");
        app->add_option("--cache", cache, "Detection cache path");
        app->add_option("--out", out, "Output directory");
        app->add_option("--seed", seed, "Master seed");
        app->add_option("--epochs", epochs, "Training epochs");
        app->add_option("--set", sets, "Override any config key (key=value), repeatable");
    }

    /// File keys first, then explicit flags, then --set.
    expctl::ExperimentConfig build(const std::string& config_path) const {
        expctl::ConfigMap m;
        if (!config_path.empty()) m = expctl::load_config_file(config_path);
        if (experiment) m["experiment"] = std::to_string(*experiment);
        if (!model.empty()) m["model"] = model;
        if (!dataset.empty()) m["dataset"] = dataset;
        auto cfg = expctl::ExperimentConfig::from_map(m);
        if (!manifest.empty()) cfg.set("manifest", manifest);
        if (!cache.empty()) cfg.set("detection_cache", cache);
        if (!out.empty()) cfg.set("out_dir", out);
        if (seed) cfg.set("seed", std::to_string(*seed));
        if (epochs) cfg.set("epochs", std::to_string(*epochs));
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (cfg.detection_cache.empty() && cfg.needs_detections()) cfg.detection_cache = default_cache_path();
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-and-object multimodal sentiment analysis experiments"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "quiet, warn, info or debug")
        ->check(CLI::IsMember({"quiet", "warn", "info", "debug"}));

    // prepare
    auto* prepare = app.add_subcommand("prepare", "Load, filter and label a manifest");
    std::string p_manifest, p_name, p_policy = "strict_equal", p_out, p_english = "auto";
    prepare->add_option("--manifest", p_manifest, "Input manifest (CSV or TSV)")->required()->check(CLI::ExistingFile);
    prepare->add_option("--dataset-name", p_name, "Dataset name (simpson or mvsa)")->required();
    prepare->add_option("--joint-policy", p_policy, "strict_equal or keep_polar")
        ->check(CLI::IsMember({"strict_equal", "keep_polar"}));
    prepare->add_option("--english-filter", p_english, "auto (SIMPSoN only), true or false")
        ->check(CLI::IsMember({"auto", "true", "false"}));
    prepare->add_option("--out", p_out, "Output manifest")->required();

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Run a detector over a manifest into the cache");
    std::string d_manifest, d_adapter, d_cache, d_image_root;
    std::optional<double> d_threshold;
    detect_cmd->add_option("--manifest", d_manifest, "Manifest")->required()->check(CLI::ExistingFile);
    detect_cmd->add_option("--adapter", d_adapter, "coco, vg or fixture")
        ->required()
        ->check(CLI::IsMember({"coco", "vg", "fixture"}));
    detect_cmd->add_option("--threshold", d_threshold, "Confidence threshold")->check(CLI::Range(0.0, 1.0));
    detect_cmd->add_option("--cache", d_cache, "Detection cache (JSONL)");
    detect_cmd->add_option("--image-root", d_image_root, "Base for relative image paths (default: manifest dir)");

    // objstats
    auto* objstats = app.add_subcommand("objstats", "Object-count histogram of a detection cache");
    std::string o_cache, o_source = "all";
    int o_decimals = 2;
    objstats->add_option("--cache", o_cache, "Detection cache (JSONL)");
    objstats->add_option("--source", o_source, "Detector id to count, or all");
    objstats->add_option("--decimals", o_decimals, "Decimal places")->check(CLI::Range(0, 12));

    // build-tems
    auto* build_tems = app.add_subcommand("build-tems", "Write TEMS sequences as JSONL");
    std::string b_manifest, b_cache, b_dataset, b_out, b_primary = "coco", b_secondary = "vg";
    bool b_single = false;
    build_tems->add_option("--manifest", b_manifest, "Manifest")->required()->check(CLI::ExistingFile);
    build_tems->add_option("--cache", b_cache, "Detection cache (JSONL)");
    build_tems->add_option("--dataset", b_dataset, "simpson or mvsa")
        ->required()
        ->check(CLI::IsMember({"simpson", "mvsa"}));
    build_tems->add_option("--out", b_out, "Output JSONL")->required();
    build_tems->add_option("--primary-source", b_primary, "Detector whose names come first");
    build_tems->add_option("--secondary-source", b_secondary, "Detector whose names follow (empty for none)");
    build_tems->add_flag("--single-object", b_single, "Only samples with exactly one primary detection, primary names only");

    // train
    auto* train = app.add_subcommand("train", "Train one model and save a checkpoint");
    ExperimentOptions t_opts;
    t_opts.add_to(train, false);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score a saved checkpoint");
    std::string e_ckpt, e_split = "test", e_out;
    evaluate->add_option("--checkpoint", e_ckpt, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--split", e_split, "test or train")->check(CLI::IsMember({"test", "train"}));
    evaluate->add_option("--out", e_out, "Result record path")->required();

    // compare
    auto* compare = app.add_subcommand("compare", "Tabulate, test and plot result records");
    std::vector<std::string> c_reports, c_pairs;
    std::string c_plots, c_out;
    double c_alpha = 0.05;
    compare->add_option("--reports", c_reports, "Result records")->required()->check(CLI::ExistingFile);
    compare->add_option("--plots", c_plots, "Directory for figures, table.csv and comparison.json")->required();
    compare->add_option("--pairs", c_pairs, "Record index pairs to test, e.g. 0:1 (default: all with equal ids)");
    compare->add_option("--alpha", c_alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    compare->add_option("--out", c_out, "Comparison JSON path (default: <plots>/comparison.json)");

    // run
    auto* run = app.add_subcommand("run", "Full experiment: prepare, train, evaluate, persist");
    ExperimentOptions r_opts;
    bool r_parallel = false;
    r_opts.add_to(run, true);
    run->add_flag("--parallel", r_parallel, "Run independent configs concurrently");

    CLI11_PARSE(app, argc, argv);

    try {
        if (log_level == "quiet") set_log_level(LogLevel::quiet);
        else if (log_level == "info") set_log_level(LogLevel::info);
        else if (log_level == "debug") set_log_level(LogLevel::debug);
        else set_log_level(LogLevel::warn);

        if (*prepare) {
            auto d = corpus::load_manifest(p_manifest, corpus::schema_for_path(p_manifest), p_name);
            const auto loaded = d.size();
            if (p_english == "true" || (p_english == "auto" && p_name == "simpson")) d = corpus::filter_english_text(d);
            const auto policy = corpus::parse_joint_policy(p_policy);
            // Samples missing a modality label pass through without a joint label.
            std::vector<corpus::Sample> kept;
            const auto paired = d.filter([](const corpus::Sample& s) { return s.image_label && s.text_label; });
            const auto derived = corpus::derive_joint_labels(paired, policy);
            for (const auto& s : d.samples()) {
                if (!(s.image_label && s.text_label)) kept.push_back(s);
                else if (const auto* j = derived.find(s.id)) kept.push_back(*j);
            }
            const corpus::Dataset out(d.name(), std::move(kept));
            ensure_parent(p_out);
            corpus::save_manifest(out, p_out, corpus::schema_for_path(p_out));
            const auto stats = corpus::summarize(out);
            std::cout << "loaded " << loaded << ", kept " << out.size() << " samples -> " << p_out << "\n"
                      << counts_line("image", stats.image) << "\n"
                      << counts_line("text", stats.text) << "\n"
                      << counts_line("joint", stats.joint) << "\n";
        } else if (*detect_cmd) {
            const auto d = corpus::load_manifest(d_manifest, corpus::schema_for_path(d_manifest));
            const auto cache_path = require_cache(d_cache);
            ensure_parent(cache_path);
            detect::DetectionCache cache(cache_path);
            cache.load();
            auto detector = detect::make_detector(d_adapter, d_threshold);
            const auto root = d_image_root.empty() ? fs::path(d_manifest).parent_path().string() : d_image_root;
            const auto stats = detect::detect_dataset(d, *detector, cache, root);
            std::cout << detector->id() << " @ " << eval::format_number(detector->threshold()) << ": detected "
                      << stats.detected << ", reused " << stats.reused << ", skipped " << stats.skipped
                      << ", failed " << stats.failed << " -> " << cache_path << "\n";
            if (stats.failed > 0) return 1;
        } else if (*objstats) {
            const auto idx = detect::load_detection_index(require_cache(o_cache));
            if (idx.size() == 0) throw Error("detection cache is empty");
            std::cout << detect::histogram_csv(detect::object_count_histogram(idx, o_source), o_decimals);
        } else if (*build_tems) {
            const auto d = corpus::load_manifest(b_manifest, corpus::schema_for_path(b_manifest), b_dataset);
            const auto idx = detect::load_detection_index(require_cache(b_cache));
            const auto policy = tems::LengthPolicy::for_dataset(b_dataset);
            const auto subset = b_single ? detect::single_object_subset(d, idx, b_primary) : d;
            const auto mode = b_single ? detect::NameMode::primary_only : detect::NameMode::merged;
            std::string lines;
            std::size_t missing = 0;
            for (const auto& s : subset.samples()) {
                if (!idx.contains(s.id)) {
                    ++missing;
                    continue;
                }
                const auto tokens = tems::tokenize(tems::clean_text(s.text));
                const auto names = detect::object_names_for(idx, s.id, b_primary, b_secondary, mode);
                const auto t = tems::build_tems(tokens, names, policy);
                nlohmann::json j = {{"sample_id", s.id},
                                    {"text_tokens", t.text_part},
                                    {"object_names", t.object_part},
                                    {"combined", t.combined}};
                lines += j.dump() + "\n";
            }
            write_text(b_out, lines);
            if (missing) log_warn(std::to_string(missing) + " samples without cached detections were skipped");
            std::cout << "wrote " << subset.size() - missing << " sequences -> " << b_out << "\n";
        } else if (*train) {
            const auto cfg = t_opts.build(t_opts.config_paths.empty() ? "" : t_opts.config_paths.front());
            const auto tm = expctl::train_model(cfg);
            const auto& last = tm.history.epochs.back();
            std::cout << "trained " << cfg.model << " for " << tm.history.epochs.size() << " epochs (train loss "
                      << eval::format_number(last.loss) << ", accuracy " << eval::format_number(last.accuracy)
                      << ") -> " << tm.checkpoint_dir << "\n";
        } else if (*evaluate) {
            const auto r = expctl::evaluate_checkpoint(e_ckpt, e_split);
            ensure_parent(e_out);
            eval::persist(r, e_out);
            print_metrics(r);
        } else if (*compare) {
            std::vector<eval::ResultRecord> records;
            for (const auto& p : c_reports) records.push_back(eval::load_record(p));
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            for (const auto& p : c_pairs) {
                const auto colon = p.find(':');
                if (colon == std::string::npos) throw Error("--pairs expects i:j, got '" + p + "'");
                pairs.emplace_back(std::stoul(p.substr(0, colon)), std::stoul(p.substr(colon + 1)));
            }
            const auto report = eval::compare_experiments(records, pairs, c_alpha);
            fs::create_directories(c_plots);
            const auto table = report.table_csv();
            write_text((fs::path(c_plots) / "table.csv").string(), table);
            write_text(c_out.empty() ? (fs::path(c_plots) / "comparison.json").string() : c_out,
                       report.to_json().dump(2) + "\n");
            std::cout << table;
            if (report.tests.empty()) std::cout << "# no record pairs share test ids; nothing to test\n";
            for (const auto& t : report.tests) {
                std::cout << "# " << t.dataset << ": " << t.test.a << " vs " << t.test.b << ": ";
                if (t.test.result)
                    std::cout << "W=" << eval::format_number(t.test.result->statistic) << " p="
                              << eval::format_number(t.test.result->p_value)
                              << (t.test.result->significant ? " (significant)" : "") << "\n";
                else
                    std::cout << t.test.note << "\n";
            }
            for (const auto& path : eval::emit_plots(report, c_plots)) std::cout << "# plot " << path << "\n";
        } else if (*run) {
            std::vector<expctl::ExperimentConfig> cfgs;
            if (r_opts.config_paths.empty()) cfgs.push_back(r_opts.build(""));
            for (const auto& p : r_opts.config_paths) cfgs.push_back(r_opts.build(p));
            if (cfgs.size() > 1 && !r_opts.out.empty())
                throw Error("--out cannot be shared by several configs; set out_dir in each config");
            for (const auto& r : expctl::run_experiments(cfgs, r_parallel)) print_metrics(r);
        }
    } catch (const std::exception& e) {
        std::cerr << "temsa: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
