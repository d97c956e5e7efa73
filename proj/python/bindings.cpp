#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "temsa/corpus.hpp"
#include "temsa/detect.hpp"
#include "temsa/eval.hpp"
#include "temsa/expctl.hpp"
#include "temsa/models/models.hpp"
#include "temsa/report.hpp"
#include "temsa/tems.hpp"

namespace py = pybind11;
using namespace temsa;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

std::vector<Sentiment> parse_labels(const std::vector<std::string>& names) {
    std::vector<Sentiment> out;
    out.reserve(names.size());
    for (const auto& n : names) {
        const auto s = parse_label(n);
        if (!s) throw Error("empty label");
        out.push_back(*s);
    }
    return out;
}

py::dict sample_dict(const corpus::Sample& s) {
    auto label = [](const std::optional<Sentiment>& l) -> py::object {
        return l ? py::object(py::str(std::string(to_string(*l)))) : py::object(py::none());
    };
    py::dict d;
    d["id"] = s.id;
    d["image_path"] = s.image_ref ? py::object(py::str(*s.image_ref)) : py::none();
    d["text"] = s.text;
    d["image_label"] = label(s.image_label);
    d["text_label"] = label(s.text_label);
    d["joint_label"] = label(s.joint_label);
    return d;
}

expctl::ExperimentConfig config_from_dict(const std::map<std::string, py::object>& values) {
    expctl::ConfigMap m;
    for (const auto& [k, v] : values) m[k] = py::str(v).cast<std::string>();
    return expctl::ExperimentConfig::from_map(m);
}

}  // namespace

PYBIND11_MODULE(_temsa, m) {
    m.doc() = "Text-and-object multimodal sentiment analysis core";
    py::register_exception<Error>(m, "TemsaError", PyExc_RuntimeError);

    // corpus
    m.def(
        "load_manifest",
        [](const std::string& path, const std::string& name) {
            const auto d = corpus::load_manifest(path, corpus::schema_for_path(path), name);
            py::list out;
            for (const auto& s : d.samples()) out.append(sample_dict(s));
            return out;
        },
        py::arg("path"), py::arg("dataset_name") = "");
    m.def(
        "joint_label",
        [](const std::string& image, const std::string& text, const std::string& policy) -> py::object {
            const auto j = corpus::joint_label_for(*parse_label(image), *parse_label(text),
                                                   corpus::parse_joint_policy(policy));
            return j ? py::object(py::str(std::string(to_string(*j)))) : py::none();
        },
        py::arg("image"), py::arg("text"), py::arg("policy") = "strict_equal",
        "Joint label for one image/text pair, or None when the pair is dropped.");
    m.def(
        "prepare",
        [](const std::string& manifest, const std::string& dataset_name, const std::string& policy,
           const std::string& out) {
            const auto d = corpus::load_manifest(manifest, corpus::schema_for_path(manifest), dataset_name);
            const auto paired = d.filter([](const corpus::Sample& s) { return s.image_label && s.text_label; });
            const auto derived = corpus::derive_joint_labels(paired, corpus::parse_joint_policy(policy));
            corpus::save_manifest(derived, out, corpus::schema_for_path(out));
            return derived.size();
        },
        py::arg("manifest"), py::arg("dataset_name"), py::arg("joint_policy"), py::arg("out"),
        "Derives joint labels for samples with both modality labels; returns the kept count.");
    m.def(
        "split_ids",
        [](const std::string& manifest, double ratio, std::uint64_t seed) {
            const auto d = corpus::load_manifest(manifest, corpus::schema_for_path(manifest));
            const auto [train, test] = corpus::split_train_test(d, ratio, seed);
            return std::make_pair(train.ids(), test.ids());
        },
        py::arg("manifest"), py::arg("ratio") = 0.8, py::arg("seed") = 0);

    // detect
    m.def(
        "object_count_histogram",
        [](const std::string& cache, const std::string& source) {
            const auto h = detect::object_count_histogram(detect::load_detection_index(cache), source);
            py::dict d;
            d["counts"] = h.counts;
            d["percent"] = h.percent;
            d["samples"] = h.samples;
            d["csv"] = detect::histogram_csv(h);
            return d;
        },
        py::arg("cache"), py::arg("source") = "all");
    m.def("normalize_object_name", [](const std::string& n) { return detect::normalize_object_name(n); });

    // tems
    m.def("clean_text", [](const std::string& raw) { return tems::clean_text(raw); });
    m.def("tokenize", [](const std::string& cleaned) { return tems::tokenize(cleaned); });
    m.def(
        "build_tems",
        [](const std::vector<std::string>& text_tokens, const std::vector<std::string>& names, int text_max,
           int max_objects) {
            const auto t = tems::build_tems(text_tokens, names, tems::LengthPolicy{text_max, max_objects});
            py::dict d;
            d["text_tokens"] = t.text_part;
            d["object_names"] = t.object_part;
            d["combined"] = t.combined;
            return d;
        },
        py::arg("text_tokens"), py::arg("object_names"), py::arg("text_max") = 55, py::arg("max_objects") = 20);
    m.def(
        "encode_pad",
        [](const std::vector<std::string>& tokens, int max_len, const std::vector<std::vector<std::string>>& corpus) {
            const auto vocab = tems::Vocabulary::build(corpus);
            return tems::encode_pad(tokens, max_len, vocab).indices;
        },
        py::arg("tokens"), py::arg("max_len"), py::arg("vocab_corpus"),
        "Indices of `tokens` under a vocabulary built from `vocab_corpus`, padded to max_len.");

    // models
    m.def(
        "self_attention",
        [](const Eigen::MatrixXd& q, const Eigen::MatrixXd& k, const Eigen::MatrixXd& v, bool scaled) {
            const auto r = models::self_attention(
                q, k, v, scaled ? models::AttentionScaling::scaled : models::AttentionScaling::unscaled);
            return std::make_pair(r.output, r.weights);
        },
        py::arg("q"), py::arg("k"), py::arg("v"), py::arg("scaled") = false, "Returns (output, weights).");
    m.def(
        "encoder_block",
        [](const Eigen::MatrixXd& x, const std::map<std::string, Eigen::MatrixXd>& weights, int num_heads, int ff_dim,
           double eps, bool scaled, const std::string& activation) {
            models::EncoderBlockConfig cfg;
            cfg.model_dim = static_cast<int>(x.cols());
            cfg.num_heads = num_heads;
            cfg.ff_dim = ff_dim;
            cfg.layer_norm_eps = eps;
            cfg.scaling = scaled ? models::AttentionScaling::scaled : models::AttentionScaling::unscaled;
            cfg.activation = models::parse_activation(activation);
            models::ad::ParameterStore store;
            Rng rng(0);
            models::add_encoder_block_params(store, "block", cfg, rng);
            for (const auto& [name, value] : weights) {
                auto& p = store.at("block." + name);
                if (p.value.rows() != value.rows() || p.value.cols() != value.cols())
                    throw Error("weight '" + name + "' has the wrong shape");
                p.value = value;
            }
            return models::encoder_block(x, store, "block", cfg);
        },
        py::arg("x"), py::arg("weights"), py::arg("num_heads"), py::arg("ff_dim"), py::arg("eps") = 1e-12,
        py::arg("scaled") = true, py::arg("activation") = "gelu",
        "One post-LN encoder block. Weight names: attn.{q,k,v,out}.{w,b}, attn.ln.{g,b}, ffn.{in,out}.{w,b}, "
        "ffn.ln.{g,b}; weights act on row vectors.");
    m.def(
        "bilstm_gradient_check",
        [](int embed_dim, int hidden, int seq_len, std::uint64_t seed) {
            models::BiLstmConfig cfg;
            cfg.vocab_size = 12;
            cfg.embed_dim = embed_dim;
            cfg.hidden_units = hidden;
            models::BiLstmClassifier model(cfg, seed);
            Rng rng(seed);
            std::vector<models::Example> batch(2);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                batch[i].label = static_cast<int>(i % 3);
                for (int t = 0; t < seq_len; ++t) batch[i].indices.push_back(1 + static_cast<int>(rng.below(11)));
            }
            return models::gradient_check(model, batch).max_relative_error;
        },
        py::arg("embed_dim") = 4, py::arg("hidden") = 3, py::arg("seq_len") = 5, py::arg("seed") = 0,
        "Largest finite-difference relative gradient error of a tiny BiLSTM.");

    // eval
    m.def(
        "metrics",
        [](const std::vector<std::string>& preds, const std::vector<std::string>& golds, const std::string& averaging) {
            const auto ms = eval::metrics(eval::confusion(parse_labels(preds), parse_labels(golds)),
                                          eval::parse_averaging(averaging));
            return to_python(eval::to_json(ms));
        },
        py::arg("predictions"), py::arg("golds"), py::arg("averaging") = "macro");
    m.def(
        "wilcoxon",
        [](const std::vector<double>& x, const std::vector<double>& y, double alpha, const std::string& zeros) {
            const auto z = zeros == "pratt" ? eval::ZeroMethod::pratt : eval::ZeroMethod::wilcox;
            return to_python(eval::to_json(eval::wilcoxon_signed_rank(x, y, alpha, z)));
        },
        py::arg("x"), py::arg("y"), py::arg("alpha") = 0.05, py::arg("zeros") = "wilcox");
    m.def("signed_rank_null_pmf", &eval::signed_rank_null_pmf, py::arg("n"));
    m.def(
        "compare",
        [](const std::vector<std::string>& reports, const std::string& plots_dir, double alpha) {
            std::vector<eval::ResultRecord> records;
            for (const auto& p : reports) records.push_back(eval::load_record(p));
            const auto report = eval::compare_experiments(records, {}, alpha);
            py::dict d;
            d["report"] = to_python(report.to_json());
            d["table_csv"] = report.table_csv();
            d["plots"] = plots_dir.empty() ? std::vector<std::string>{} : eval::emit_plots(report, plots_dir);
            return d;
        },
        py::arg("reports"), py::arg("plots_dir") = "", py::arg("alpha") = 0.05);
    m.def("load_record", [](const std::string& path) { return to_python(eval::to_json(eval::load_record(path))); });
    m.def(
        "persist_record",
        [](const py::object& record, const std::string& path) {
            return eval::persist(eval::record_from_json(from_python(record)), path);
        },
        py::arg("record"), py::arg("path"));

    // expctl
    m.def(
        "config_defaults",
        [](int experiment, const std::string& dataset, const std::string& model) {
            return expctl::ExperimentConfig::defaults(experiment, dataset, model).to_map();
        },
        py::arg("experiment"), py::arg("dataset"), py::arg("model"));
    m.def(
        "run_experiment",
        [](const std::map<std::string, py::object>& config) {
            const auto cfg = config_from_dict(config);
            eval::ResultRecord r;
            {
                py::gil_scoped_release release;
                r = expctl::run_experiment(cfg);
            }
            return to_python(eval::to_json(r));
        },
        py::arg("config"), "Runs one experiment from config keys; returns the result record as a dict.");
    m.def(
        "evaluate_checkpoint",
        [](const std::string& dir, const std::string& split) {
            eval::ResultRecord r;
            {
                py::gil_scoped_release release;
                r = expctl::evaluate_checkpoint(dir, split);
            }
            return to_python(eval::to_json(r));
        },
        py::arg("checkpoint_dir"), py::arg("split") = "test");
    m.def(
        "make_desk_fixture",
        [](const std::string& dir, std::size_t samples, std::uint64_t seed) {
            expctl::DeskFixtureOptions o;
            o.samples = samples;
            o.seed = seed;
            const auto f = expctl::make_desk_fixture(dir, o);
            py::dict d;
            d["manifest"] = f.manifest;
            d["detection_cache"] = f.detection_cache;
            d["image_root"] = f.image_root;
            return d;
        },
        py::arg("dir"), py::arg("samples") = 200, py::arg("seed") = 0);
}
