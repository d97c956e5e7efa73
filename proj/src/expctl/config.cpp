#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "temsa/expctl.hpp"
#include "temsa/models/layers.hpp"

namespace temsa::expctl {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw Error("config key '" + key + "': '" + value + "' is not a number");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw Error("config key '" + key + "': '" + value + "' is not a boolean");
}

std::string format_double(double v) { return eval::format_number(v); }

bool is_image_model_id(const std::string& m) {
    return m == "vgg16" || m == "vgg19" || m == "resnet50" || m == "vit";
}

}  // namespace

ConfigMap parse_config_text(std::string_view text) {
    ConfigMap out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(line_no) + ": expected key=value");
        auto key = trim(std::string_view(content).substr(0, eq));
        auto value = trim(std::string_view(content).substr(eq + 1));
        if (key.empty()) throw Error("config line " + std::to_string(line_no) + ": empty key");
        if (!out.emplace(key, value).second)
            throw Error("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    return out;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_text(ss.str());
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

ExperimentConfig ExperimentConfig::defaults(int experiment, const std::string& dataset, const std::string& model) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.dataset = dataset;
    c.model = model;
    c.policy = tems::LengthPolicy::for_dataset(dataset);
    c.learning_rate = models::TrainConfig::default_learning_rate(model);
    return c;
}

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& values) {
    auto get = [&](const char* k, const char* fallback) {
        const auto it = values.find(k);
        return it == values.end() ? std::string(fallback) : it->second;
    };
    const auto experiment = parse_number<int>("experiment", get("experiment", "3"));
    auto c = defaults(experiment, get("dataset", "mvsa"), get("model", "bilstm"));
    for (const auto& [k, v] : values) c.set(k, v);
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) { return from_map(load_config_file(path)); }

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "experiment") experiment = parse_number<int>(key, value);
    else if (key == "dataset") {
        if (value != dataset) {
            policy = tems::LengthPolicy::for_dataset(value);
        }
        dataset = value;
    } else if (key == "model") {
        if (value != model) learning_rate = models::TrainConfig::default_learning_rate(value);
        model = value;
    }
    else if (key == "manifest") manifest = value;
    else if (key == "detection_cache") detection_cache = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "image_root") image_root = value;
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "split_ratio") split_ratio = parse_number<double>(key, value);
    else if (key == "stratify") stratify = value;
    else if (key == "joint_policy") joint_policy = corpus::parse_joint_policy(value);
    else if (key == "derive_joint") derive_joint = value;
    else if (key == "english_filter") english_filter = value;
    else if (key == "max_samples") max_samples = parse_number<std::size_t>(key, value);
    else if (key == "text_max") policy.text_max = parse_number<int>(key, value);
    else if (key == "max_objects") policy.max_objects = parse_number<int>(key, value);
    else if (key == "primary_source") primary_source = value;
    else if (key == "secondary_source") secondary_source = value;
    else if (key == "epochs") epochs = parse_number<int>(key, value);
    else if (key == "batch_size") batch_size = parse_number<int>(key, value);
    else if (key == "learning_rate") learning_rate = parse_number<double>(key, value);
    else if (key == "averaging") averaging = eval::parse_averaging(value);
    else if (key == "alpha") alpha = parse_number<double>(key, value);
    else if (key == "embeddings") embeddings = value;
    else if (key == "embed_dim") embed_dim = parse_number<int>(key, value);
    else if (key == "hidden_units") hidden_units = parse_number<int>(key, value);
    else if (key == "dropout") dropout = parse_number<double>(key, value);
    else if (key == "freeze_embeddings") freeze_embeddings = parse_bool(key, value);
    else if (key == "encoder_dir") encoder_dir = value;
    else if (key == "encoder_preset") encoder_preset = value;
    else if (key == "encoder_freeze") encoder_freeze = parse_bool(key, value);
    else if (key == "attention") attention = value;
    else if (key == "backbone_source") backbone_source = value;
    else throw Error("unknown config key '" + key + "'");
}

ConfigMap ExperimentConfig::to_map() const {
    return {
        {"experiment", std::to_string(experiment)},
        {"dataset", dataset},
        {"model", model},
        {"manifest", manifest},
        {"detection_cache", detection_cache},
        {"out_dir", out_dir},
        {"image_root", image_root},
        {"seed", std::to_string(seed)},
        {"split_ratio", format_double(split_ratio)},
        {"stratify", stratify},
        {"joint_policy", std::string(corpus::to_string(joint_policy))},
        {"derive_joint", derive_joint},
        {"english_filter", english_filter},
        {"max_samples", std::to_string(max_samples)},
        {"text_max", std::to_string(policy.text_max)},
        {"max_objects", std::to_string(policy.max_objects)},
        {"primary_source", primary_source},
        {"secondary_source", secondary_source},
        {"epochs", std::to_string(epochs)},
        {"batch_size", std::to_string(batch_size)},
        {"learning_rate", format_double(learning_rate)},
        {"averaging", std::string(eval::to_string(averaging))},
        {"alpha", format_double(alpha)},
        {"embeddings", embeddings},
        {"embed_dim", std::to_string(embed_dim)},
        {"hidden_units", std::to_string(hidden_units)},
        {"dropout", format_double(dropout)},
        {"freeze_embeddings", freeze_embeddings ? "true" : "false"},
        {"encoder_dir", encoder_dir},
        {"encoder_preset", encoder_preset},
        {"encoder_freeze", encoder_freeze ? "true" : "false"},
        {"attention", attention},
        {"backbone_source", backbone_source},
    };
}

bool ExperimentConfig::is_image_model() const { return is_image_model_id(model); }

corpus::LabelField ExperimentConfig::required_label() const {
    switch (experiment) {
        case 1: return corpus::LabelField::image;
        case 2: return corpus::LabelField::text;
        case 3:
        case 4: return corpus::LabelField::joint;
        default: throw Error("experiment must be 1, 2, 3 or 4 (got " + std::to_string(experiment) + ")");
    }
}

void ExperimentConfig::validate() const {
    if (experiment < 1 || experiment > 4)
        throw Error("experiment must be 1, 2, 3 or 4 (got " + std::to_string(experiment) + ")");
    if (dataset != "simpson" && dataset != "mvsa") throw Error("dataset must be simpson or mvsa (got '" + dataset + "')");
    const bool text_model = model == "bilstm" || model == "encoder";
    if (!text_model && !is_image_model_id(model)) throw Error("unknown model '" + model + "'");
    if (experiment == 1 && !is_image_model())
        throw Error("experiment 1 requires an image model (vgg16, vgg19, resnet50 or vit), got '" + model + "'");
    if (experiment != 1 && !text_model)
        throw Error("experiment " + std::to_string(experiment) + " requires a text model (bilstm or encoder), got '" +
                    model + "'");
    if (needs_detections() && detection_cache.empty())
        throw Error("experiment " + std::to_string(experiment) + " requires a detection cache (detection_cache)");
    if (manifest.empty()) throw Error("config has no manifest");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error("split_ratio must lie in (0, 1)");
    if (stratify != "none" && stratify != "image" && stratify != "text" && stratify != "joint")
        throw Error("stratify must be none, image, text or joint");
    if (derive_joint != "auto" && derive_joint != "always" && derive_joint != "never")
        throw Error("derive_joint must be auto, always or never");
    if (english_filter != "auto" && english_filter != "true" && english_filter != "false")
        throw Error("english_filter must be auto, true or false");
    policy.validate();
    if (needs_detections() && primary_source.empty()) throw Error("primary_source must not be empty");
    if (embed_dim <= 0 || hidden_units <= 0) throw Error("embed_dim and hidden_units must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
    if (encoder_preset != "base" && encoder_preset != "tiny") throw Error("encoder_preset must be base or tiny");
    models::parse_attention_scaling(attention);
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
    models::TrainConfig tc;
    tc.learning_rate = learning_rate;
    tc.batch_size = batch_size;
    tc.epochs = epochs;
    tc.validate();
}

}  // namespace temsa::expctl
