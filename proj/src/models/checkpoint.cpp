#include "temsa/models/checkpoint.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "temsa/common.hpp"
#include "temsa/models/bilstm.hpp"
#include "temsa/models/encoder.hpp"
#include "temsa/models/image_model.hpp"

namespace temsa::models {

namespace fs = std::filesystem;
using nlohmann::json;

std::unique_ptr<Classifier> make_classifier(const std::string& kind, const json& config, std::uint64_t seed) {
    if (kind == "bilstm") return std::make_unique<BiLstmClassifier>(BiLstmConfig::from_json(config), seed);
    if (kind == "encoder") return std::make_unique<EncoderClassifier>(EncoderConfig::from_json(config), seed);
    if (kind == "vgg16" || kind == "vgg19" || kind == "resnet50" || kind == "vit") {
        auto backbone = backbone_from_json(config.at("backbone"));
        HeadConfig head = ImageClassifier::default_head(kind);
        if (config.contains("head")) {
            const auto& h = config.at("head");
            head.dense_units = h.value("dense_units", head.dense_units);
            head.activation = parse_activation(h.value("activation", std::string(to_string(head.activation))));
            head.dropout = h.value("dropout", head.dropout);
            head.num_classes = h.value("num_classes", head.num_classes);
        }
        return std::make_unique<ImageClassifier>(std::move(backbone), head, seed);
    }
    throw Error("unknown model kind '" + kind + "' (expected bilstm|encoder|vgg16|vgg19|resnet50|vit)");
}

void save_checkpoint(const std::string& dir, const Classifier& model, const json& extra,
                     const tems::Vocabulary* vocab) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create checkpoint directory '" + dir + "': " + ec.message());

    json tensors = json::array();
    std::ofstream blob(fs::path(dir) / "tensors.bin", std::ios::binary);
    if (!blob) throw Error("cannot write " + (fs::path(dir) / "tensors.bin").string());
    std::uint64_t offset = 0;
    for (const ad::Parameter* p : model.params().all()) {
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = p->value;
        const auto bytes = static_cast<std::streamsize>(rm.size() * static_cast<Eigen::Index>(sizeof(double)));
        blob.write(reinterpret_cast<const char*>(rm.data()), bytes);
        tensors.push_back({{"name", p->name},
                           {"rows", p->value.rows()},
                           {"cols", p->value.cols()},
                           {"offset", offset},
                           {"trainable", p->trainable}});
        offset += static_cast<std::uint64_t>(bytes);
    }
    blob.close();
    if (!blob) throw Error("failed writing checkpoint tensors in '" + dir + "'");

    json manifest = {{"format", "temsa-checkpoint"},
                     {"format_version", kCheckpointFormatVersion},
                     {"kind", model.kind()},
                     {"config", model.config()},
                     {"tensors", tensors},
                     {"extra", extra}};
    if (vocab) {
        vocab->save((fs::path(dir) / "vocab.txt").string());
        manifest["vocab"] = "vocab.txt";
        manifest["vocab_id"] = vocab->id();
        manifest["vocab_unk"] = vocab->token_at(vocab->oov());
    }
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw Error("cannot write checkpoint manifest in '" + dir + "'");
    out << manifest.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& dir, bool partial, std::uint64_t init_seed) {
    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw Error("no checkpoint manifest at '" + manifest_path.string() + "'");
    LoadedCheckpoint out;
    try {
        out.manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("malformed checkpoint manifest '" + manifest_path.string() + "': " + e.what());
    }
    const auto& m = out.manifest;
    if (m.value("format_version", -1) != kCheckpointFormatVersion)
        throw Error("checkpoint '" + dir + "' has format_version " + m.value("format_version", json(-1)).dump() +
                    ", expected " + std::to_string(kCheckpointFormatVersion));
    out.model = make_classifier(m.at("kind").get<std::string>(), m.at("config"), init_seed);

    std::ifstream blob(fs::path(dir) / "tensors.bin", std::ios::binary);
    if (!blob) throw Error("checkpoint '" + dir + "' is missing tensors.bin");
    std::vector<std::string> seen;
    for (const auto& t : m.at("tensors")) {
        const std::string name = t.at("name").get<std::string>();
        if (!out.model->params().contains(name))
            throw Error("checkpoint tensor '" + name + "' does not belong to a " + m.at("kind").get<std::string>() +
                        " model");
        auto& p = out.model->params().at(name);
        const auto rows = t.at("rows").get<Eigen::Index>(), cols = t.at("cols").get<Eigen::Index>();
        if (rows != p.value.rows() || cols != p.value.cols())
            throw Error("checkpoint tensor '" + name + "' is " + std::to_string(rows) + "x" + std::to_string(cols) +
                        ", model expects " + std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
        blob.seekg(static_cast<std::streamoff>(t.at("offset").get<std::uint64_t>()));
        blob.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
        if (!blob) throw Error("checkpoint tensor '" + name + "' is truncated in tensors.bin");
        p.value = rm;
        p.trainable = t.value("trainable", p.trainable);
        seen.push_back(name);
    }
    if (!partial) {
        for (const ad::Parameter* p : out.model->params().all())
            if (std::find(seen.begin(), seen.end(), p->name) == seen.end())
                throw Error("checkpoint '" + dir + "' lacks tensor '" + p->name + "'");
    }
    if (m.contains("vocab")) {
        const auto unk = m.value("vocab_unk", std::string("<unk>"));
        out.vocab = tems::Vocabulary::load((fs::path(dir) / m.at("vocab").get<std::string>()).string(), unk);
    }
    return out;
}

}  // namespace temsa::models
