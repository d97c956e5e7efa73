#include "temsa/models/image_model.hpp"

#include <fstream>
#include <sstream>

#include "temsa/common.hpp"

namespace temsa::models {

using ad::Var;
using nlohmann::json;

int backbone_feature_dim(const std::string& id) {
    if (id == "vgg16" || id == "vgg19") return 4096;
    if (id == "resnet50") return 2048;
    if (id == "vit") return 768;
    throw Error("unknown image backbone '" + id + "' (expected vgg16|vgg19|resnet50|vit)");
}

namespace {
constexpr int kGrid = 8;
}

FixtureBackbone::FixtureBackbone(std::string id, int feature_dim) : id_(std::move(id)), dim_(feature_dim) {
    backbone_feature_dim(id_);
    if (dim_ <= 0) throw Error("fixture backbone feature_dim must be positive");
}

void FixtureBackbone::register_params(ad::ParameterStore& store, Rng& rng) {
    store.add("backbone.proj", glorot(3 * kGrid * kGrid, dim_, rng), false);
}

Matrix FixtureBackbone::features(const ad::ParameterStore& store, const Example& ex, const Image* img) const {
    if (!img || img->empty()) throw Error("sample '" + ex.id + "' has no image");
    Eigen::RowVectorXd pooled = Eigen::RowVectorXd::Zero(3 * kGrid * kGrid);
    Eigen::RowVectorXd counts = Eigen::RowVectorXd::Zero(3 * kGrid * kGrid);
    for (int y = 0; y < img->height; ++y) {
        const int gy = y * kGrid / img->height;
        for (int x = 0; x < img->width; ++x) {
            const int gx = x * kGrid / img->width;
            for (int c = 0; c < 3; ++c) {
                const int src = img->channels == 1 ? 0 : c;
                const int cell = (c * kGrid + gy) * kGrid + gx;
                pooled(cell) += img->at(y, x, src) / 255.0;
                counts(cell) += 1.0;
            }
        }
    }
    pooled = (pooled.array() / counts.array().max(1.0) - 0.5).matrix();
    return (pooled * store.at("backbone.proj").value).array().tanh().matrix();
}

json FixtureBackbone::config() const { return {{"id", id_}, {"source", "fixture"}, {"feature_dim", dim_}}; }

PrecomputedBackbone::PrecomputedBackbone(std::string id, const std::string& table_path)
    : id_(std::move(id)), path_(table_path), dim_(backbone_feature_dim(id_)) {
    std::ifstream in(table_path);
    if (!in) throw Error("cannot open feature table '" + table_path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string sample;
        if (!(ss >> sample)) continue;
        std::vector<double> values;
        double v;
        while (ss >> v) values.push_back(v);
        if (static_cast<int>(values.size()) != dim_)
            throw Error(table_path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim_) + " " +
                        id_ + " features, found " + std::to_string(values.size()));
        rows_[sample] = Eigen::Map<Eigen::RowVectorXd>(values.data(), dim_);
    }
}

Matrix PrecomputedBackbone::features(const ad::ParameterStore&, const Example& ex, const Image*) const {
    auto it = rows_.find(ex.id);
    if (it == rows_.end()) throw Error("no " + id_ + " features for sample '" + ex.id + "' in " + path_);
    return it->second;
}

json PrecomputedBackbone::config() const { return {{"id", id_}, {"source", path_}}; }

std::unique_ptr<BackboneAdapter> make_backbone(const std::string& id, const std::string& source) {
    if (source == "fixture") return std::make_unique<FixtureBackbone>(id);
    if (source.rfind("fixture:", 0) == 0) return std::make_unique<FixtureBackbone>(id, std::stoi(source.substr(8)));
    return std::make_unique<PrecomputedBackbone>(id, source);
}

std::unique_ptr<BackboneAdapter> backbone_from_json(const json& j) {
    const std::string id = j.at("id").get<std::string>();
    const std::string source = j.at("source").get<std::string>();
    if (source == "fixture") return std::make_unique<FixtureBackbone>(id, j.value("feature_dim", 64));
    return std::make_unique<PrecomputedBackbone>(id, source);
}

HeadConfig ImageClassifier::default_head(const std::string& backbone_id) {
    HeadConfig h;
    h.activation = backbone_id == "vit" ? Activation::gelu : Activation::relu;
    return h;
}

ImageClassifier::ImageClassifier(std::unique_ptr<BackboneAdapter> backbone, HeadConfig head, std::uint64_t seed)
    : backbone_(std::move(backbone)), head_(head) {
    if (!backbone_) throw Error("image classifier needs a backbone");
    Rng rng(seed);
    backbone_->register_params(params_, rng);
    add_head_params(params_, "head", backbone_->feature_dim(), head_, rng);
}

json ImageClassifier::config() const {
    return {{"backbone", backbone_->config()},
            {"head",
             {{"dense_units", head_.dense_units},
              {"activation", std::string(to_string(head_.activation))},
              {"dropout", head_.dropout},
              {"num_classes", head_.num_classes}}}};
}

Var ImageClassifier::logits(ad::Tape& tape, std::span<const Example* const> batch, Mode mode, Rng* rng) {
    if (batch.empty()) throw Error("empty batch");
    Matrix feats(static_cast<Eigen::Index>(batch.size()), backbone_->feature_dim());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Example& ex = *batch[i];
        Image prepared;
        const Image* img = nullptr;
        if (backbone_->reads_pixels()) {
            if (!ex.image || ex.image->empty()) throw Error("sample '" + ex.id + "' has no image");
            prepared = (ex.image->width == kModelImageSize && ex.image->height == kModelImageSize)
                           ? *ex.image
                           : resize(*ex.image, kModelImageSize, kModelImageSize);
            if (mode == Mode::train && rng) prepared = image_augment(prepared, *rng);
            img = &prepared;
        }
        feats.row(static_cast<Eigen::Index>(i)) = backbone_->features(params_, ex, img);
    }
    return head_logits(tape, tape.constant(std::move(feats)), params_, "head", head_, mode, rng);
}

}  // namespace temsa::models
