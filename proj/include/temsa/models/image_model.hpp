#pragma once

#include <map>

#include "temsa/models/classifier.hpp"

namespace temsa::models {

/// Frozen feature extractor with its classification layer removed.
class BackboneAdapter {
public:
    virtual ~BackboneAdapter() = default;
    /// vgg16, vgg19, resnet50 or vit.
    virtual std::string id() const = 0;
    virtual int feature_dim() const = 0;
    /// Registers frozen parameters, if any, under `backbone.`.
    virtual void register_params(ad::ParameterStore& store, Rng& rng) = 0;
    /// 1 x feature_dim features. `img` is the (possibly augmented) 224x224
    /// image and may be null for adapters that do not read pixels.
    virtual Matrix features(const ad::ParameterStore& store, const Example& ex, const Image* img) const = 0;
    virtual bool reads_pixels() const = 0;
    virtual nlohmann::json config() const = 0;
};

/// Width of the penultimate features of each supported backbone.
int backbone_feature_dim(const std::string& id);

/// Deterministic stand-in: 8x8 average pooling per channel followed by a
/// fixed random projection and tanh. Its projection is a frozen parameter.
class FixtureBackbone final : public BackboneAdapter {
public:
    FixtureBackbone(std::string id, int feature_dim = 64);

    std::string id() const override { return id_; }
    int feature_dim() const override { return dim_; }
    void register_params(ad::ParameterStore& store, Rng& rng) override;
    Matrix features(const ad::ParameterStore& store, const Example& ex, const Image* img) const override;
    bool reads_pixels() const override { return true; }
    nlohmann::json config() const override;

private:
    std::string id_;
    int dim_;
};

/// Features exported offline from the real network, one `id f1 ... fd` line
/// per sample. The width must equal backbone_feature_dim(id).
class PrecomputedBackbone final : public BackboneAdapter {
public:
    PrecomputedBackbone(std::string id, const std::string& table_path);

    std::string id() const override { return id_; }
    int feature_dim() const override { return dim_; }
    void register_params(ad::ParameterStore&, Rng&) override {}
    Matrix features(const ad::ParameterStore& store, const Example& ex, const Image* img) const override;
    bool reads_pixels() const override { return false; }
    nlohmann::json config() const override;

private:
    std::string id_;
    std::string path_;
    int dim_;
    std::map<std::string, Eigen::RowVectorXd> rows_;
};

/// `source` is "fixture" (optionally "fixture:<dim>") or a feature table path.
std::unique_ptr<BackboneAdapter> make_backbone(const std::string& id, const std::string& source);
std::unique_ptr<BackboneAdapter> backbone_from_json(const nlohmann::json& j);

/// Frozen backbone + trainable head (`head.dense`, `head.out`). Training mode
/// applies one random flip/rotation per image before the backbone.
class ImageClassifier final : public Classifier {
public:
    ImageClassifier(std::unique_ptr<BackboneAdapter> backbone, HeadConfig head, std::uint64_t seed);
    /// Head defaults for a backbone: relu, except gelu for vit.
    static HeadConfig default_head(const std::string& backbone_id);

    std::string kind() const override { return backbone_->id(); }
    nlohmann::json config() const override;
    ad::Var logits(ad::Tape& tape, std::span<const Example* const> batch, Mode mode, Rng* rng) override;

    const BackboneAdapter& backbone() const { return *backbone_; }

private:
    std::unique_ptr<BackboneAdapter> backbone_;
    HeadConfig head_;
};

}  // namespace temsa::models
