#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "temsa/image.hpp"
#include "temsa/models/layers.hpp"

namespace temsa::models {

/// One model input. Text models read `indices` (padded encoding); image
/// models read `image` or look features up by `id`.
struct Example {
    std::string id;
    std::vector<int> indices;
    std::shared_ptr<const Image> image;
    int label = -1;
};

/// A trainable 3-way classifier over Examples. Parameters live in the
/// classifier's store; inference in eval mode only reads them.
class Classifier {
public:
    virtual ~Classifier() = default;

    /// Model id: bilstm, encoder, vgg16, vgg19, resnet50 or vit.
    virtual std::string kind() const = 0;
    /// Architecture settings sufficient to rebuild an identical model.
    virtual nlohmann::json config() const = 0;
    /// Unnormalised class scores, one row per example.
    virtual ad::Var logits(ad::Tape& tape, std::span<const Example* const> batch, Mode mode, Rng* rng) = 0;

    ad::ParameterStore& params() { return params_; }
    const ad::ParameterStore& params() const { return params_; }

protected:
    ad::ParameterStore params_;
};

/// Index of the largest entry; ties go to the lowest index.
int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& probs);

/// N x 3 class probabilities in eval mode.
Matrix probabilities(Classifier& model, const std::vector<Example>& examples, std::size_t batch_size = 32);
std::vector<int> predict(Classifier& model, const std::vector<Example>& examples, std::size_t batch_size = 32);

}  // namespace temsa::models
