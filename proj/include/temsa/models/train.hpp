#pragma once

#include <functional>
#include <unordered_map>

#include "temsa/models/classifier.hpp"

namespace temsa::models {

struct TrainConfig {
    double learning_rate = 1e-2;
    int batch_size = 32;
    int epochs = 10;
    /// Seeds the example order.
    std::uint64_t shuffle_seed = 0;
    /// Seeds dropout masks and image augmentation.
    std::uint64_t augment_seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool shuffle = true;

    /// Learning rate used for a model id: 1e-2 bilstm, 6e-6 encoder, 8e-4 image backbones.
    static double default_learning_rate(const std::string& model);
    static TrainConfig for_model(const std::string& model);
    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

class Adam {
public:
    Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    /// One update of every trainable parameter from its accumulated grad.
    void step(ad::ParameterStore& store);
    int steps() const { return t_; }

private:
    struct Moments {
        Matrix m, v;
    };
    double lr_, b1_, b2_, eps_;
    int t_ = 0;
    std::unordered_map<const ad::Parameter*, Moments> state_;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int steps = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Mini-batch Adam on mean cross-entropy. Labels are class indices 0..2.
/// The loss and accuracy of an epoch are averaged over its training batches.
TrainHistory train(Classifier& model, const std::vector<Example>& examples, const TrainConfig& cfg,
                   const EpochCallback& on_epoch = {});

/// Mean cross-entropy of the model on `examples` in eval mode.
double evaluate_loss(Classifier& model, const std::vector<Example>& examples, std::size_t batch_size = 32);

}  // namespace temsa::models
