#include "temsa/models/train.hpp"

#include <cmath>
#include <numeric>

#include "temsa/common.hpp"

namespace temsa::models {

using nlohmann::json;

double TrainConfig::default_learning_rate(const std::string& model) {
    if (model == "bilstm") return 1e-2;
    if (model == "encoder") return 6e-6;
    if (model == "vgg16" || model == "vgg19" || model == "resnet50" || model == "vit") return 8e-4;
    throw Error("unknown model '" + model + "'");
}

TrainConfig TrainConfig::for_model(const std::string& model) {
    TrainConfig c;
    c.learning_rate = default_learning_rate(model);
    return c;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw Error("learning_rate must be non-negative");
    if (batch_size <= 0) throw Error("batch_size must be positive");
    if (epochs < 1) throw Error("epochs must be at least 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw Error("Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw Error("Adam epsilon must be positive");
}

json TrainConfig::to_json() const {
    return {{"optimizer", "adam"},          {"learning_rate", learning_rate}, {"batch_size", batch_size},
            {"epochs", epochs},             {"shuffle_seed", shuffle_seed},   {"augment_seed", augment_seed},
            {"beta1", beta1},               {"beta2", beta2},                 {"epsilon", epsilon},
            {"shuffle", shuffle}};
}

TrainConfig TrainConfig::from_json(const json& j) {
    TrainConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.shuffle_seed = j.value("shuffle_seed", c.shuffle_seed);
    c.augment_seed = j.value("augment_seed", c.augment_seed);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.shuffle = j.value("shuffle", c.shuffle);
    c.validate();
    return c;
}

Adam::Adam(double lr, double beta1, double beta2, double eps) : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

void Adam::step(ad::ParameterStore& store) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    for (ad::Parameter* p : store.all()) {
        if (!p->trainable) continue;
        auto& s = state_[p];
        if (s.m.size() == 0) {
            s.m = Matrix::Zero(p->value.rows(), p->value.cols());
            s.v = Matrix::Zero(p->value.rows(), p->value.cols());
        }
        s.m = b1_ * s.m + (1.0 - b1_) * p->grad;
        s.v = b2_ * s.v + (1.0 - b2_) * p->grad.cwiseProduct(p->grad);
        p->value.array() -= lr_ * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + eps_);
    }
}

TrainHistory train(Classifier& model, const std::vector<Example>& examples, const TrainConfig& cfg,
                   const EpochCallback& on_epoch) {
    cfg.validate();
    if (examples.empty()) throw Error("training set is empty");
    for (const auto& ex : examples)
        if (ex.label < 0 || ex.label >= kNumClasses)
            throw Error("training example '" + ex.id + "' has no valid label");

    Adam adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    Rng order_rng(cfg.shuffle_seed);
    Rng noise_rng(cfg.augment_seed);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

    TrainHistory history;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle) order_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<const Example*> batch;
            std::vector<int> targets;
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(&examples[order[i]]);
                targets.push_back(examples[order[i]].label);
            }
            ad::Tape tape;
            model.params().zero_grad();
            ad::Var logits = model.logits(tape, batch, Mode::train, &noise_rng);
            ad::Var loss = ad::cross_entropy(logits, targets);
            tape.backward(loss);
            adam.step(model.params());
            loss_sum += loss.value()(0, 0) * static_cast<double>(batch.size());
            for (Eigen::Index r = 0; r < logits.rows(); ++r)
                if (argmax(logits.value().row(r)) == targets[static_cast<std::size_t>(r)]) ++correct;
        }
        EpochStats stats{epoch, loss_sum / static_cast<double>(examples.size()),
                         static_cast<double>(correct) / static_cast<double>(examples.size())};
        history.epochs.push_back(stats);
        log_info("epoch " + std::to_string(epoch) + " loss " + std::to_string(stats.loss) + " accuracy " +
                 std::to_string(stats.accuracy));
        if (on_epoch) on_epoch(stats);
    }
    history.steps = adam.steps();
    return history;
}

double evaluate_loss(Classifier& model, const std::vector<Example>& examples, std::size_t batch_size) {
    if (examples.empty()) throw Error("evaluation set is empty");
    const Matrix probs = probabilities(model, examples, batch_size);
    double total = 0.0;
    for (std::size_t i = 0; i < examples.size(); ++i)
        total -= std::log(probs(static_cast<Eigen::Index>(i), examples[i].label));
    return total / static_cast<double>(examples.size());
}

}  // namespace temsa::models
