#include "temsa/models/classifier.hpp"

#include "temsa/common.hpp"

namespace temsa::models {

int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& probs) {
    if (probs.size() == 0) throw Error("argmax of an empty vector");
    int best = 0;
    for (int i = 1; i < probs.size(); ++i)
        if (probs(i) > probs(best)) best = i;
    return best;
}

Matrix probabilities(Classifier& model, const std::vector<Example>& examples, std::size_t batch_size) {
    if (batch_size == 0) throw Error("batch size must be positive");
    Matrix out(static_cast<Eigen::Index>(examples.size()), kNumClasses);
    for (std::size_t start = 0; start < examples.size(); start += batch_size) {
        const std::size_t end = std::min(examples.size(), start + batch_size);
        std::vector<const Example*> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(&examples[i]);
        ad::Tape tape(false);
        const Matrix probs = ad::softmax_rows_value(model.logits(tape, batch, Mode::eval, nullptr).value());
        out.middleRows(static_cast<Eigen::Index>(start), probs.rows()) = probs;
    }
    return out;
}

std::vector<int> predict(Classifier& model, const std::vector<Example>& examples, std::size_t batch_size) {
    const Matrix probs = probabilities(model, examples, batch_size);
    std::vector<int> out;
    out.reserve(examples.size());
    for (Eigen::Index r = 0; r < probs.rows(); ++r) out.push_back(argmax(probs.row(r)));
    return out;
}

}  // namespace temsa::models
