#include "temsa/models/gradcheck.hpp"

#include <cmath>

#include "temsa/common.hpp"

namespace temsa::models {

namespace {

std::vector<int> labels_of(const std::vector<Example>& batch) {
    std::vector<int> out;
    for (const auto& ex : batch) out.push_back(ex.label);
    return out;
}

std::vector<const Example*> pointers(const std::vector<Example>& batch) {
    std::vector<const Example*> out;
    for (const auto& ex : batch) out.push_back(&ex);
    return out;
}

}  // namespace

GradCheckResult gradient_check(Classifier& model, const std::vector<Example>& batch, double eps,
                               std::size_t max_entries) {
    if (batch.empty()) throw Error("gradient check needs at least one example");
    const auto targets = labels_of(batch);
    const auto ptrs = pointers(batch);
    auto loss = [&]() {
        ad::Tape tape(false);
        return ad::cross_entropy(model.logits(tape, ptrs, Mode::eval, nullptr), targets).value()(0, 0);
    };

    model.params().zero_grad();
    {
        ad::Tape tape;
        tape.backward(ad::cross_entropy(model.logits(tape, ptrs, Mode::eval, nullptr), targets));
    }

    GradCheckResult result;
    for (ad::Parameter* p : model.params().all()) {
        if (!p->trainable) continue;
        const auto n = static_cast<std::size_t>(p->value.size());
        const std::size_t stride = (max_entries == 0 || n <= max_entries) ? 1 : n / max_entries;
        for (std::size_t k = 0; k < n; k += stride) {
            double* v = p->value.data() + k;
            const double saved = *v;
            *v = saved + eps;
            const double up = loss();
            *v = saved - eps;
            const double down = loss();
            *v = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double analytic = p->grad.data()[k];
            const double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
            ++result.entries_checked;
            if (rel > result.max_relative_error) {
                result.max_relative_error = rel;
                result.worst_parameter = p->name;
            }
        }
    }
    model.params().zero_grad();
    return result;
}

}  // namespace temsa::models
