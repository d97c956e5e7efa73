#include <algorithm>
#include <cmath>
#include <numeric>

#include "temsa/eval.hpp"

namespace temsa::eval {

long ConfusionMatrix::total() const {
    long t = 0;
    for (const auto& row : counts)
        for (long c : row) t += c;
    return t;
}

long ConfusionMatrix::trace() const {
    long t = 0;
    for (int i = 0; i < kNumClasses; ++i) t += counts[i][i];
    return t;
}

ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& golds) {
    if (preds.size() != golds.size())
        throw Error("confusion: " + std::to_string(preds.size()) + " predictions vs " + std::to_string(golds.size()) +
                    " gold labels");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] < 0 || preds[i] >= kNumClasses || golds[i] < 0 || golds[i] >= kNumClasses)
            throw Error("confusion: label index outside the 3-class vocabulary at position " + std::to_string(i));
        ++cm.counts[golds[i]][preds[i]];
    }
    return cm;
}

ConfusionMatrix confusion(const std::vector<Sentiment>& preds, const std::vector<Sentiment>& golds) {
    std::vector<int> p, g;
    for (auto s : preds) p.push_back(class_index(s));
    for (auto s : golds) g.push_back(class_index(s));
    return confusion(p, g);
}

std::string_view to_string(Averaging a) { return a == Averaging::weighted ? "weighted" : "macro"; }

Averaging parse_averaging(std::string_view s) {
    if (s == "macro") return Averaging::macro;
    if (s == "weighted") return Averaging::weighted;
    throw Error("unknown averaging mode '" + std::string(s) + "' (expected macro|weighted)");
}

MetricSet metrics(const ConfusionMatrix& cm, Averaging averaging) {
    const long total = cm.total();
    if (total <= 0) throw Error("metrics: confusion matrix is empty");
    MetricSet m;
    m.averaging = averaging;
    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    for (int c = 0; c < kNumClasses; ++c) {
        long predicted = 0, support = 0;
        for (int r = 0; r < kNumClasses; ++r) {
            predicted += cm.counts[r][c];
            support += cm.counts[c][r];
        }
        const double tp = static_cast<double>(cm.counts[c][c]);
        const double p = predicted ? tp / static_cast<double>(predicted) : 0.0;
        const double r = support ? tp / static_cast<double>(support) : 0.0;
        const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        const double w = averaging == Averaging::macro ? 1.0 / kNumClasses
                                                       : static_cast<double>(support) / static_cast<double>(total);
        m.precision += w * p;
        m.recall += w * r;
        m.f1 += w * f;
    }
    return m;
}

}  // namespace temsa::eval
