#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "temsa/common.hpp"

namespace temsa::eval {

/// Rows are gold, columns predicted, both in Sentiment index order
/// (positive, negative, neutral).
struct ConfusionMatrix {
    std::array<std::array<long, kNumClasses>, kNumClasses> counts{};

    long total() const;
    long trace() const;
    long at(Sentiment gold, Sentiment pred) const { return counts[class_index(gold)][class_index(pred)]; }
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(const std::vector<Sentiment>& preds, const std::vector<Sentiment>& golds);
/// Same tally over class indices; indices outside 0..2 throw.
ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& golds);

enum class Averaging { macro, weighted };
std::string_view to_string(Averaging a);
Averaging parse_averaging(std::string_view s);

struct MetricSet {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Averaging averaging = Averaging::macro;

    bool operator==(const MetricSet&) const = default;
};

/// Per-class precision, recall and F1 (0/0 read as 0), averaged per mode.
/// Weighted averaging weights each class by its gold support.
MetricSet metrics(const ConfusionMatrix& cm, Averaging averaging = Averaging::macro);

enum class ZeroMethod {
    /// Drop zero differences before ranking.
    wilcox,
    /// Rank zero differences with the rest, then drop them.
    pratt,
};
enum class WilcoxonMethod { exact, normal_approximation };
std::string_view to_string(WilcoxonMethod m);

struct WilcoxonResult {
    /// min(W+, W-).
    double statistic = 0.0;
    double w_plus = 0.0;
    double w_minus = 0.0;
    int n_effective = 0;
    double p_value = 1.0;
    WilcoxonMethod method = WilcoxonMethod::exact;
    double alpha = 0.05;
    bool significant = false;

    bool operator==(const WilcoxonResult&) const = default;
};

inline constexpr int kExactWilcoxonLimit = 25;

/// Two-sided signed-rank test on d = x - y. Ties share average ranks.
/// When n_effective <= exact_limit the p-value is exact,
/// p = min(1, 2 min(P(W+ <= w), P(W+ >= w))) under the sign-flip null with the
/// observed ranks; otherwise the normal approximation with continuity and
/// tie correction is used. significant = p < alpha.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y, double alpha = 0.05,
                                    ZeroMethod zeros = ZeroMethod::wilcox, int exact_limit = kExactWilcoxonLimit);

/// Null distribution of W+ for untied ranks 1..n: entry w is P(W+ = w).
std::vector<double> signed_rank_null_pmf(int n);

}  // namespace temsa::eval
