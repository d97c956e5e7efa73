#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "temsa/eval.hpp"

namespace temsa::eval {

std::string_view to_string(WilcoxonMethod m) {
    return m == WilcoxonMethod::exact ? "exact" : "normal-approximation";
}

namespace {

/// Average ranks (1-based) of |values|.
std::vector<double> average_ranks(const std::vector<double>& magnitudes) {
    std::vector<std::size_t> order(magnitudes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return magnitudes[a] < magnitudes[b]; });
    std::vector<double> ranks(magnitudes.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && magnitudes[order[j + 1]] == magnitudes[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

/// Counts of each attainable sum of a subset of `weights` (non-negative ints).
std::vector<double> subset_sum_counts(const std::vector<long>& weights) {
    const long total = std::accumulate(weights.begin(), weights.end(), 0L);
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    long reach = 0;
    for (long w : weights) {
        reach += w;
        for (long s = reach; s >= w; --s) counts[static_cast<std::size_t>(s)] += counts[static_cast<std::size_t>(s - w)];
    }
    return counts;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

std::vector<double> signed_rank_null_pmf(int n) {
    if (n < 0) throw Error("signed_rank_null_pmf: n must be non-negative");
    std::vector<long> weights(static_cast<std::size_t>(n));
    std::iota(weights.begin(), weights.end(), 1L);
    auto counts = subset_sum_counts(weights);
    const double scale = std::ldexp(1.0, -n);
    for (auto& c : counts) c *= scale;
    return counts;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y, double alpha,
                                    ZeroMethod zeros, int exact_limit) {
    if (x.size() != y.size())
        throw Error("wilcoxon: paired samples differ in length (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
    if (x.empty()) throw Error("wilcoxon: no pairs");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (zeros == ZeroMethod::pratt || d != 0.0) diffs.push_back(d);
    }
    std::vector<double> mags;
    for (double d : diffs) mags.push_back(std::abs(d));
    const auto ranks_all = average_ranks(mags);

    // Keep only non-zero differences (Pratt ranked the zeros first).
    std::vector<double> ranks, signs;
    for (std::size_t i = 0; i < diffs.size(); ++i)
        if (diffs[i] != 0.0) {
            ranks.push_back(ranks_all[i]);
            signs.push_back(diffs[i] > 0.0 ? 1.0 : -1.0);
        }
    if (ranks.empty()) throw Error("degenerate: all differences zero");

    WilcoxonResult r;
    r.alpha = alpha;
    r.n_effective = static_cast<int>(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) (signs[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
    r.statistic = std::min(r.w_plus, r.w_minus);

    if (r.n_effective <= exact_limit) {
        r.method = WilcoxonMethod::exact;
        // Doubled ranks are integers even with average-rank ties.
        std::vector<long> doubled;
        for (double rk : ranks) doubled.push_back(std::lround(2.0 * rk));
        const auto counts = subset_sum_counts(doubled);
        const long t = std::lround(2.0 * r.w_plus);
        double le = 0.0, ge = 0.0;
        for (std::size_t s = 0; s < counts.size(); ++s) {
            if (static_cast<long>(s) <= t) le += counts[s];
            if (static_cast<long>(s) >= t) ge += counts[s];
        }
        const double scale = std::ldexp(1.0, -r.n_effective);
        r.p_value = std::min(1.0, 2.0 * std::min(le, ge) * scale);
    } else {
        r.method = WilcoxonMethod::normal_approximation;
        double mean = 0.0, var = 0.0;
        for (double rk : ranks) {
            mean += rk / 2.0;
            var += rk * rk / 4.0;
        }
        const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
        r.p_value = std::clamp(2.0 * normal_upper_tail(z), std::numeric_limits<double>::min(), 1.0);
    }
    r.significant = r.p_value < alpha;
    return r;
}

}  // namespace temsa::eval
