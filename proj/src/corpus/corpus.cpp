#include <algorithm>
#include <cmath>
#include <map>

#include "temsa/corpus.hpp"
#include "temsa/rng.hpp"

namespace temsa::corpus {

std::string_view to_string(LabelField field) {
    switch (field) {
        case LabelField::image: return "image_label";
        case LabelField::text: return "text_label";
        case LabelField::joint: return "joint_label";
    }
    return "?";
}

const std::optional<Sentiment>& label_of(const Sample& s, LabelField field) {
    switch (field) {
        case LabelField::image: return s.image_label;
        case LabelField::text: return s.text_label;
        case LabelField::joint: break;
    }
    return s.joint_label;
}

Dataset::Dataset(std::string name, std::vector<Sample> samples)
    : name_(std::move(name)), samples_(std::move(samples)) {
    index_.reserve(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!index_.emplace(samples_[i].id, i).second)
            throw Error("duplicate sample id '" + samples_[i].id + "'");
    }
}

const Sample* Dataset::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &samples_[it->second];
}

std::vector<std::string> Dataset::ids() const {
    std::vector<std::string> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(s.id);
    return out;
}

Dataset Dataset::filter(const std::function<bool(const Sample&)>& keep) const {
    std::vector<Sample> kept;
    for (const auto& s : samples_)
        if (keep(s)) kept.push_back(s);
    return Dataset(name_, std::move(kept));
}

JointPolicy parse_joint_policy(std::string_view name) {
    if (name == "strict_equal") return JointPolicy::strict_equal;
    if (name == "keep_polar") return JointPolicy::keep_polar;
    throw Error("unknown joint-label policy '" + std::string(name) + "' (expected strict_equal|keep_polar)");
}

std::string_view to_string(JointPolicy policy) {
    return policy == JointPolicy::strict_equal ? "strict_equal" : "keep_polar";
}

std::optional<Sentiment> joint_label_for(Sentiment image, Sentiment text, JointPolicy policy) {
    if (image == text) return image;
    if (is_polar(image) && is_polar(text)) return std::nullopt;  // opposing polarities
    if (policy == JointPolicy::strict_equal) return std::nullopt;
    return is_polar(image) ? image : text;
}

Dataset derive_joint_labels(const Dataset& d, JointPolicy policy) {
    std::vector<Sample> out;
    out.reserve(d.size());
    for (const auto& s : d.samples()) {
        if (!s.image_label || !s.text_label)
            throw Error("sample '" + s.id + "' lacks an image or text label; cannot derive a joint label");
        if (auto joint = joint_label_for(*s.image_label, *s.text_label, policy)) {
            Sample copy = s;
            copy.joint_label = joint;
            out.push_back(std::move(copy));
        }
    }
    return Dataset(d.name(), std::move(out));
}

Dataset filter_english_text(const Dataset& d, const LanguagePredicate& is_english) {
    return d.filter([&](const Sample& s) {
        if (s.text.find_first_not_of(" \t\r\n") == std::string::npos) return false;
        try {
            return is_english(s.text);
        } catch (const std::exception& e) {
            log_warn("language predicate failed on sample '" + s.id + "': " + e.what() +
                     "; treating as non-English");
            return false;
        }
    });
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, const SplitOptions& options) {
    if (!(options.ratio > 0.0 && options.ratio < 1.0))
        throw Error("split ratio must lie in (0, 1), got " + std::to_string(options.ratio));

    Rng rng(options.seed);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;

    auto cut = [&](std::vector<std::size_t> members) {
        rng.shuffle(members);
        const auto n_train = static_cast<std::size_t>(std::lround(options.ratio * static_cast<double>(members.size())));
        train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_idx.insert(test_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    };

    if (options.stratify_by) {
        // Stratum 3 holds samples without the label; std::map keeps stratum order fixed.
        std::map<int, std::vector<std::size_t>> strata;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto& label = label_of(d[i], *options.stratify_by);
            strata[label ? class_index(*label) : 3].push_back(i);
        }
        for (auto& [key, members] : strata) cut(std::move(members));
    } else {
        std::vector<std::size_t> all(d.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        cut(std::move(all));
    }

    if (test_idx.empty() || train_idx.empty())
        log_warn("split of '" + d.name() + "' (" + std::to_string(d.size()) + " samples) left train=" +
                 std::to_string(train_idx.size()) + " test=" + std::to_string(test_idx.size()));

    auto gather = [&](const std::vector<std::size_t>& idx) {
        std::vector<Sample> out;
        out.reserve(idx.size());
        for (auto i : idx) out.push_back(d[i]);
        return Dataset(d.name(), std::move(out));
    };
    return {gather(train_idx), gather(test_idx)};
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double ratio, std::uint64_t seed) {
    return split_train_test(d, SplitOptions{ratio, seed, std::nullopt});
}

const LabelCounts& LabelStats::of(LabelField field) const {
    switch (field) {
        case LabelField::image: return image;
        case LabelField::text: return text;
        case LabelField::joint: break;
    }
    return joint;
}

LabelStats summarize(const Dataset& d) {
    LabelStats stats;
    stats.samples = d.size();
    auto tally = [](LabelCounts& counts, const std::optional<Sentiment>& label) {
        if (label) {
            ++counts.by_class[static_cast<std::size_t>(class_index(*label))];
            ++counts.total;
        } else {
            ++counts.missing;
        }
    };
    for (const auto& s : d.samples()) {
        tally(stats.image, s.image_label);
        tally(stats.text, s.text_label);
        tally(stats.joint, s.joint_label);
    }
    return stats;
}

}  // namespace temsa::corpus
