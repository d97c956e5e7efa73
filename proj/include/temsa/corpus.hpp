#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "temsa/common.hpp"

namespace temsa::corpus {

/// One image-text pair with its per-modality annotations.
struct Sample {
    std::string id;
    std::optional<std::string> image_ref;
    std::string text;
    std::optional<Sentiment> image_label;
    std::optional<Sentiment> text_label;
    std::optional<Sentiment> joint_label;

    bool operator==(const Sample&) const = default;
};

enum class LabelField { image, text, joint };
std::string_view to_string(LabelField field);
const std::optional<Sentiment>& label_of(const Sample& s, LabelField field);

/// Named, ordered, immutable collection of samples with unique ids.
class Dataset {
public:
    Dataset() = default;
    /// Throws Error if two samples share an id.
    Dataset(std::string name, std::vector<Sample> samples);

    const std::string& name() const { return name_; }
    const std::vector<Sample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }

    const Sample* find(std::string_view id) const;
    std::vector<std::string> ids() const;

    /// New dataset (same name) with the samples for which keep() is true.
    Dataset filter(const std::function<bool(const Sample&)>& keep) const;

    bool operator==(const Dataset& other) const {
        return name_ == other.name_ && samples_ == other.samples_;
    }

private:
    std::string name_;
    std::vector<Sample> samples_;
    std::unordered_map<std::string, std::size_t> index_;
};

// --- Manifest I/O ----------------------------------------------------------

enum class ManifestSchema { csv, tsv };

/// Picks TSV for `.tsv`/`.tab` files, CSV otherwise.
ManifestSchema schema_for_path(std::string_view path);

inline constexpr std::array<std::string_view, 6> kManifestColumns{
    "id", "image_path", "text", "image_label", "text_label", "joint_label"};

/// Reads a manifest whose first row is exactly the column header above.
/// Fields may be double-quoted (RFC 4180 style, including embedded newlines).
/// Errors name the 1-based file row, counting the header as row 1.
Dataset load_manifest(const std::string& path, ManifestSchema schema,
                      std::string dataset_name = {});
Dataset parse_manifest(std::string_view content, ManifestSchema schema, std::string dataset_name);

void save_manifest(const Dataset& d, const std::string& path, ManifestSchema schema);
std::string format_manifest(const Dataset& d, ManifestSchema schema);

// --- Label derivation and filtering ----------------------------------------

enum class JointPolicy {
    /// Keep a sample only when image and text labels agree.
    strict_equal,
    /// Drop opposing polar pairs; a neutral/polar pair takes the polar label.
    keep_polar,
};
JointPolicy parse_joint_policy(std::string_view name);
std::string_view to_string(JointPolicy policy);

/// Opposing polar pairs are always removed. Throws if a sample lacks an image
/// or text label.
Dataset derive_joint_labels(const Dataset& d, JointPolicy policy = JointPolicy::strict_equal);

/// Joint label for a single pair under `policy`, or nullopt if the pair is dropped.
std::optional<Sentiment> joint_label_for(Sentiment image, Sentiment text, JointPolicy policy);

using LanguagePredicate = std::function<bool(std::string_view text)>;

/// Default English detector: mostly-ASCII text whose word coverage against a
/// built-in English lexicon reaches `min_coverage`.
class EnglishHeuristic {
public:
    explicit EnglishHeuristic(double min_coverage = 0.2, double min_ascii_fraction = 0.9)
        : min_coverage_(min_coverage), min_ascii_(min_ascii_fraction) {}

    bool operator()(std::string_view text) const;

    /// Fraction of alphabetic words found in the lexicon (after light plural stemming).
    static double coverage(std::string_view text);

private:
    double min_coverage_;
    double min_ascii_;
};

/// Drops samples with empty text or text the predicate rejects. A predicate
/// that throws counts as a rejection and is logged.
Dataset filter_english_text(const Dataset& d, const LanguagePredicate& is_english = EnglishHeuristic{});

// --- Splitting and statistics ----------------------------------------------

struct SplitOptions {
    double ratio = 0.8;
    std::uint64_t seed = 0;
    /// When set, the cut is applied per class of this label (samples without
    /// the label form their own stratum).
    std::optional<LabelField> stratify_by;
};

/// Shuffle-then-cut. |train| = round(ratio * N) for the unstratified split.
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, const SplitOptions& options);
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double ratio, std::uint64_t seed);

struct LabelCounts {
    std::array<std::size_t, 3> by_class{};  // indexed by class_index()
    std::size_t total = 0;                   // samples with a non-null label
    std::size_t missing = 0;

    std::size_t operator[](Sentiment s) const { return by_class[static_cast<std::size_t>(class_index(s))]; }
    bool operator==(const LabelCounts&) const = default;
};

struct LabelStats {
    LabelCounts image;
    LabelCounts text;
    LabelCounts joint;
    std::size_t samples = 0;

    const LabelCounts& of(LabelField field) const;
    bool operator==(const LabelStats&) const = default;
};

LabelStats summarize(const Dataset& d);

}  // namespace temsa::corpus
