#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "temsa/common.hpp"
#include "temsa/corpus.hpp"
#include "temsa/image.hpp"

namespace temsa::detect {

/// Pixel box: top-left corner plus size.
struct Box {
    double x = 0, y = 0, w = 0, h = 0;
    bool operator==(const Box&) const = default;
};

struct Detection {
    std::string name;  // lowercase class name
    double confidence = 0;
    Box box;
    std::string source;  // detector id: "coco", "vg", "fixture", ...

    bool operator==(const Detection&) const = default;
};

/// Detections emitted by one detector for one sample, in detector order.
struct Detections {
    std::string sample_id;
    std::string source;
    std::vector<Detection> items;

    std::size_t size() const { return items.size(); }
    bool empty() const { return items.empty(); }
    std::vector<std::string> names() const;
    bool operator==(const Detections&) const = default;
};

/// Object names in merge order; duplicates are meaningful and kept.
using ObjectNameList = std::vector<std::string>;

/// What an adapter sees for one image.
struct ImageInput {
    std::string sample_id;
    std::string path;  // may be empty for in-memory images
    const Image* image = nullptr;
};

/// A pretrained detector consumed as a black box. Implementations return raw
/// candidates; thresholding, ordering and validation happen in detect_objects().
/// Instances hold inference state and must not be shared between threads.
class DetectorAdapter {
public:
    virtual ~DetectorAdapter() = default;
    virtual std::string id() const = 0;
    virtual double threshold() const = 0;
    /// Number of classes the detector can emit (0 when unknown).
    virtual std::size_t label_space_size() const = 0;
    virtual std::vector<Detection> infer(const ImageInput& input) = 0;
};

inline constexpr double kDefaultCocoThreshold = 0.7;
inline constexpr double kDefaultVgThreshold = 0.5;
inline constexpr std::size_t kCocoLabelSpace = 91;
inline constexpr std::size_t kVisualGenomeLabelSpace = 200;

/// The 91-slot COCO category table used by DETR-style checkpoints
/// (unused slots are "n/a").
const std::vector<std::string>& coco_label_names();

/// Runs the adapter and keeps candidates with confidence >= threshold, sorted
/// by confidence descending (stable). Names are lowercased and tagged with the
/// adapter id. Empty images are undecodable; adapter failures are rethrown
/// with the adapter id attached.
Detections detect_objects(DetectorAdapter& detector, const ImageInput& input);
Detections detect_objects(DetectorAdapter& detector, const Image& image, const std::string& sample_id = {});

/// Scripted detector for tests and desk runs. Scripted samples return their
/// script verbatim. Unscripted samples get a reproducible pseudo-detection set
/// derived from the image bytes; an all-zero image yields nothing.
class FixtureDetector final : public DetectorAdapter {
public:
    explicit FixtureDetector(double threshold = 0.5, std::string id = "fixture");

    void script(const std::string& sample_id, std::vector<Detection> detections);
    /// Loads scripts from a detection-cache style JSONL file.
    void load_script(const std::string& jsonl_path);

    std::string id() const override { return id_; }
    double threshold() const override { return threshold_; }
    std::size_t label_space_size() const override;
    std::vector<Detection> infer(const ImageInput& input) override;

    static const std::vector<std::string>& vocabulary();

private:
    double threshold_;
    std::string id_;
    std::unordered_map<std::string, std::vector<Detection>> scripts_;
};

/// Bridges to an out-of-process detector. The command is run as
/// `<command> <image_path>` and must print a JSON array of
/// {"name": str, "confidence": num, "box": [x, y, w, h]} objects.
/// When a label list is given, emitted names must belong to it.
class ExternalCommandDetector final : public DetectorAdapter {
public:
    ExternalCommandDetector(std::string id, std::string command, double threshold, std::size_t label_space,
                            std::vector<std::string> labels = {});

    std::string id() const override { return id_; }
    double threshold() const override { return threshold_; }
    std::size_t label_space_size() const override { return label_space_; }
    std::vector<Detection> infer(const ImageInput& input) override;

private:
    std::string id_;
    std::string command_;
    double threshold_;
    std::size_t label_space_;
    std::vector<std::string> labels_;
};

/// Builds the adapter for `coco`, `vg` or `fixture`. Real adapters need a
/// command: TEMSA_<ID>_DETECTOR_CMD, else `$TEMSA_CACHE_DIR/detectors/<id>`.
/// A VG label list is read from `$TEMSA_CACHE_DIR/vg_labels.txt` when present.
std::unique_ptr<DetectorAdapter> make_detector(const std::string& adapter_id, std::optional<double> threshold = {});

// --- Merging and statistics ------------------------------------------------

/// Lowercases and trims a class name; inner whitespace runs become '_' so a
/// multi-word class ("traffic light") stays a single token.
std::string normalize_object_name(std::string_view name);

/// COCO names (detector order) followed by VG names, all lowercased.
ObjectNameList merge_detections(const Detections& coco, const Detections& vg);

/// Every detector's output for every sample, keyed by sample id then source.
class DetectionIndex {
public:
    void add(Detections d);
    bool contains(const std::string& sample_id) const;
    /// nullptr when the sample or source is absent.
    const Detections* find(const std::string& sample_id, const std::string& source) const;
    /// Total detections for a sample from `source`, or from every source when empty.
    std::size_t count(const std::string& sample_id, const std::string& source) const;
    const std::map<std::string, std::map<std::string, Detections>>& by_sample() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, std::map<std::string, Detections>> entries_;
};

struct Histogram {
    std::vector<std::size_t> counts;  // counts[k] = samples with exactly k detections
    std::vector<double> percent;      // same buckets, as a percentage of all samples
    std::size_t samples = 0;
    std::string source;  // "all" or a detector id
};

/// `source_filter` empty or "all" counts every source.
Histogram object_count_histogram(const DetectionIndex& all, const std::string& source_filter = "all");
/// Table-style CSV: header `objects,0,1,...` and one percentage row.
std::string histogram_csv(const Histogram& h, int decimals = 2);

/// Samples whose `primary_source` detection count is exactly one. Every
/// sample of `d` must have an entry in `all`.
corpus::Dataset single_object_subset(const corpus::Dataset& d, const DetectionIndex& all,
                             const std::string& primary_source = "coco");

enum class NameMode {
    /// Primary-source names followed by secondary-source names.
    merged,
    /// Only the primary source (single-object experiment).
    primary_only,
};

/// Object names used to build the TEMS sequence of one sample.
ObjectNameList object_names_for(const DetectionIndex& all, const std::string& sample_id,
                                const std::string& primary_source, const std::string& secondary_source,
                                NameMode mode = NameMode::merged);

// --- Cache ----------------------------------------------------------------

struct CacheKey {
    std::string sample_id;
    std::string source;
    double threshold = 0;
    auto operator<=>(const CacheKey&) const = default;
};

/// JSONL detection cache. One record per (sample, adapter, threshold):
/// {"sample_id", "source", "threshold", "detections": [{"name", "confidence", "box": [x, y, w, h]}]}.
/// Appends go through a single writer lock; lookups need no lock once loaded.
class DetectionCache {
public:
    DetectionCache() = default;
    explicit DetectionCache(std::string path);

    /// Reads the file if it exists; malformed lines throw with their line number.
    void load();
    bool contains(const CacheKey& key) const;
    const Detections* find(const CacheKey& key) const;
    /// Writes one record to the file and the in-memory map.
    void append(const Detections& d, double threshold);

    /// Last record per (sample, source), regardless of threshold.
    DetectionIndex index() const;
    std::size_t size() const { return records_.size(); }
    const std::string& path() const { return path_; }

    static std::string to_json_line(const Detections& d, double threshold);
    static std::pair<Detections, double> from_json_line(const std::string& line);

private:
    std::string path_;
    std::map<CacheKey, Detections> records_;
    std::vector<CacheKey> order_;
    std::mutex write_mutex_;
};

/// Loads a cache file straight into an index.
DetectionIndex load_detection_index(const std::string& path);

struct DetectRunStats {
    std::size_t detected = 0;
    /// Already in the cache at this threshold.
    std::size_t reused = 0;
    /// No image reference.
    std::size_t skipped = 0;
    /// Unreadable image or adapter failure; logged and left out of the cache.
    std::size_t failed = 0;
};

/// Runs `detector` over every sample not yet cached for (id, detector,
/// threshold) and appends the results. Relative image paths resolve
/// against `image_root`.
DetectRunStats detect_dataset(const corpus::Dataset& d, DetectorAdapter& detector, DetectionCache& cache,
                              const std::string& image_root);

}  // namespace temsa::detect
