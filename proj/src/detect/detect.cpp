#include <algorithm>
#include <cctype>
#include <cmath>

#include "temsa/detect.hpp"

namespace temsa::detect {

std::vector<std::string> Detections::names() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& d : items) out.push_back(d.name);
    return out;
}

std::string normalize_object_name(std::string_view name) {
    std::string out;
    bool pending_gap = false;
    for (unsigned char c : name) {
        if (std::isspace(c)) {
            pending_gap = !out.empty();
            continue;
        }
        if (pending_gap) out.push_back('_');
        pending_gap = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

Detections detect_objects(DetectorAdapter& detector, const ImageInput& input) {
    if (input.image == nullptr || input.image->empty())
        throw Error("undecodable image for sample '" + input.sample_id + "'");

    std::vector<Detection> raw;
    try {
        raw = detector.infer(input);
    } catch (const std::exception& e) {
        throw Error("detector '" + detector.id() + "' failed on sample '" + input.sample_id + "': " + e.what());
    }

    Detections out;
    out.sample_id = input.sample_id;
    out.source = detector.id();
    for (auto& d : raw) {
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
            throw Error("detector '" + detector.id() + "' emitted confidence outside [0,1] for '" + d.name + "'");
        if (d.box.w < 0 || d.box.h < 0)
            throw Error("detector '" + detector.id() + "' emitted a negative box size for '" + d.name + "'");
        if (d.confidence < detector.threshold()) continue;
        d.name = normalize_object_name(d.name);
        d.source = detector.id();
        out.items.push_back(std::move(d));
    }
    std::stable_sort(out.items.begin(), out.items.end(),
                     [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
    return out;
}

Detections detect_objects(DetectorAdapter& detector, const Image& image, const std::string& sample_id) {
    return detect_objects(detector, ImageInput{sample_id, {}, &image});
}

ObjectNameList merge_detections(const Detections& coco, const Detections& vg) {
    if (coco.sample_id != vg.sample_id)
        throw Error("merge_detections: sample ids differ ('" + coco.sample_id + "' vs '" + vg.sample_id + "')");
    ObjectNameList names;
    names.reserve(coco.size() + vg.size());
    for (const auto& d : coco.items) names.push_back(normalize_object_name(d.name));
    for (const auto& d : vg.items) names.push_back(normalize_object_name(d.name));
    return names;
}

void DetectionIndex::add(Detections d) {
    auto& per_source = entries_[d.sample_id];
    auto source = d.source;
    per_source.insert_or_assign(std::move(source), std::move(d));
}

bool DetectionIndex::contains(const std::string& sample_id) const { return entries_.count(sample_id) > 0; }

const Detections* DetectionIndex::find(const std::string& sample_id, const std::string& source) const {
    auto it = entries_.find(sample_id);
    if (it == entries_.end()) return nullptr;
    auto jt = it->second.find(source);
    return jt == it->second.end() ? nullptr : &jt->second;
}

std::size_t DetectionIndex::count(const std::string& sample_id, const std::string& source) const {
    auto it = entries_.find(sample_id);
    if (it == entries_.end()) return 0;
    if (source.empty() || source == "all") {
        std::size_t total = 0;
        for (const auto& [src, dets] : it->second) total += dets.size();
        return total;
    }
    auto jt = it->second.find(source);
    return jt == it->second.end() ? 0 : jt->second.size();
}

Histogram object_count_histogram(const DetectionIndex& all, const std::string& source_filter) {
    Histogram h;
    h.source = source_filter.empty() ? "all" : source_filter;
    h.samples = all.size();
    for (const auto& [sample_id, per_source] : all.by_sample()) {
        const std::size_t k = all.count(sample_id, h.source);
        if (h.counts.size() <= k) h.counts.resize(k + 1, 0);
        ++h.counts[k];
    }
    h.percent.resize(h.counts.size());
    for (std::size_t k = 0; k < h.counts.size(); ++k)
        h.percent[k] = 100.0 * static_cast<double>(h.counts[k]) / static_cast<double>(h.samples);
    return h;
}

std::string histogram_csv(const Histogram& h, int decimals) {
    std::string header = "objects";
    std::string row = h.source;
    char buf[64];
    for (std::size_t k = 0; k < h.percent.size(); ++k) {
        header += "," + std::to_string(k);
        std::snprintf(buf, sizeof buf, ",%.*f", decimals, h.percent[k]);
        row += buf;
    }
    return header + "\n" + row + "\n";
}

corpus::Dataset single_object_subset(const corpus::Dataset& d, const DetectionIndex& all,
                                     const std::string& primary_source) {
    for (const auto& s : d.samples())
        if (!all.contains(s.id)) throw Error("no detections cached for sample '" + s.id + "'");
    return d.filter([&](const corpus::Sample& s) { return all.count(s.id, primary_source) == 1; });
}

ObjectNameList object_names_for(const DetectionIndex& all, const std::string& sample_id,
                                const std::string& primary_source, const std::string& secondary_source,
                                NameMode mode) {
    if (!all.contains(sample_id)) throw Error("no detections cached for sample '" + sample_id + "'");
    const Detections empty_primary{sample_id, primary_source, {}};
    const Detections empty_secondary{sample_id, secondary_source, {}};
    const Detections* primary = all.find(sample_id, primary_source);
    const Detections* secondary = secondary_source.empty() ? nullptr : all.find(sample_id, secondary_source);
    if (mode == NameMode::primary_only) return merge_detections(primary ? *primary : empty_primary, empty_primary);
    return merge_detections(primary ? *primary : empty_primary, secondary ? *secondary : empty_secondary);
}

}  // namespace temsa::detect
