#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "temsa/detect.hpp"

namespace temsa::detect {

using nlohmann::json;

DetectionCache::DetectionCache(std::string path) : path_(std::move(path)) {}

std::string DetectionCache::to_json_line(const Detections& d, double threshold) {
    json dets = json::array();
    for (const auto& item : d.items)
        dets.push_back({{"name", item.name},
                        {"confidence", item.confidence},
                        {"box", {item.box.x, item.box.y, item.box.w, item.box.h}}});
    json rec = {{"sample_id", d.sample_id}, {"source", d.source}, {"threshold", threshold}, {"detections", dets}};
    return rec.dump();
}

std::pair<Detections, double> DetectionCache::from_json_line(const std::string& line) {
    const json rec = json::parse(line);
    Detections d;
    d.sample_id = rec.at("sample_id").get<std::string>();
    d.source = rec.at("source").get<std::string>();
    const double threshold = rec.value("threshold", 0.0);
    for (const auto& item : rec.at("detections")) {
        Detection det;
        det.name = normalize_object_name(item.at("name").get<std::string>());
        det.confidence = item.value("confidence", 1.0);
        if (item.contains("box")) {
            const auto& b = item.at("box");
            if (!b.is_array() || b.size() != 4) throw Error("box must be [x, y, w, h]");
            det.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
        }
        if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) throw Error("confidence outside [0,1]");
        if (det.box.w < 0 || det.box.h < 0) throw Error("negative box size");
        det.source = d.source;
        d.items.push_back(std::move(det));
    }
    return {std::move(d), threshold};
}

void DetectionCache::load() {
    records_.clear();
    order_.clear();
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto [dets, threshold] = from_json_line(line);
            CacheKey key{dets.sample_id, dets.source, threshold};
            if (!records_.count(key)) order_.push_back(key);
            records_[key] = std::move(dets);
        } catch (const std::exception& e) {
            throw Error("detection cache '" + path_ + "' line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

bool DetectionCache::contains(const CacheKey& key) const { return records_.count(key) > 0; }

const Detections* DetectionCache::find(const CacheKey& key) const {
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
}

void DetectionCache::append(const Detections& d, double threshold) {
    std::lock_guard lock(write_mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("cannot append to detection cache '" + path_ + "'");
    out << to_json_line(d, threshold) << '\n';
    if (!out) throw Error("failed writing detection cache '" + path_ + "'");
    CacheKey key{d.sample_id, d.source, threshold};
    if (!records_.count(key)) order_.push_back(key);
    records_[key] = d;
}

DetectionIndex DetectionCache::index() const {
    DetectionIndex idx;
    for (const auto& key : order_) idx.add(records_.at(key));
    return idx;
}

DetectionIndex load_detection_index(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw Error("cannot open detection cache '" + path + "'");
    DetectionCache cache(path);
    cache.load();
    return cache.index();
}

}  // namespace temsa::detect

namespace temsa::detect {

DetectRunStats detect_dataset(const corpus::Dataset& d, DetectorAdapter& detector, DetectionCache& cache,
                              const std::string& image_root) {
    DetectRunStats stats;
    for (const auto& s : d.samples()) {
        if (!s.image_ref) {
            ++stats.skipped;
            continue;
        }
        const CacheKey key{s.id, detector.id(), detector.threshold()};
        if (cache.contains(key)) {
            ++stats.reused;
            continue;
        }
        std::filesystem::path p(*s.image_ref);
        if (p.is_relative() && !image_root.empty()) p = std::filesystem::path(image_root) / p;
        try {
            const Image img = load_image(p.string());
            cache.append(detect_objects(detector, ImageInput{s.id, p.string(), &img}), detector.threshold());
            ++stats.detected;
        } catch (const Error& e) {
            log_warn(std::string("detection skipped: ") + e.what());
            ++stats.failed;
        }
    }
    return stats;
}

}  // namespace temsa::detect
