#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "temsa/detect.hpp"
#include "temsa/rng.hpp"

namespace temsa::detect {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& coco_label_names() {
    static const std::vector<std::string> labels = {
        "n/a",        "person",        "bicycle",      "car",          "motorcycle",    "airplane",
        "bus",        "train",         "truck",        "boat",         "traffic light", "fire hydrant",
        "n/a",        "stop sign",     "parking meter", "bench",       "bird",          "cat",
        "dog",        "horse",         "sheep",        "cow",          "elephant",      "bear",
        "zebra",      "giraffe",       "n/a",          "backpack",     "umbrella",      "n/a",
        "n/a",        "handbag",       "tie",          "suitcase",     "frisbee",       "skis",
        "snowboard",  "sports ball",   "kite",         "baseball bat", "baseball glove", "skateboard",
        "surfboard",  "tennis racket", "bottle",       "n/a",          "wine glass",    "cup",
        "fork",       "knife",         "spoon",        "bowl",         "banana",        "apple",
        "sandwich",   "orange",        "broccoli",     "carrot",       "hot dog",       "pizza",
        "donut",      "cake",          "chair",        "couch",        "potted plant",  "bed",
        "n/a",        "dining table",  "n/a",          "n/a",          "toilet",        "n/a",
        "tv",         "laptop",        "mouse",        "remote",       "keyboard",      "cell phone",
        "microwave",  "oven",          "toaster",      "sink",         "refrigerator",  "n/a",
        "book",       "clock",         "vase",         "scissors",     "teddy bear",    "hair drier",
        "toothbrush"};
    return labels;
}

// --- FixtureDetector ---------------------------------------------------------

FixtureDetector::FixtureDetector(double threshold, std::string id) : threshold_(threshold), id_(std::move(id)) {}

const std::vector<std::string>& FixtureDetector::vocabulary() {
    static const std::vector<std::string> names = {"person", "dog",   "cat",   "car",   "tree",  "sky",
                                                   "water",  "chair", "house", "flag",  "hat",   "bird",
                                                   "grass",  "wall",  "sign",  "cake",  "boat",  "plant"};
    return names;
}

std::size_t FixtureDetector::label_space_size() const { return vocabulary().size(); }

void FixtureDetector::script(const std::string& sample_id, std::vector<Detection> detections) {
    scripts_[sample_id] = std::move(detections);
}

void FixtureDetector::load_script(const std::string& jsonl_path) {
    std::ifstream in(jsonl_path);
    if (!in) throw Error("cannot open fixture script '" + jsonl_path + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto [dets, threshold] = DetectionCache::from_json_line(line);
        (void)threshold;
        scripts_[dets.sample_id] = std::move(dets.items);
    }
}

std::vector<Detection> FixtureDetector::infer(const ImageInput& input) {
    if (auto it = scripts_.find(input.sample_id); it != scripts_.end()) return it->second;
    const Image& img = *input.image;
    if (img.all_zero()) return {};

    // Content-derived stream: identical bytes give identical detections.
    std::string_view bytes(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    Rng rng(fnv1a(bytes));
    const auto& vocab = vocabulary();
    const auto n = static_cast<int>(rng.below(5));
    std::vector<Detection> out;
    for (int i = 0; i < n; ++i) {
        Detection d;
        d.name = vocab[rng.below(vocab.size())];
        d.confidence = std::round(rng.uniform(0.3, 1.0) * 1000.0) / 1000.0;
        d.box.x = std::floor(rng.uniform(0.0, img.width * 0.5));
        d.box.y = std::floor(rng.uniform(0.0, img.height * 0.5));
        d.box.w = std::floor(rng.uniform(1.0, img.width - d.box.x));
        d.box.h = std::floor(rng.uniform(1.0, img.height - d.box.y));
        out.push_back(std::move(d));
    }
    return out;
}

// --- ExternalCommandDetector -------------------------------------------------

ExternalCommandDetector::ExternalCommandDetector(std::string id, std::string command, double threshold,
                                                 std::size_t label_space, std::vector<std::string> labels)
    : id_(std::move(id)), command_(std::move(command)), threshold_(threshold), label_space_(label_space),
      labels_(std::move(labels)) {
    for (auto& l : labels_) l = normalize_object_name(l);
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out.push_back(c);
    }
    return out + "'";
}

std::string run_command(const std::string& cmd) {
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw Error("cannot launch '" + cmd + "'");
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    const int status = ::pclose(pipe);
    if (status != 0) throw Error("command exited with status " + std::to_string(status));
    return output;
}

}  // namespace

std::vector<Detection> ExternalCommandDetector::infer(const ImageInput& input) {
    std::string path = input.path;
    fs::path temp;
    if (path.empty()) {
        temp = fs::temp_directory_path() / ("temsa_" + id_ + "_" + hex64(fnv1a(input.sample_id)) + ".ppm");
        save_pnm(*input.image, temp.string());
        path = temp.string();
    }
    std::string output;
    try {
        output = run_command(command_ + " " + shell_quote(path));
    } catch (...) {
        if (!temp.empty()) fs::remove(temp);
        throw;
    }
    if (!temp.empty()) fs::remove(temp);

    json parsed;
    try {
        parsed = json::parse(output);
    } catch (const json::exception& e) {
        throw Error(std::string("unparseable detector output: ") + e.what());
    }
    if (!parsed.is_array()) throw Error("detector output must be a JSON array");

    std::vector<Detection> out;
    for (const auto& item : parsed) {
        Detection d;
        d.name = item.at("name").get<std::string>();
        d.confidence = item.at("confidence").get<double>();
        const auto& box = item.at("box");
        if (!box.is_array() || box.size() != 4) throw Error("detector box must be [x, y, w, h]");
        d.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
        if (!labels_.empty() &&
            std::find(labels_.begin(), labels_.end(), normalize_object_name(d.name)) == labels_.end())
            throw Error("class '" + d.name + "' is outside the " + std::to_string(label_space_) +
                        "-class label space");
        out.push_back(std::move(d));
    }
    return out;
}

std::unique_ptr<DetectorAdapter> make_detector(const std::string& adapter_id, std::optional<double> threshold) {
    if (adapter_id == "fixture") return std::make_unique<FixtureDetector>(threshold.value_or(0.5));
    if (adapter_id != "coco" && adapter_id != "vg")
        throw Error("unknown detector adapter '" + adapter_id + "' (expected coco|vg|fixture)");

    std::string upper = adapter_id == "coco" ? "COCO" : "VG";
    std::string command;
    if (const char* env = std::getenv(("TEMSA_" + upper + "_DETECTOR_CMD").c_str())) command = env;
    fs::path cache_dir;
    if (const char* env = std::getenv("TEMSA_CACHE_DIR")) cache_dir = env;
    if (command.empty() && !cache_dir.empty() && fs::exists(cache_dir / "detectors" / adapter_id))
        command = (cache_dir / "detectors" / adapter_id).string();
    if (command.empty())
        throw Error("detector '" + adapter_id + "' has no command: set TEMSA_" + upper +
                    "_DETECTOR_CMD or install $TEMSA_CACHE_DIR/detectors/" + adapter_id);

    if (adapter_id == "coco") {
        std::vector<std::string> labels;
        for (const auto& l : coco_label_names())
            if (l != "n/a") labels.push_back(l);
        return std::make_unique<ExternalCommandDetector>("coco", command, threshold.value_or(kDefaultCocoThreshold),
                                                         kCocoLabelSpace, std::move(labels));
    }
    std::vector<std::string> labels;
    if (!cache_dir.empty()) {
        std::ifstream in(cache_dir / "vg_labels.txt");
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) labels.push_back(line);
        if (!labels.empty() && labels.size() != kVisualGenomeLabelSpace)
            throw Error("vg_labels.txt lists " + std::to_string(labels.size()) + " classes, expected " +
                        std::to_string(kVisualGenomeLabelSpace));
    }
    return std::make_unique<ExternalCommandDetector>("vg", command, threshold.value_or(kDefaultVgThreshold),
                                                     kVisualGenomeLabelSpace, std::move(labels));
}

}  // namespace temsa::detect
