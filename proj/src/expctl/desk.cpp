#include <array>
#include <filesystem>

#include "temsa/detect.hpp"
#include "temsa/expctl.hpp"

namespace fs = std::filesystem;

namespace temsa::expctl {

namespace {

const std::array<std::array<const char*, 3>, 3> kCueWords{{
    {"great", "happy", "love"},
    {"awful", "sad", "hate"},
    {"okay", "plain", "usual"},
}};

const std::array<const char*, 16> kFillers{"the", "day", "we", "went", "to", "see", "a",   "new",
                                           "park", "with", "my", "friends", "and", "it", "was", "here"};

const std::array<std::array<int, 3>, 3> kBaseColour{{{220, 180, 40}, {40, 60, 200}, {128, 128, 128}}};

}  // namespace

DeskFixture make_desk_fixture(const std::string& dir, const DeskFixtureOptions& options) {
    if (options.samples < 9) throw Error("desk fixture needs at least 9 samples");
    if (options.image_size < 4) throw Error("desk fixture images must be at least 4 pixels wide");
    const fs::path root(dir);
    fs::create_directories(root / "images");
    Rng rng(options.seed);

    std::vector<corpus::Sample> samples;
    samples.reserve(options.samples);
    for (std::size_t i = 0; i < options.samples; ++i) {
        corpus::Sample s;
        char id[32];
        std::snprintf(id, sizeof id, "s%04zu", i);
        s.id = id;
        // The first nine cover every image/text pair; the rest mostly agree.
        int img_label, txt_label;
        if (i < 9) {
            img_label = static_cast<int>(i / 3);
            txt_label = static_cast<int>(i % 3);
        } else {
            img_label = static_cast<int>(rng.below(3));
            txt_label = rng.uniform() < 0.8 ? img_label : static_cast<int>(rng.below(3));
        }
        s.image_label = sentiment_from_index(img_label);
        s.text_label = sentiment_from_index(txt_label);

        std::string text;
        const auto words = 4 + rng.below(6);
        const auto cue_at = rng.below(words);
        for (std::size_t w = 0; w < words; ++w) {
            if (!text.empty()) text += ' ';
            text += w == cue_at ? kCueWords[txt_label][rng.below(3)] : kFillers[rng.below(kFillers.size())];
        }
        s.text = text;

        Image img(options.image_size, options.image_size, 3);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < 3; ++c) {
                    const int v = kBaseColour[img_label][c] + static_cast<int>(rng.below(61)) - 30;
                    img.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
                }
        const auto rel = std::string("images/") + s.id + ".ppm";
        save_pnm(img, (root / rel).string());
        s.image_ref = rel;
        samples.push_back(std::move(s));
    }

    DeskFixture out;
    out.manifest = (root / "manifest.csv").string();
    out.detection_cache = (root / "detections.jsonl").string();
    out.image_root = root.string();
    const corpus::Dataset d("mvsa", std::move(samples));
    corpus::save_manifest(d, out.manifest, corpus::ManifestSchema::csv);

    fs::remove(out.detection_cache);
    detect::DetectionCache cache(out.detection_cache);
    detect::FixtureDetector detector;
    const auto stats = detect::detect_dataset(d, detector, cache, out.image_root);
    if (stats.failed > 0) throw Error("desk fixture: detection failed on " + std::to_string(stats.failed) + " images");
    return out;
}

}  // namespace temsa::expctl
