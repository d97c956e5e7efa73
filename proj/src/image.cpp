#include "temsa/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "temsa/common.hpp"

#ifdef TEMSA_HAVE_OPENCV
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#endif

namespace temsa {

Image::Image(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {}

bool Image::all_zero() const {
    return std::all_of(pixels.begin(), pixels.end(), [](std::uint8_t p) { return p == 0; });
}

Image decode_pnm(const std::string& bytes) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> int {
        skip_ws();
        std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) throw Error("undecodable image: bad PNM header");
        return std::stoi(bytes.substr(start, pos - start));
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw Error("undecodable image: not a binary PNM");
    const int channels = bytes[1] == '6' ? 3 : 1;
    pos = 2;
    const int w = read_int();
    const int h = read_int();
    const int maxval = read_int();
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw Error("undecodable image: unsupported PNM header");
    ++pos;  // single whitespace before raster
    Image img(w, h, channels);
    if (bytes.size() < pos + img.pixels.size()) throw Error("undecodable image: truncated PNM raster");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.pixels.size(), img.pixels.begin());
    return img;
}

void save_pnm(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3) throw Error("save_pnm: need 1 or 3 channels");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write image '" + path + "'");
    out << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

Image load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("undecodable image: cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) return decode_pnm(bytes);
#ifdef TEMSA_HAVE_OPENCV
    std::vector<unsigned char> buf(bytes.begin(), bytes.end());
    cv::Mat mat = cv::imdecode(buf, cv::IMREAD_COLOR);
    if (mat.empty()) throw Error("undecodable image: '" + path + "'");
    cv::cvtColor(mat, mat, cv::COLOR_BGR2RGB);
    Image img(mat.cols, mat.rows, 3);
    for (int y = 0; y < mat.rows; ++y) {
        const auto* row = mat.ptr<unsigned char>(y);
        std::copy_n(row, static_cast<std::size_t>(mat.cols) * 3,
                    img.pixels.begin() + static_cast<std::ptrdiff_t>(y) * mat.cols * 3);
    }
    return img;
#else
    throw Error("undecodable image: '" + path + "' (only PNM supported in this build)");
#endif
}

Image resize(const Image& img, int width, int height) {
    if (img.empty()) throw Error("resize: empty image");
    if (width <= 0 || height <= 0) throw Error("resize: target size must be positive");
    if (img.width == width && img.height == height) return img;
    Image out(width, height, img.channels);
    const double sx = static_cast<double>(img.width) / width;
    const double sy = static_cast<double>(img.height) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = img.at(y0, x0, c) * (1 - wx) + img.at(y0, x1, c) * wx;
                const double bottom = img.at(y1, x0, c) * (1 - wx) + img.at(y1, x1, c) * wx;
                out.at(y, x, c) = static_cast<std::uint8_t>(std::lround(top * (1 - wy) + bottom * wy));
            }
        }
    }
    return out;
}

namespace {
template <class Map>
Image remap(const Image& img, int out_w, int out_h, Map source_of) {
    Image out(out_w, out_h, img.channels);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            const auto [sy, sx] = source_of(y, x);
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    return out;
}
}  // namespace

Image flip_left_right(const Image& img) {
    return remap(img, img.width, img.height, [&](int y, int x) { return std::pair{y, img.width - 1 - x}; });
}

Image flip_top_bottom(const Image& img) {
    return remap(img, img.width, img.height, [&](int y, int x) { return std::pair{img.height - 1 - y, x}; });
}

Image rotate90(const Image& img) {
    // out(y, x) = in(H-1-x, y)
    return remap(img, img.height, img.width, [&](int y, int x) { return std::pair{img.height - 1 - x, y}; });
}

Image rotate180(const Image& img) {
    return remap(img, img.width, img.height,
                 [&](int y, int x) { return std::pair{img.height - 1 - y, img.width - 1 - x}; });
}

Image rotate270(const Image& img) {
    return remap(img, img.height, img.width, [&](int y, int x) { return std::pair{x, img.width - 1 - y}; });
}

Image apply_augmentation(const Image& img, Augmentation op) {
    switch (op) {
        case Augmentation::identity: return img;
        case Augmentation::flip_left_right: return flip_left_right(img);
        case Augmentation::flip_top_bottom: return flip_top_bottom(img);
        case Augmentation::rotate90: return rotate90(img);
        case Augmentation::rotate180: return rotate180(img);
        case Augmentation::rotate270: return rotate270(img);
    }
    return img;
}

Image image_augment(const Image& img, Rng& rng, Augmentation* chosen) {
    if (img.width != kModelImageSize || img.height != kModelImageSize)
        throw Error("image_augment expects a " + std::to_string(kModelImageSize) + "x" +
                    std::to_string(kModelImageSize) + " image, got " + std::to_string(img.width) + "x" +
                    std::to_string(img.height));
    const auto op = static_cast<Augmentation>(rng.below(kNumAugmentations));
    if (chosen) *chosen = op;
    return apply_augmentation(img, op);
}

Image image_augment(const Image& img, std::uint64_t seed, Augmentation* chosen) {
    Rng rng(seed);
    return image_augment(img, rng, chosen);
}

}  // namespace temsa
