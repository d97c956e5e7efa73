#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "temsa/rng.hpp"

namespace temsa {

/// 8-bit interleaved (HWC) image. Channels is 1 or 3.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0);

    bool empty() const { return width <= 0 || height <= 0 || channels <= 0; }
    std::uint8_t& at(int y, int x, int c) { return pixels[index(y, x, c)]; }
    std::uint8_t at(int y, int x, int c) const { return pixels[index(y, x, c)]; }
    bool all_zero() const;

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels) +
               static_cast<std::size_t>(c);
    }
};

/// Decodes PNM (P5/P6) natively and, when built with OpenCV, any format
/// imread understands. Throws Error when the file cannot be decoded.
Image load_image(const std::string& path);
/// Binary PPM (3 channels) or PGM (1 channel).
void save_pnm(const Image& img, const std::string& path);
Image decode_pnm(const std::string& bytes);

/// Bilinear resize.
Image resize(const Image& img, int width, int height);

Image flip_left_right(const Image& img);
Image flip_top_bottom(const Image& img);
/// Clockwise rotation by 90 degrees.
Image rotate90(const Image& img);
Image rotate180(const Image& img);
Image rotate270(const Image& img);

enum class Augmentation { identity, flip_left_right, flip_top_bottom, rotate90, rotate180, rotate270 };
inline constexpr int kNumAugmentations = 6;

Image apply_augmentation(const Image& img, Augmentation op);

inline constexpr int kModelImageSize = 224;

/// Picks one of the six transforms uniformly from `rng` and applies it.
/// Input must already be kModelImageSize square.
Image image_augment(const Image& img, Rng& rng, Augmentation* chosen = nullptr);
Image image_augment(const Image& img, std::uint64_t seed, Augmentation* chosen = nullptr);

}  // namespace temsa
