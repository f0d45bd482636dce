#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deocc/mask.hpp"

namespace deocc {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    std::uint8_t operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
    std::uint8_t& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }
    bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB raster, row-major.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {})
        : width_(width), height_(height),
          pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
    Rgb& at(int x, int y) { return pixels_[index(x, y)]; }

    const std::vector<Rgb>& pixels() const { return pixels_; }
    std::vector<Rgb>& pixels() { return pixels_; }

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

/// Copy of `image` with every pixel in `region` set to black.
RgbImage erase(const RgbImage& image, const BinaryMask& region);

/// Copy of `image` with pixels outside `keep` set to black.
RgbImage mask_image(const RgbImage& image, const BinaryMask& keep);

/// Writes src pixels into dst wherever `where` is set.
void copy_where(RgbImage& dst, const RgbImage& src, const BinaryMask& where);

// PNG codecs (libpng). Masks are 8-bit grayscale 0/255; layers are RGBA with
// alpha taken from the mask.
std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_png(const BinaryMask& mask);
std::vector<std::uint8_t> encode_png_rgba(const RgbImage& rgb, const BinaryMask& alpha);

struct DecodedPng {
    RgbImage rgb;
    BinaryMask alpha;  // all-set when the PNG has no alpha channel
};
DecodedPng decode_png(const std::vector<std::uint8_t>& bytes);
BinaryMask decode_png_mask(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::string& path, const std::string& text);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace deocc
