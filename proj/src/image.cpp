#include "deocc/image.hpp"

#include <fstream>
#include <iterator>

#include <openssl/evp.h>
#include <png.h>

#include "deocc/errors.hpp"

namespace deocc {

RgbImage erase(const RgbImage& image, const BinaryMask& region) {
    if (image.width() != region.width() || image.height() != region.height())
        throw DimensionError("erase: image and region dimensions differ");
    RgbImage out = image;
    for (std::size_t i = 0; i < out.pixels().size(); ++i)
        if (region.bits()[i]) out.pixels()[i] = Rgb{};
    return out;
}

RgbImage mask_image(const RgbImage& image, const BinaryMask& keep) {
    return erase(image, complement(keep));
}

void copy_where(RgbImage& dst, const RgbImage& src, const BinaryMask& where) {
    if (dst.width() != src.width() || dst.height() != src.height() ||
        dst.width() != where.width() || dst.height() != where.height())
        throw DimensionError("copy_where: dimensions differ");
    for (std::size_t i = 0; i < dst.pixels().size(); ++i)
        if (where.bits()[i]) dst.pixels()[i] = src.pixels()[i];
}

namespace {

std::vector<std::uint8_t> encode_raw(int width, int height, png_uint_32 format,
                                     const std::vector<std::uint8_t>& raw) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, raw.data(), 0, nullptr))
        throw FormatError(std::string("png: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, raw.data(), 0, nullptr))
        throw FormatError(std::string("png: ") + image.message);
    out.resize(size);
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
    std::vector<std::uint8_t> raw;
    raw.reserve(image.pixels().size() * 3);
    for (const auto& p : image.pixels()) {
        raw.push_back(p.r);
        raw.push_back(p.g);
        raw.push_back(p.b);
    }
    return encode_raw(image.width(), image.height(), PNG_FORMAT_RGB, raw);
}

std::vector<std::uint8_t> encode_png(const BinaryMask& mask) {
    std::vector<std::uint8_t> raw(mask.bits().size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = mask.bits()[i] ? 255 : 0;
    return encode_raw(mask.width(), mask.height(), PNG_FORMAT_GRAY, raw);
}

std::vector<std::uint8_t> encode_png_rgba(const RgbImage& rgb, const BinaryMask& alpha) {
    if (rgb.width() != alpha.width() || rgb.height() != alpha.height())
        throw DimensionError("encode_png_rgba: dimensions differ");
    std::vector<std::uint8_t> raw;
    raw.reserve(rgb.pixels().size() * 4);
    for (std::size_t i = 0; i < rgb.pixels().size(); ++i) {
        const auto& p = rgb.pixels()[i];
        raw.push_back(p.r);
        raw.push_back(p.g);
        raw.push_back(p.b);
        raw.push_back(alpha.bits()[i] ? 255 : 0);
    }
    return encode_raw(rgb.width(), rgb.height(), PNG_FORMAT_RGBA, raw);
}

DecodedPng decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw FormatError(std::string("png: ") + image.message);
    const bool had_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    // Straight (non-premultiplied) RGBA so color survives where alpha is 0.
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
        png_image_free(&image);
        throw FormatError(std::string("png: ") + image.message);
    }
    const int width = static_cast<int>(image.width);
    const int height = static_cast<int>(image.height);
    DecodedPng result{RgbImage(width, height), BinaryMask(width, height, true)};
    for (std::size_t i = 0; i < result.rgb.pixels().size(); ++i) {
        const std::uint8_t* px = raw.data() + i * 4;
        result.rgb.pixels()[i] = Rgb{px[0], px[1], px[2]};
        if (had_alpha) result.alpha.bits()[i] = px[3] >= 128 ? 1 : 0;
    }
    return result;
}

BinaryMask decode_png_mask(const std::vector<std::uint8_t>& bytes) {
    const auto decoded = decode_png(bytes);
    BinaryMask m(decoded.rgb.width(), decoded.rgb.height());
    for (std::size_t i = 0; i < m.bits().size(); ++i)
        m.bits()[i] = decoded.rgb.pixels()[i].r >= 128 ? 1 : 0;
    return m;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

void write_text(const std::string& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw FormatError("base64 length not a multiple of 4");
    std::vector<std::uint8_t> out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw FormatError("invalid base64");
    std::size_t len = static_cast<std::size_t>(n);
    // EVP_DecodeBlock keeps the bytes produced by '=' padding.
    if (!text.empty() && text.back() == '=') --len;
    if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
    out.resize(len);
    return out;
}

}  // namespace deocc
