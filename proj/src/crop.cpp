#include "deocc/crop.hpp"

#include <algorithm>
#include <cmath>

#include "deocc/errors.hpp"

namespace deocc {

namespace {

int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Output index covering window offset d (inverse of the nearest sampling).
int patch_index(int d, int side, int out_size) {
    return static_cast<int>((2LL * d + 1) * out_size / (2LL * side));
}

}  // namespace

CropTransform crop_window(const BinaryMask& center_object, const CropPolicy& policy) {
    const auto box = bounding_box(center_object);
    if (!box) throw EmptyTargetError("adaptive crop centered on an empty object");
    if (policy.out_size <= 0 || policy.enlarge_ratio <= 0.0)
        throw DomainError("crop policy needs positive out_size and enlarge_ratio");
    const int extent = std::max(box->w, box->h);
    const int side = std::max(1, static_cast<int>(std::lround(policy.enlarge_ratio * extent)));
    CropTransform t;
    t.side = side;
    t.x = box->x + floor_div(box->w - side, 2);
    t.y = box->y + floor_div(box->h - side, 2);
    t.out_size = policy.out_size;
    t.canvas_width = center_object.width();
    t.canvas_height = center_object.height();
    return t;
}

BinaryMask crop_mask(const BinaryMask& m, const CropTransform& t) {
    if (m.width() != t.canvas_width || m.height() != t.canvas_height)
        throw DimensionError("crop_mask: mask does not match the transform canvas");
    BinaryMask out(t.out_size, t.out_size);
    for (int v = 0; v < t.out_size; ++v) {
        const int sy = t.source_y(v);
        for (int u = 0; u < t.out_size; ++u) out.set(u, v, m.get(t.source_x(u), sy));
    }
    return out;
}

RgbImage crop_image(const RgbImage& image, const CropTransform& t) {
    if (image.width() != t.canvas_width || image.height() != t.canvas_height)
        throw DimensionError("crop_image: image does not match the transform canvas");
    RgbImage out(t.out_size, t.out_size);
    const double scale = static_cast<double>(t.side) / t.out_size;
    auto sample = [&](int x, int y, int c) -> double {
        return image.in_bounds(x, y) ? image.at(x, y)[c] : 0.0;
    };
    for (int v = 0; v < t.out_size; ++v) {
        const double sy = t.y + (v + 0.5) * scale - 0.5;
        const int y0 = static_cast<int>(std::floor(sy));
        const double fy = sy - y0;
        for (int u = 0; u < t.out_size; ++u) {
            const double sx = t.x + (u + 0.5) * scale - 0.5;
            const int x0 = static_cast<int>(std::floor(sx));
            const double fx = sx - x0;
            Rgb px;
            for (int c = 0; c < 3; ++c) {
                const double top = sample(x0, y0, c) * (1 - fx) + sample(x0 + 1, y0, c) * fx;
                const double bot =
                    sample(x0, y0 + 1, c) * (1 - fx) + sample(x0 + 1, y0 + 1, c) * fx;
                const double val = top * (1 - fy) + bot * fy;
                px[c] = static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
            }
            out.at(u, v) = px;
        }
    }
    return out;
}

std::vector<float> crop_plane(const std::vector<float>& plane, const CropTransform& t) {
    if (plane.size() != static_cast<std::size_t>(t.canvas_width) * t.canvas_height)
        throw DimensionError("crop_plane: plane does not match the transform canvas");
    std::vector<float> out(static_cast<std::size_t>(t.out_size) * t.out_size, 0.0f);
    for (int v = 0; v < t.out_size; ++v) {
        const int sy = t.source_y(v);
        if (sy < 0 || sy >= t.canvas_height) continue;
        for (int u = 0; u < t.out_size; ++u) {
            const int sx = t.source_x(u);
            if (sx < 0 || sx >= t.canvas_width) continue;
            out[static_cast<std::size_t>(v) * t.out_size + u] =
                plane[static_cast<std::size_t>(sy) * t.canvas_width + sx];
        }
    }
    return out;
}

CropResult adaptive_crop(const std::vector<BinaryMask>& masks, const RgbImage* image,
                         const BinaryMask& center_object, const CropPolicy& policy) {
    CropResult result;
    result.transform = crop_window(center_object, policy);
    result.masks.reserve(masks.size());
    for (const auto& m : masks) result.masks.push_back(crop_mask(m, result.transform));
    if (image) result.image = crop_image(*image, result.transform);
    return result;
}

BinaryMask paste_back(const BinaryMask& patch, const CropTransform& t) {
    if (patch.width() != t.out_size || patch.height() != t.out_size)
        throw DimensionError("paste_back: patch size differs from the transform output size");
    BinaryMask out(t.canvas_width, t.canvas_height);
    const int x0 = std::max(0, t.x), x1 = std::min(t.canvas_width, t.x + t.side);
    const int y0 = std::max(0, t.y), y1 = std::min(t.canvas_height, t.y + t.side);
    for (int y = y0; y < y1; ++y) {
        const int v = patch_index(y - t.y, t.side, t.out_size);
        for (int x = x0; x < x1; ++x)
            out.set(x, y, patch.at(patch_index(x - t.x, t.side, t.out_size), v));
    }
    return out;
}

std::vector<float> paste_back_plane(const std::vector<float>& patch, const CropTransform& t) {
    if (patch.size() != static_cast<std::size_t>(t.out_size) * t.out_size)
        throw DimensionError("paste_back_plane: patch size differs from the transform");
    std::vector<float> out(static_cast<std::size_t>(t.canvas_width) * t.canvas_height, 0.0f);
    const int x0 = std::max(0, t.x), x1 = std::min(t.canvas_width, t.x + t.side);
    const int y0 = std::max(0, t.y), y1 = std::min(t.canvas_height, t.y + t.side);
    for (int y = y0; y < y1; ++y) {
        const int v = patch_index(y - t.y, t.side, t.out_size);
        for (int x = x0; x < x1; ++x) {
            const int u = patch_index(x - t.x, t.side, t.out_size);
            out[static_cast<std::size_t>(y) * t.canvas_width + x] =
                patch[static_cast<std::size_t>(v) * t.out_size + u];
        }
    }
    return out;
}

RgbImage paste_back_image(const RgbImage& patch, const CropTransform& t, const RgbImage& base) {
    if (patch.width() != t.out_size || patch.height() != t.out_size)
        throw DimensionError("paste_back_image: patch size differs from the transform");
    if (base.width() != t.canvas_width || base.height() != t.canvas_height)
        throw DimensionError("paste_back_image: base does not match the transform canvas");
    RgbImage out = base;
    const int x0 = std::max(0, t.x), x1 = std::min(t.canvas_width, t.x + t.side);
    const int y0 = std::max(0, t.y), y1 = std::min(t.canvas_height, t.y + t.side);
    for (int y = y0; y < y1; ++y) {
        const int v = patch_index(y - t.y, t.side, t.out_size);
        for (int x = x0; x < x1; ++x)
            out.at(x, y) = patch.at(patch_index(x - t.x, t.side, t.out_size), v);
    }
    return out;
}

}  // namespace deocc
