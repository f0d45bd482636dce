#pragma once

#include <optional>
#include <vector>

#include "deocc/image.hpp"
#include "deocc/mask.hpp"

namespace deocc {

/// A square window of the canvas resampled to out_size x out_size. The window
/// may extend past the canvas; those pixels read as zero / black.
struct CropTransform {
    int x = 0;
    int y = 0;
    int side = 0;
    int out_size = 0;
    int canvas_width = 0;
    int canvas_height = 0;

    /// Source pixel sampled (nearest) by output pixel u along one axis.
    int source_x(int u) const { return x + nearest_offset(u); }
    int source_y(int v) const { return y + nearest_offset(v); }

    bool operator==(const CropTransform&) const = default;

private:
    int nearest_offset(int u) const {
        return static_cast<int>((2LL * u + 1) * side / (2LL * out_size));
    }
};

struct CropPolicy {
    double enlarge_ratio = 2.0;
    int out_size = 64;
};

/// Window centered on the bounding box of `center_object`, side
/// round(enlarge_ratio * max(bbox w, bbox h)). Throws EmptyTargetError for an
/// empty center object.
CropTransform crop_window(const BinaryMask& center_object, const CropPolicy& policy);

BinaryMask crop_mask(const BinaryMask& m, const CropTransform& t);

/// Bilinear resample of the window; outside-canvas samples are black.
RgbImage crop_image(const RgbImage& image, const CropTransform& t);

/// Resampled values of a float plane of canvas size (nearest), used for
/// scalar-weighted channels.
std::vector<float> crop_plane(const std::vector<float>& plane, const CropTransform& t);

struct CropResult {
    std::vector<BinaryMask> masks;
    std::optional<RgbImage> image;
    CropTransform transform;
};

CropResult adaptive_crop(const std::vector<BinaryMask>& masks, const RgbImage* image,
                         const BinaryMask& center_object, const CropPolicy& policy);

/// Nearest-resamples a patch back onto an empty canvas of the transform's
/// canvas size. Pixels outside the window are zero.
BinaryMask paste_back(const BinaryMask& patch, const CropTransform& t);

/// Same as paste_back but for a float probability patch (out_size^2 values);
/// returns canvas-sized values, 0 outside the window.
std::vector<float> paste_back_plane(const std::vector<float>& patch, const CropTransform& t);

/// Paste-back of an RGB patch; pixels outside the window copy `base`.
RgbImage paste_back_image(const RgbImage& patch, const CropTransform& t, const RgbImage& base);

}  // namespace deocc
