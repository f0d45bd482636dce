#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace deocc {

/// Axis-aligned pixel rectangle, half-open: [x, x+w) x [y, y+h).
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const { return x + w; }
    int bottom() const { return y + h; }
    bool operator==(const Rect&) const = default;
};

/// A set of pixels on a fixed width x height grid, stored row-major with one
/// byte per pixel (0 or 1). All binary operations require equal dimensions.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool value = false);

    static BinaryMask full(int width, int height) { return {width, height, true}; }
    static BinaryMask from_rect(int width, int height, Rect r);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return bits_.size(); }
    bool same_dims(const BinaryMask& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    /// Out-of-bounds reads are false.
    bool get(int x, int y) const { return in_bounds(x, y) && at(x, y); }
    void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }

    bool any() const;
    bool none() const { return !any(); }

    const std::vector<std::uint8_t>& bits() const { return bits_; }
    std::vector<std::uint8_t>& bits() { return bits_; }

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

enum class SetOp { Union, Intersect, Diff };

/// Pixelwise boolean combination. Throws DimensionError on mismatch.
BinaryMask set_op(const BinaryMask& a, const BinaryMask& b, SetOp op);

inline BinaryMask unite(const BinaryMask& a, const BinaryMask& b) {
    return set_op(a, b, SetOp::Union);
}
inline BinaryMask intersect(const BinaryMask& a, const BinaryMask& b) {
    return set_op(a, b, SetOp::Intersect);
}
inline BinaryMask subtract(const BinaryMask& a, const BinaryMask& b) {
    return set_op(a, b, SetOp::Diff);
}
BinaryMask complement(const BinaryMask& m);

std::size_t area(const BinaryMask& m);

/// True when a and b share at least one pixel.
bool overlaps(const BinaryMask& a, const BinaryMask& b);

/// a is a subset of b.
bool is_subset(const BinaryMask& a, const BinaryMask& b);

/// Square (Chebyshev) dilation by `radius` pixels.
BinaryMask dilate(const BinaryMask& m, int radius);

/// Two masks are neighbors when their `radius`-dilations meet, i.e. the gap
/// between them is at most 2*radius pixels. Symmetric.
bool are_neighbors(const BinaryMask& a, const BinaryMask& b, int dilation_radius = 1);

/// Tight bounding box; nullopt for an empty mask.
std::optional<Rect> bounding_box(const BinaryMask& m);

/// Largest row index holding a set pixel, or -1 when empty.
int bottom_row(const BinaryMask& m);

/// Shift by (dx, dy); pixels leaving the grid are dropped.
BinaryMask translate(const BinaryMask& m, int dx, int dy);

/// Row-major run-length encoding: counts alternate starting with a run of
/// zeros (possibly of length 0). JSON form: {"size": [h, w], "counts": [...]}.
std::vector<std::uint32_t> rle_encode(const BinaryMask& m);
BinaryMask rle_decode(int width, int height, const std::vector<std::uint32_t>& counts);

nlohmann::json mask_to_json(const BinaryMask& m);
BinaryMask mask_from_json(const nlohmann::json& j);

}  // namespace deocc
