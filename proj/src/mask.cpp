#include "deocc/mask.hpp"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "deocc/errors.hpp"

namespace deocc {

BinaryMask::BinaryMask(int width, int height, bool value)
    : width_(width), height_(height) {
    if (width < 0 || height < 0) throw DimensionError("negative mask dimensions");
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                 value ? 1 : 0);
}

BinaryMask BinaryMask::from_rect(int width, int height, Rect r) {
    BinaryMask m(width, height);
    const int x0 = std::max(r.x, 0), x1 = std::min(r.right(), width);
    const int y0 = std::max(r.y, 0), y1 = std::min(r.bottom(), height);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) m.set(x, y);
    return m;
}

bool BinaryMask::any() const {
    return std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

BinaryMask set_op(const BinaryMask& a, const BinaryMask& b, SetOp op) {
    if (!a.same_dims(b)) throw DimensionError("set operation on masks of different dimensions");
    BinaryMask out(a.width(), a.height());
    const auto& ab = a.bits();
    const auto& bb = b.bits();
    auto& ob = out.bits();
    switch (op) {
        case SetOp::Union:
            for (std::size_t i = 0; i < ab.size(); ++i) ob[i] = ab[i] | bb[i];
            break;
        case SetOp::Intersect:
            for (std::size_t i = 0; i < ab.size(); ++i) ob[i] = ab[i] & bb[i];
            break;
        case SetOp::Diff:
            for (std::size_t i = 0; i < ab.size(); ++i) ob[i] = ab[i] & (bb[i] ^ 1);
            break;
    }
    return out;
}

BinaryMask complement(const BinaryMask& m) {
    BinaryMask out = m;
    for (auto& b : out.bits()) b ^= 1;
    return out;
}

std::size_t area(const BinaryMask& m) {
    return static_cast<std::size_t>(std::count(m.bits().begin(), m.bits().end(), 1));
}

bool overlaps(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_dims(b)) throw DimensionError("overlap test on masks of different dimensions");
    for (std::size_t i = 0; i < a.bits().size(); ++i)
        if (a.bits()[i] & b.bits()[i]) return true;
    return false;
}

bool is_subset(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_dims(b)) throw DimensionError("subset test on masks of different dimensions");
    for (std::size_t i = 0; i < a.bits().size(); ++i)
        if (a.bits()[i] && !b.bits()[i]) return false;
    return true;
}

BinaryMask dilate(const BinaryMask& m, int radius) {
    if (radius < 0) throw DomainError("negative dilation radius");
    if (radius == 0) return m;
    const int w = m.width(), h = m.height();
    // Separable: horizontal pass then vertical pass.
    BinaryMask horiz(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!m.at(x, y)) continue;
            const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
            for (int xx = x0; xx <= x1; ++xx) horiz.set(xx, y);
        }
    }
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!horiz.at(x, y)) continue;
            const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
            for (int yy = y0; yy <= y1; ++yy) out.set(x, yy);
        }
    }
    return out;
}

bool are_neighbors(const BinaryMask& a, const BinaryMask& b, int dilation_radius) {
    if (!a.same_dims(b)) throw DimensionError("neighbor test on masks of different dimensions");
    return overlaps(dilate(a, dilation_radius), dilate(b, dilation_radius));
}

std::optional<Rect> bounding_box(const BinaryMask& m) {
    int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m.at(x, y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return std::nullopt;
    return Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

int bottom_row(const BinaryMask& m) {
    for (int y = m.height() - 1; y >= 0; --y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y)) return y;
    return -1;
}

BinaryMask translate(const BinaryMask& m, int dx, int dy) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (!m.at(x, y)) continue;
            const int nx = x + dx, ny = y + dy;
            if (out.in_bounds(nx, ny)) out.set(nx, ny);
        }
    }
    return out;
}

std::vector<std::uint32_t> rle_encode(const BinaryMask& m) {
    std::vector<std::uint32_t> counts;
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (auto b : m.bits()) {
        if (b != current) {
            counts.push_back(run);
            run = 0;
            current = b;
        }
        ++run;
    }
    counts.push_back(run);
    return counts;
}

BinaryMask rle_decode(int width, int height, const std::vector<std::uint32_t>& counts) {
    BinaryMask m(width, height);
    const std::uint64_t total =
        std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total != m.pixel_count())
        throw FormatError("RLE counts do not sum to width*height");
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (auto c : counts) {
        std::fill_n(m.bits().begin() + static_cast<std::ptrdiff_t>(pos), c, value);
        pos += c;
        value ^= 1;
    }
    return m;
}

nlohmann::json mask_to_json(const BinaryMask& m) {
    return {{"size", {m.height(), m.width()}}, {"counts", rle_encode(m)}};
}

BinaryMask mask_from_json(const nlohmann::json& j) {
    try {
        const int h = j.at("size").at(0).get<int>();
        const int w = j.at("size").at(1).get<int>();
        return rle_decode(w, h, j.at("counts").get<std::vector<std::uint32_t>>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed RLE mask: ") + e.what());
    }
}

}  // namespace deocc
