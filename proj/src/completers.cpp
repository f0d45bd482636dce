#include "deocc/completers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "deocc/errors.hpp"
#include "deocc/selfsup.hpp"

namespace deocc {

BinaryMask oracle_complete(const Scene& scene, int i, const BinaryMask& eraser) {
    if (i < 0 || static_cast<std::size_t>(i) >= scene.size())
        throw LookupError("unknown object id " + std::to_string(i));
    const auto& o = scene.objects[static_cast<std::size_t>(i)];
    return unite(o.modal, intersect(o.amodal, eraser));
}

BinaryMask OracleCompleter::complete_mask(const BinaryMask& target_modal, const BinaryMask& eraser,
                                          const CompletionContext& ctx) const {
    if (!ctx.object_id) throw LookupError("oracle completer needs an object id");
    const int i = *ctx.object_id;
    if (i < 0 || static_cast<std::size_t>(i) >= scene_->size())
        throw LookupError("unknown object id " + std::to_string(i));
    return unite(target_modal, intersect(scene_->objects[static_cast<std::size_t>(i)].amodal, eraser));
}

namespace {

struct P {
    long long x, y;
};

long long cross(const P& o, const P& a, const P& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

BinaryMask convex_hull_mask(const BinaryMask& m) {
    BinaryMask out(m.width(), m.height());
    const auto box = bounding_box(m);
    if (!box) return out;

    // Only the extreme pixels of each row can be hull vertices.
    std::vector<P> pts;
    for (int y = box->y; y < box->bottom(); ++y) {
        int lo = -1, hi = -1;
        for (int x = box->x; x < box->right(); ++x)
            if (m.at(x, y)) {
                if (lo < 0) lo = x;
                hi = x;
            }
        if (lo < 0) continue;
        pts.push_back({lo, y});
        if (hi != lo) pts.push_back({hi, y});
    }
    std::sort(pts.begin(), pts.end(), [](const P& a, const P& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });

    // Andrew's monotone chain, collinear points dropped.
    std::vector<P> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(pts.size() == 1 ? 1 : k - 1);

    for (int y = box->y; y < box->bottom(); ++y)
        for (int x = box->x; x < box->right(); ++x) {
            const P p{x, y};
            bool inside = true;
            for (std::size_t i = 0; i < hull.size() && inside; ++i)
                if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0) inside = false;
            if (inside) out.set(x, y, true);
        }
    return out;
}

BinaryMask convex_complete(const BinaryMask& target_modal, const BinaryMask& eraser, bool refined) {
    if (!target_modal.same_dims(eraser)) throw DimensionError("convex_complete: mask size mismatch");
    if (target_modal.none()) throw EmptyTargetError("convex_complete: empty target");
    auto hull = unite(convex_hull_mask(target_modal), target_modal);
    if (!refined) return hull;
    return intersect(hull, unite(target_modal, eraser));
}

NeuralCompleter::NeuralCompleter(Net net, bool use_rgb) : net_(std::move(net)), use_rgb_(use_rgb) {
    if (net_.config().in_channels != mask_input_channels(use_rgb_) || net_.config().out_channels != 1)
        throw ShapeError("network channels do not match the mask-completion input layout");
}

Tensor neural_mask_input(const BinaryMask& target_modal, const BinaryMask& eraser,
                         const CompletionContext& ctx, bool use_rgb, CropTransform& crop_out) {
    if (!target_modal.same_dims(eraser)) throw DimensionError("neural completion: mask size mismatch");
    crop_out = crop_window(target_modal, ctx.crop);
    const int s = ctx.crop.out_size;
    Tensor x(1, mask_input_channels(use_rgb), s, s);
    const auto in = crop_mask(target_modal, crop_out);
    const auto er = crop_mask(eraser, crop_out);
    const float weight = static_cast<float>(ctx.category) / static_cast<float>(ctx.num_categories);
    auto p0 = x.plane(0, 0), p1 = x.plane(0, 1), p2 = x.plane(0, 2);
    for (std::size_t i = 0; i < p0.size(); ++i) {
        p0[i] = in.bits()[i] ? 1.0f : 0.0f;
        p1[i] = er.bits()[i] ? 1.0f : 0.0f;
        p2[i] = in.bits()[i] ? weight : 0.0f;
    }
    if (use_rgb) {
        if (!ctx.image) throw DomainError("RGB input requested without an image");
        const auto img = crop_image(erase(*ctx.image, eraser), crop_out);
        for (int c = 0; c < 3; ++c) {
            auto plane = x.plane(0, 3 + c);
            for (std::size_t i = 0; i < plane.size(); ++i)
                plane[i] = static_cast<float>(img.pixels()[i][c]) / 255.0f;
        }
    }
    return x;
}

BinaryMask NeuralCompleter::raw_complete(const BinaryMask& target_modal, const BinaryMask& eraser,
                                         const CompletionContext& ctx) const {
    CropTransform t;
    const auto x = neural_mask_input(target_modal, eraser, ctx, use_rgb_, t);
    const auto logits = net_.forward(x);
    BinaryMask patch(t.out_size, t.out_size);
    const auto plane = logits.plane(0, 0);
    // sigmoid(l) > 0.5 exactly when l > 0
    for (std::size_t i = 0; i < plane.size(); ++i)
        if (plane[i] > 0.0f) patch.set(static_cast<int>(i) % t.out_size, static_cast<int>(i) / t.out_size, true);
    return paste_back(patch, t);
}

BinaryMask NeuralCompleter::complete_mask(const BinaryMask& target_modal, const BinaryMask& eraser,
                                          const CompletionContext& ctx) const {
    if (eraser.none() && target_modal.same_dims(eraser)) return target_modal;
    return unite(target_modal, intersect(raw_complete(target_modal, eraser, ctx), eraser));
}

RgbImage diffusion_fill(const RgbImage& image, const BinaryMask& region, const BinaryMask& guide,
                        const DiffusionConfig& cfg) {
    const int w = image.width(), h = image.height();
    if (region.width() != w || region.height() != h || guide.width() != w || guide.height() != h)
        throw DimensionError("diffusion_fill: region/guide size differs from image");
    if (region.none()) return image;

    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    const auto& rb = region.bits();
    const auto& gb = guide.bits();
    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + x; };
    // 8-neighborhood, so pixels that touch the rest of an object only at a
    // corner still belong to its component.
    constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

    // Label region components. A component touching the guide takes its
    // boundary values from guide pixels only; one with no known neighbor at
    // all cannot be filled.
    std::vector<int> comp(n, -1);
    std::vector<char> comp_guided;
    for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
            if (!rb[idx(x0, y0)] || comp[idx(x0, y0)] >= 0) continue;
            const int id = static_cast<int>(comp_guided.size());
            bool bounded = false, guided = false;
            std::deque<std::pair<int, int>> q{{x0, y0}};
            comp[idx(x0, y0)] = id;
            while (!q.empty()) {
                auto [x, y] = q.front();
                q.pop_front();
                for (int d = 0; d < 8; ++d) {
                    const int nx = x + dx[d], ny = y + dy[d];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const auto j = idx(nx, ny);
                    if (!rb[j]) {
                        bounded = true;
                        guided = guided || gb[j];
                    } else if (comp[j] < 0) {
                        comp[j] = id;
                        q.emplace_back(nx, ny);
                    }
                }
            }
            if (!bounded) throw NoBoundaryError("diffusion_fill: a region component has no known boundary");
            comp_guided.push_back(guided ? 1 : 0);
        }
    // Known pixel j may feed region pixel i.
    auto usable = [&](std::size_t i, std::size_t j) {
        return rb[j] || !comp_guided[static_cast<std::size_t>(comp[i])] || gb[j];
    };

    // Neighbor lists per region pixel.
    struct Node {
        std::size_t self;
        std::array<std::size_t, 8> nb;
        int count;
    };
    std::vector<Node> nodes;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!rb[idx(x, y)]) continue;
            Node node{idx(x, y), {}, 0};
            for (int d = 0; d < 8; ++d) {
                const int nx = x + dx[d], ny = y + dy[d];
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const auto j = idx(nx, ny);
                if (!usable(node.self, j)) continue;
                node.nb[static_cast<std::size_t>(node.count++)] = j;
            }
            nodes.push_back(node);
        }

    std::vector<float> cur(n * 3);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) cur[i * 3 + c] = image.pixels()[i][c];

    // Onion-peel start: each ring takes the mean of already-set neighbors.
    std::vector<char> known(n);
    for (std::size_t i = 0; i < n; ++i) known[i] = !rb[i];
    std::vector<std::size_t> pending;
    for (const auto& nd : nodes) pending.push_back(nd.self);
    while (!pending.empty()) {
        std::vector<std::size_t> ring, rest;
        std::vector<std::array<float, 3>> values;
        for (const auto p : pending) {
            const int x = static_cast<int>(p % static_cast<std::size_t>(w));
            const int y = static_cast<int>(p / static_cast<std::size_t>(w));
            std::array<float, 3> sum{0, 0, 0};
            int cnt = 0;
            for (int d = 0; d < 8; ++d) {
                const int nx = x + dx[d], ny = y + dy[d];
                if (nx < 0 || ny < 0 || nx >= w || ny >= h || !known[idx(nx, ny)] || !usable(p, idx(nx, ny)))
                    continue;
                for (int c = 0; c < 3; ++c) sum[static_cast<std::size_t>(c)] += cur[idx(nx, ny) * 3 + c];
                ++cnt;
            }
            if (cnt == 0) {
                rest.push_back(p);
                continue;
            }
            ring.push_back(p);
            values.push_back({sum[0] / cnt, sum[1] / cnt, sum[2] / cnt});
        }
        if (ring.empty()) break;
        for (std::size_t k = 0; k < ring.size(); ++k) {
            for (int c = 0; c < 3; ++c) cur[ring[k] * 3 + c] = values[k][static_cast<std::size_t>(c)];
            known[ring[k]] = 1;
        }
        pending.swap(rest);
    }

    std::vector<float> next = cur;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        float delta = 0;
        for (const auto& nd : nodes) {
            for (int c = 0; c < 3; ++c) {
                float sum = 0;
                for (int k = 0; k < nd.count; ++k) sum += cur[nd.nb[static_cast<std::size_t>(k)] * 3 + c];
                const float v = sum / static_cast<float>(nd.count);
                delta = std::max(delta, std::abs(v - cur[nd.self * 3 + c]));
                next[nd.self * 3 + c] = v;
            }
        }
        cur.swap(next);
        if (delta < cfg.tolerance) break;
    }

    RgbImage out = image;
    for (const auto& nd : nodes)
        for (int c = 0; c < 3; ++c)
            out.pixels()[nd.self][c] =
                static_cast<std::uint8_t>(std::clamp(std::lround(cur[nd.self * 3 + c]), 0L, 255L));
    return out;
}

RgbImage OracleContentCompleter::fill(const RgbImage& image, const BinaryMask& region, const BinaryMask&,
                                      const CompletionContext& ctx) const {
    if (image.width() != scene_->width() || image.height() != scene_->height())
        throw DimensionError("oracle content: image size differs from scene");
    RgbImage out = image;
    if (ctx.object_id) {
        const int i = *ctx.object_id;
        if (i < 0 || static_cast<std::size_t>(i) >= scene_->size())
            throw LookupError("unknown object id " + std::to_string(i));
        copy_where(out, scene_->object_raster(static_cast<std::size_t>(i)), region);
    } else {
        copy_where(out, scene_->background_raster(), region);
    }
    return out;
}

NeuralContentCompleter::NeuralContentCompleter(Net net, DiffusionConfig fallback)
    : net_(std::move(net)), fallback_(fallback) {
    if (net_.config().in_channels != kContentInputChannels || net_.config().out_channels != 3)
        throw ShapeError("network channels do not match the content-completion layout");
}

RgbImage NeuralContentCompleter::fill(const RgbImage& image, const BinaryMask& region, const BinaryMask& guide,
                                      const CompletionContext& ctx) const {
    if (!ctx.object_id) return diffusion_fill(image, region, guide, fallback_);
    if (region.none()) return image;
    const auto t = crop_window(unite(guide, region), ctx.crop);
    const auto region_c = crop_mask(region, t);
    const auto guide_c = crop_mask(guide, t);
    const auto erased = erase(crop_image(image, t), region_c);
    const int s = t.out_size;
    Tensor x(1, kContentInputChannels, s, s);
    for (int c = 0; c < 3; ++c) {
        auto plane = x.plane(0, c);
        for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = static_cast<float>(erased.pixels()[i][c]) / 255.0f;
    }
    auto pg = x.plane(0, 3), pr = x.plane(0, 4);
    for (std::size_t i = 0; i < pg.size(); ++i) {
        pg[i] = guide_c.bits()[i] ? 1.0f : 0.0f;
        pr[i] = region_c.bits()[i] ? 1.0f : 0.0f;
    }
    const auto y = net_.forward(x);
    RgbImage patch(s, s);
    for (int c = 0; c < 3; ++c) {
        const auto plane = y.plane(0, c);
        for (std::size_t i = 0; i < plane.size(); ++i)
            patch.pixels()[i][c] = static_cast<std::uint8_t>(
                std::clamp(std::lround(static_cast<double>(plane[i]) * 255.0), 0L, 255L));
    }
    const auto pasted = paste_back_image(patch, t, image);
    RgbImage out = image;
    copy_where(out, pasted, region);
    return out;
}

}  // namespace deocc
