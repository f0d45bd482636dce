#include "deocc/scene.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "deocc/errors.hpp"
#include "deocc/image.hpp"

namespace deocc {

std::string to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Rect: return "rect";
        case ShapeKind::Circle: return "circle";
        case ShapeKind::Triangle: return "triangle";
        case ShapeKind::ConvexPolygon: return "convex_polygon";
        case ShapeKind::LShape: return "l_shape";
    }
    return "rect";
}

ShapeKind shape_kind_from_string(const std::string& name) {
    static const std::map<std::string, ShapeKind> kinds{
        {"rect", ShapeKind::Rect},
        {"circle", ShapeKind::Circle},
        {"triangle", ShapeKind::Triangle},
        {"convex_polygon", ShapeKind::ConvexPolygon},
        {"l_shape", ShapeKind::LShape}};
    const auto it = kinds.find(name);
    if (it == kinds.end()) throw FormatError("unknown shape kind: " + name);
    return it->second;
}

Rgb Fill::color_at(int x, int y) const {
    const int p = std::max(1, period);
    switch (pattern) {
        case Pattern::Flat: return primary;
        case Pattern::Stripes: return ((x + y) / p) % 2 == 0 ? primary : secondary;
        case Pattern::Checker: return ((x / p) + (y / p)) % 2 == 0 ? primary : secondary;
    }
    return primary;
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool inside_convex(const std::vector<Point>& poly, double px, double py) {
    if (poly.size() < 3) return false;
    double orientation = 0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        orientation += cross(Point{}, poly[i], poly[(i + 1) % poly.size()]);
    const double sign = orientation >= 0 ? 1.0 : -1.0;
    const Point p{px, py};
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (sign * cross(poly[i], poly[(i + 1) % poly.size()], p) < 0) return false;
    }
    return true;
}

bool shape_contains(const ShapeSpec& s, int x, int y) {
    const double px = x + 0.5, py = y + 0.5;
    switch (s.kind) {
        case ShapeKind::Rect:
            return x >= s.box.x && x < s.box.right() && y >= s.box.y && y < s.box.bottom();
        case ShapeKind::LShape: {
            if (!(x >= s.box.x && x < s.box.right() && y >= s.box.y && y < s.box.bottom()))
                return false;
            const bool left = x < s.box.x + s.notch_w;
            const bool right = x >= s.box.right() - s.notch_w;
            const bool top = y < s.box.y + s.notch_h;
            const bool bottom = y >= s.box.bottom() - s.notch_h;
            switch (s.notch_corner) {
                case 0: return !(left && top);
                case 1: return !(right && top);
                case 2: return !(right && bottom);
                default: return !(left && bottom);
            }
        }
        case ShapeKind::Circle: {
            const double dx = px - s.center.x, dy = py - s.center.y;
            return dx * dx + dy * dy <= s.radius * s.radius;
        }
        case ShapeKind::Triangle:
        case ShapeKind::ConvexPolygon:
            return inside_convex(s.vertices, px, py);
    }
    return false;
}

}  // namespace

BinaryMask rasterize(const ShapeSpec& shape, int width, int height) {
    BinaryMask m(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (shape_contains(shape, x, y)) m.set(x, y);
    return m;
}

RgbImage paint_shape(const ShapeSpec& shape, const BinaryMask& amodal) {
    RgbImage out(amodal.width(), amodal.height());
    for (int y = 0; y < amodal.height(); ++y)
        for (int x = 0; x < amodal.width(); ++x)
            if (amodal.at(x, y)) out.at(x, y) = shape.fill.color_at(x, y);
    return out;
}

std::vector<BinaryMask> Scene::modal_masks() const {
    std::vector<BinaryMask> out;
    out.reserve(objects.size());
    for (const auto& o : objects) out.push_back(o.modal);
    return out;
}

std::vector<BinaryMask> Scene::amodal_masks() const {
    std::vector<BinaryMask> out;
    out.reserve(objects.size());
    for (const auto& o : objects) out.push_back(o.amodal);
    return out;
}

std::vector<int> Scene::categories() const {
    std::vector<int> out;
    out.reserve(objects.size());
    for (const auto& o : objects) out.push_back(o.category_id);
    return out;
}

RgbImage Scene::object_raster(std::size_t i) const {
    if (i >= objects.size()) throw LookupError("object index out of range");
    return paint_shape(objects[i].shape, objects[i].amodal);
}

RgbImage Scene::background_raster() const {
    return RgbImage(width(), height(), background_color);
}

Scene render_scene(const SceneSpec& spec) {
    const int w = spec.width, h = spec.height;
    const std::size_t n = spec.shapes.size();
    if (spec.mode == SceneSpec::Mode::ZIndex) {
        if (spec.z.size() != n) throw SpecificationError("z index count differs from shape count");
        auto sorted = spec.z;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw SpecificationError("z indices must be unique");
    }

    // above_rel[i][j]: +1 i above j, -1 j above i, 0 undefined.
    std::vector<std::vector<int>> above_rel(n, std::vector<int>(n, 0));
    if (spec.mode == SceneSpec::Mode::Pairwise) {
        for (auto [i, j] : spec.above) {
            if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n ||
                static_cast<std::size_t>(j) >= n || i == j)
                throw SpecificationError("pairwise relation references an invalid shape");
            if (above_rel[i][j] == -1)
                throw SpecificationError("pairwise relation is contradictory");
            above_rel[i][j] = 1;
            above_rel[j][i] = -1;
        }
    }
    auto beats = [&](std::size_t i, std::size_t j) {
        if (spec.mode == SceneSpec::Mode::ZIndex) return spec.z[i] > spec.z[j];
        if (above_rel[i][j] == 0)
            throw SpecificationError("pairwise relation undefined for overlapping shapes " +
                                     std::to_string(i) + " and " + std::to_string(j));
        return above_rel[i][j] == 1;
    };

    Scene scene;
    scene.background_color = spec.background;
    scene.image = RgbImage(w, h, spec.background);
    scene.background = BinaryMask(w, h, true);
    scene.objects.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& o = scene.objects[i];
        o.id = static_cast<int>(i);
        o.category_id = spec.shapes[i].category_id;
        o.shape = spec.shapes[i];
        o.amodal = rasterize(spec.shapes[i], w, h);
        o.modal = BinaryMask(w, h);
    }
    scene.gt_order.assign(n, std::vector<int>(n, 0));

    std::vector<std::size_t> covering;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            covering.clear();
            for (std::size_t i = 0; i < n; ++i)
                if (scene.objects[i].amodal.at(x, y)) covering.push_back(i);
            if (covering.empty()) continue;
            std::size_t owner = covering.front();
            for (std::size_t k = 1; k < covering.size(); ++k)
                if (beats(covering[k], owner)) owner = covering[k];
            for (auto other : covering) {
                if (other != owner && !beats(owner, other))
                    throw SpecificationError("overlap pixel has no single winner");
            }
            auto& winner = scene.objects[owner];
            winner.modal.set(x, y);
            scene.background.set(x, y, false);
            scene.image.at(x, y) = winner.shape.fill.color_at(x, y);
            for (auto other : covering) {
                if (other == owner) continue;
                scene.gt_order[owner][other] = 1;
                scene.gt_order[other][owner] = -1;
            }
        }
    }
    return scene;
}

double occlusion_ratio(const Scene& scene, std::size_t i) {
    if (i >= scene.objects.size()) throw LookupError("object index out of range");
    const auto amodal_area = area(scene.objects[i].amodal);
    if (amodal_area == 0) throw DomainError("occlusion ratio of an empty amodal mask");
    return 1.0 - static_cast<double>(area(scene.objects[i].modal)) /
                     static_cast<double>(amodal_area);
}

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Rgb random_color(std::mt19937_64& rng, Rgb avoid) {
    for (;;) {
        Rgb c{static_cast<std::uint8_t>(uniform_int(rng, 20, 235)),
              static_cast<std::uint8_t>(uniform_int(rng, 20, 235)),
              static_cast<std::uint8_t>(uniform_int(rng, 20, 235))};
        const int dist = std::abs(c.r - avoid.r) + std::abs(c.g - avoid.g) + std::abs(c.b - avoid.b);
        if (dist >= 90) return c;
    }
}

Fill random_fill(std::mt19937_64& rng, bool textured, Rgb background) {
    Fill f;
    f.primary = random_color(rng, background);
    if (!textured) return f;
    f.pattern = static_cast<Fill::Pattern>(uniform_int(rng, 0, 2));
    auto shift = [&](std::uint8_t v) {
        const int d = uniform_int(rng, 35, 70);
        return static_cast<std::uint8_t>(v > 127 ? v - d : v + d);
    };
    f.secondary = Rgb{shift(f.primary.r), shift(f.primary.g), shift(f.primary.b)};
    f.period = uniform_int(rng, 2, 5);
    return f;
}

ShapeSpec random_shape(std::mt19937_64& rng, const SceneSamplerConfig& cfg, Rgb background) {
    ShapeSpec s;
    s.kind = cfg.kinds[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(cfg.kinds.size()) - 1))];
    const int bw = uniform_int(rng, cfg.min_size, cfg.max_size);
    const int bh = uniform_int(rng, cfg.min_size, cfg.max_size);
    const int x0 = uniform_int(rng, 0, cfg.width - bw);
    const int y0 = uniform_int(rng, 0, cfg.height - bh);
    switch (s.kind) {
        case ShapeKind::Rect:
            s.box = Rect{x0, y0, bw, bh};
            break;
        case ShapeKind::LShape:
            s.box = Rect{x0, y0, bw, bh};
            s.notch_w = static_cast<int>(std::lround(bw * uniform_real(rng, 0.35, 0.6)));
            s.notch_h = static_cast<int>(std::lround(bh * uniform_real(rng, 0.35, 0.6)));
            s.notch_corner = uniform_int(rng, 0, 3);
            break;
        case ShapeKind::Circle: {
            const double r = std::min(bw, bh) / 2.0;
            s.center = Point{x0 + r, y0 + r};
            s.radius = r;
            break;
        }
        case ShapeKind::Triangle: {
            // One vertex on each of three box edges keeps the triangle fat.
            s.vertices = {Point{x0 + uniform_real(rng, 0, bw), static_cast<double>(y0)},
                          Point{static_cast<double>(x0 + bw), y0 + uniform_real(rng, 0.5 * bh, bh)},
                          Point{static_cast<double>(x0), y0 + uniform_real(rng, 0.5 * bh, bh)}};
            break;
        }
        case ShapeKind::ConvexPolygon: {
            const int nv = uniform_int(rng, 5, 7);
            std::vector<double> angles(static_cast<std::size_t>(nv));
            for (auto& a : angles) a = uniform_real(rng, 0, 2 * M_PI);
            std::sort(angles.begin(), angles.end());
            const double cx = x0 + bw / 2.0, cy = y0 + bh / 2.0;
            for (double a : angles)
                s.vertices.push_back(Point{cx + bw / 2.0 * std::cos(a), cy + bh / 2.0 * std::sin(a)});
            break;
        }
    }
    s.fill = random_fill(rng, cfg.textured, background);
    s.category_id = cfg.constant_category ? 1 : static_cast<int>(s.kind) + 1;
    return s;
}

bool occluding_pairs_are_neighbors(const Scene& scene) {
    for (std::size_t i = 0; i < scene.size(); ++i)
        for (std::size_t j = i + 1; j < scene.size(); ++j)
            if (scene.gt_order[i][j] != 0 &&
                !are_neighbors(scene.objects[i].modal, scene.objects[j].modal, 1))
                return false;
    return true;
}

}  // namespace

SceneSpec sample_scene(std::uint64_t seed, const SceneSamplerConfig& cfg) {
    if (cfg.kinds.empty() || cfg.min_objects < 1 || cfg.max_objects < cfg.min_objects ||
        cfg.min_size < 1 || cfg.max_size < cfg.min_size || cfg.max_size > std::min(cfg.width, cfg.height))
        throw DomainError("scene sampler configuration ranges are empty");
    std::mt19937_64 rng(seed);
    const Rgb background{200, 200, 200};
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        SceneSpec spec;
        spec.width = cfg.width;
        spec.height = cfg.height;
        spec.background = background;
        const int n = uniform_int(rng, cfg.min_objects, cfg.max_objects);
        bool ok = true;
        for (int k = 0; k < n; ++k) {
            auto shape = random_shape(rng, cfg, background);
            if (area(rasterize(shape, cfg.width, cfg.height)) <
                static_cast<std::size_t>(cfg.min_shape_area)) {
                ok = false;
                break;
            }
            spec.shapes.push_back(std::move(shape));
        }
        if (!ok) continue;
        spec.z.resize(static_cast<std::size_t>(n));
        std::iota(spec.z.begin(), spec.z.end(), 0);
        std::shuffle(spec.z.begin(), spec.z.end(), rng);

        const Scene scene = render_scene(spec);
        double ratio_sum = 0;
        for (std::size_t i = 0; i < scene.size(); ++i) {
            if (area(scene.objects[i].modal) < static_cast<std::size_t>(cfg.min_visible_area)) {
                ok = false;
                break;
            }
            ratio_sum += occlusion_ratio(scene, i);
        }
        if (!ok || !occluding_pairs_are_neighbors(scene)) continue;
        if (cfg.overlap_target > 0) {
            const double mean_ratio = ratio_sum / static_cast<double>(scene.size());
            const bool any_occlusion = std::any_of(
                scene.gt_order.begin(), scene.gt_order.end(), [](const auto& row) {
                    return std::any_of(row.begin(), row.end(), [](int v) { return v != 0; });
                });
            if (!any_occlusion) continue;
            // Single-object scenes cannot be occluded; the band only applies
            // once there is someone to overlap with.
            if (n > 1 && (mean_ratio < cfg.overlap_target * 0.5 ||
                          mean_ratio > cfg.overlap_target * 1.5))
                continue;
        }
        return spec;
    }
    throw SamplingExhaustedError("sample_scene: no valid scene after " +
                                 std::to_string(cfg.max_attempts) + " attempts");
}

SceneSpec make_cyclic_scene() {
    SceneSpec spec;
    spec.width = 64;
    spec.height = 64;
    spec.background = Rgb{200, 200, 200};
    spec.mode = SceneSpec::Mode::Pairwise;
    auto bar = [](Rect r, Rgb color) {
        ShapeSpec s;
        s.kind = ShapeKind::Rect;
        s.box = r;
        s.fill.primary = color;
        s.category_id = static_cast<int>(ShapeKind::Rect) + 1;
        return s;
    };
    // Each bar sticks out past the corner it shares with the next one.
    spec.shapes = {
        bar(Rect{6, 10, 44, 8}, Rgb{200, 40, 40}),   // top, horizontal
        bar(Rect{42, 6, 8, 44}, Rgb{40, 160, 40}),   // right, vertical
        bar(Rect{14, 42, 44, 8}, Rgb{40, 40, 200}),  // bottom, horizontal
        bar(Rect{14, 14, 8, 44}, Rgb{200, 160, 40}), // left, vertical
    };
    spec.above = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    return spec;
}

SceneSpec make_a_under_b_scene() {
    SceneSpec spec;
    spec.width = 6;
    spec.height = 4;
    spec.background = Rgb{200, 200, 200};
    ShapeSpec a;
    a.kind = ShapeKind::Rect;
    a.box = Rect{0, 0, 4, 4};
    a.fill.primary = Rgb{220, 30, 30};
    ShapeSpec b = a;
    b.box = Rect{2, 0, 4, 4};
    b.fill.primary = Rgb{30, 30, 220};
    spec.shapes = {a, b};
    spec.z = {0, 1};
    return spec;
}

namespace {

nlohmann::json rgb_json(Rgb c) { return {c.r, c.g, c.b}; }

Rgb rgb_from(const nlohmann::json& j) {
    return Rgb{j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
}

const char* pattern_name(Fill::Pattern p) {
    switch (p) {
        case Fill::Pattern::Flat: return "flat";
        case Fill::Pattern::Stripes: return "stripes";
        case Fill::Pattern::Checker: return "checker";
    }
    return "flat";
}

Fill::Pattern pattern_from(const std::string& s) {
    if (s == "flat") return Fill::Pattern::Flat;
    if (s == "stripes") return Fill::Pattern::Stripes;
    if (s == "checker") return Fill::Pattern::Checker;
    throw FormatError("unknown fill pattern: " + s);
}

}  // namespace

nlohmann::json shape_to_json(const ShapeSpec& s) {
    nlohmann::json j;
    j["kind"] = to_string(s.kind);
    switch (s.kind) {
        case ShapeKind::Rect:
            j["box"] = {s.box.x, s.box.y, s.box.w, s.box.h};
            break;
        case ShapeKind::LShape:
            j["box"] = {s.box.x, s.box.y, s.box.w, s.box.h};
            j["notch"] = {s.notch_w, s.notch_h, s.notch_corner};
            break;
        case ShapeKind::Circle:
            j["center"] = {s.center.x, s.center.y};
            j["radius"] = s.radius;
            break;
        case ShapeKind::Triangle:
        case ShapeKind::ConvexPolygon:
            j["vertices"] = nlohmann::json::array();
            for (const auto& v : s.vertices) j["vertices"].push_back({v.x, v.y});
            break;
    }
    j["fill"] = {{"pattern", pattern_name(s.fill.pattern)},
                 {"primary", rgb_json(s.fill.primary)},
                 {"secondary", rgb_json(s.fill.secondary)},
                 {"period", s.fill.period}};
    j["category"] = s.category_id;
    return j;
}

ShapeSpec shape_from_json(const nlohmann::json& j) {
    try {
        ShapeSpec s;
        s.kind = shape_kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("box")) {
            const auto& b = j.at("box");
            s.box = Rect{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
        }
        if (j.contains("notch")) {
            s.notch_w = j["notch"].at(0).get<int>();
            s.notch_h = j["notch"].at(1).get<int>();
            s.notch_corner = j["notch"].at(2).get<int>();
        }
        if (j.contains("center"))
            s.center = Point{j["center"].at(0).get<double>(), j["center"].at(1).get<double>()};
        if (j.contains("radius")) s.radius = j["radius"].get<double>();
        if (j.contains("vertices"))
            for (const auto& v : j["vertices"])
                s.vertices.push_back(Point{v.at(0).get<double>(), v.at(1).get<double>()});
        const auto& f = j.at("fill");
        s.fill.pattern = pattern_from(f.at("pattern").get<std::string>());
        s.fill.primary = rgb_from(f.at("primary"));
        s.fill.secondary = rgb_from(f.at("secondary"));
        s.fill.period = f.at("period").get<int>();
        s.category_id = j.at("category").get<int>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed shape: ") + e.what());
    }
}

nlohmann::json scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["canvas"] = {{"width", scene.width()}, {"height", scene.height()}};
    j["background"] = {{"color", rgb_json(scene.background_color)},
                       {"mask_rle", mask_to_json(scene.background)}};
    j["objects"] = nlohmann::json::array();
    for (const auto& o : scene.objects) {
        j["objects"].push_back({{"id", o.id},
                                {"category", o.category_id},
                                {"amodal_rle", mask_to_json(o.amodal)},
                                {"modal_rle", mask_to_json(o.modal)},
                                {"shape", shape_to_json(o.shape)}});
    }
    j["gt_order"] = scene.gt_order;
    j["image_png_base64"] = base64_encode(encode_png(scene.image));
    return j;
}

Scene scene_from_json(const nlohmann::json& j) {
    try {
        Scene scene;
        const int w = j.at("canvas").at("width").get<int>();
        const int h = j.at("canvas").at("height").get<int>();
        scene.background_color = rgb_from(j.at("background").at("color"));
        scene.image = decode_png(base64_decode(j.at("image_png_base64").get<std::string>())).rgb;
        if (scene.image.width() != w || scene.image.height() != h)
            throw FormatError("scene image size differs from canvas");
        for (const auto& jo : j.at("objects")) {
            SceneObject o;
            o.id = jo.at("id").get<int>();
            o.category_id = jo.at("category").get<int>();
            o.amodal = mask_from_json(jo.at("amodal_rle"));
            o.modal = mask_from_json(jo.at("modal_rle"));
            if (jo.contains("shape")) o.shape = shape_from_json(jo.at("shape"));
            scene.objects.push_back(std::move(o));
        }
        if (j.at("background").contains("mask_rle")) {
            scene.background = mask_from_json(j["background"]["mask_rle"]);
        } else {
            BinaryMask fg(w, h);
            for (const auto& o : scene.objects) fg = unite(fg, o.modal);
            scene.background = complement(fg);
        }
        scene.gt_order = j.at("gt_order").get<std::vector<std::vector<int>>>();
        if (scene.gt_order.size() != scene.objects.size())
            throw FormatError("gt_order size differs from object count");
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed scene JSON: ") + e.what());
    }
}

void save_scene_file(const std::string& path, const Scene& scene) {
    write_text(path, scene_to_json(scene).dump() + "\n");
}

Scene load_scene_file(const std::string& path) {
    const auto bytes = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": not valid JSON: " + e.what());
    }
    return scene_from_json(j);
}

nlohmann::json scene_spec_to_json(const SceneSpec& spec) {
    nlohmann::json j;
    j["canvas"] = {{"width", spec.width}, {"height", spec.height}};
    j["background"] = rgb_json(spec.background);
    j["shapes"] = nlohmann::json::array();
    for (const auto& s : spec.shapes) j["shapes"].push_back(shape_to_json(s));
    if (spec.mode == SceneSpec::Mode::ZIndex) {
        j["z"] = spec.z;
    } else {
        j["above"] = nlohmann::json::array();
        for (auto [a, b] : spec.above) j["above"].push_back({a, b});
    }
    return j;
}

SceneSpec scene_spec_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw FormatError("scene spec must be a JSON object");
        SceneSpec spec;
        spec.width = j.at("canvas").at("width").get<int>();
        spec.height = j.at("canvas").at("height").get<int>();
        if (j.contains("background")) spec.background = rgb_from(j["background"]);
        for (const auto& s : j.at("shapes")) spec.shapes.push_back(shape_from_json(s));
        if (j.contains("above")) {
            if (j.contains("z")) throw FormatError("scene spec has both z and above");
            spec.mode = SceneSpec::Mode::Pairwise;
            for (const auto& p : j["above"]) spec.above.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        } else {
            spec.mode = SceneSpec::Mode::ZIndex;
            spec.z = j.at("z").get<std::vector<int>>();
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed scene spec: ") + e.what());
    }
}

std::uint64_t dataset_scene_seed(std::uint64_t seed, std::size_t i) {
    return seed + static_cast<std::uint64_t>(i);
}

void synthesize_dataset(const std::string& dir, std::uint64_t seed, std::size_t n,
                        const SceneSamplerConfig& config) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
    for (std::size_t i = 0; i < n; ++i)
        save_scene_file((fs::path(dir) / dataset_file_name(i)).string(),
                        render_scene(sample_scene(dataset_scene_seed(seed, i), config)));
}

std::string dataset_file_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%05zu.json", i);
    return buf;
}

std::vector<Scene> load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("dataset directory not found: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("scene_") && name.ends_with(".json"))
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    std::vector<Scene> scenes;
    for (const auto& f : files) scenes.push_back(load_scene_file(f));
    return scenes;
}

}  // namespace deocc
