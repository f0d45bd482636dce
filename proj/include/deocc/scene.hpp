#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deocc/image.hpp"
#include "deocc/mask.hpp"

namespace deocc {

enum class ShapeKind { Rect, Circle, Triangle, ConvexPolygon, LShape };

inline constexpr int kNumShapeKinds = 5;

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

/// Deterministic two-tone surface pattern.
struct Fill {
    enum class Pattern { Flat, Stripes, Checker };
    Pattern pattern = Pattern::Flat;
    Rgb primary;
    Rgb secondary;
    int period = 4;

    Rgb color_at(int x, int y) const;
    bool operator==(const Fill&) const = default;
};

struct Point {
    double x = 0;
    double y = 0;
    bool operator==(const Point&) const = default;
};

struct ShapeSpec {
    ShapeKind kind = ShapeKind::Rect;
    Rect box;                     // Rect, LShape
    int notch_w = 0;              // LShape: removed corner block
    int notch_h = 0;
    int notch_corner = 0;         // 0 top-left, 1 top-right, 2 bottom-right, 3 bottom-left
    Point center;                 // Circle
    double radius = 0;
    std::vector<Point> vertices;  // Triangle, ConvexPolygon
    Fill fill;
    int category_id = 1;

    bool operator==(const ShapeSpec&) const = default;
};

/// Full (amodal) raster of a shape, pixel-center sampling.
BinaryMask rasterize(const ShapeSpec& shape, int width, int height);

/// Shape texture on its amodal extent, black elsewhere.
RgbImage paint_shape(const ShapeSpec& shape, const BinaryMask& amodal);

struct SceneSpec {
    enum class Mode { ZIndex, Pairwise };

    int width = 96;
    int height = 96;
    Rgb background{200, 200, 200};
    std::vector<ShapeSpec> shapes;
    Mode mode = Mode::ZIndex;
    std::vector<int> z;                        // ZIndex: unique, larger is nearer
    std::vector<std::pair<int, int>> above;    // Pairwise: (i, j) means i above j

    bool operator==(const SceneSpec&) const = default;
};

struct SceneObject {
    int id = 0;
    int category_id = 1;
    BinaryMask amodal;
    BinaryMask modal;
    ShapeSpec shape;
};

/// Rendered ground truth. gt_order[i][j] = 1 means object i occludes object j.
struct Scene {
    RgbImage image;
    std::vector<SceneObject> objects;
    std::vector<std::vector<int>> gt_order;
    BinaryMask background;
    Rgb background_color;

    int width() const { return image.width(); }
    int height() const { return image.height(); }
    std::size_t size() const { return objects.size(); }
    std::vector<BinaryMask> modal_masks() const;
    std::vector<BinaryMask> amodal_masks() const;
    std::vector<int> categories() const;

    /// Ground-truth content layer of object i (texture on its amodal mask).
    RgbImage object_raster(std::size_t i) const;
    /// Ground-truth background plate.
    RgbImage background_raster() const;
};

/// Throws SpecificationError when the pairwise relation leaves an overlapping
/// pair undefined or an overlap pixel has no single winner.
Scene render_scene(const SceneSpec& spec);

/// 1 - |modal| / |amodal|; DomainError for an empty amodal mask.
double occlusion_ratio(const Scene& scene, std::size_t i);

struct SceneSamplerConfig {
    int width = 96;
    int height = 96;
    int min_objects = 4;
    int max_objects = 8;
    std::vector<ShapeKind> kinds{ShapeKind::Rect, ShapeKind::Circle, ShapeKind::Triangle,
                                 ShapeKind::ConvexPolygon, ShapeKind::LShape};
    int min_size = 16;
    int max_size = 36;
    double overlap_target = 0.3;
    int min_shape_area = 25;
    int min_visible_area = 20;
    bool textured = true;
    bool constant_category = false;
    int max_attempts = 2000;
};

/// Seed-deterministic scene specification. Resamples until every modal mask
/// has at least min_visible_area pixels, every occluding pair is a neighbor
/// pair, and (for overlap_target > 0) the mean occlusion ratio lies within
/// [overlap_target / 2, overlap_target * 1.5].
SceneSpec sample_scene(std::uint64_t seed, const SceneSamplerConfig& config = {});

/// Four bars overlapping in a pinwheel so the occlusion relation is a 4-cycle.
SceneSpec make_cyclic_scene();

/// Two 4x4 squares on a 6x4 canvas; B (id 1) at x=2 lies above A (id 0).
SceneSpec make_a_under_b_scene();

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
nlohmann::json shape_to_json(const ShapeSpec& shape);
ShapeSpec shape_from_json(const nlohmann::json& j);

void save_scene_file(const std::string& path, const Scene& scene);
Scene load_scene_file(const std::string& path);
/// File name of the i-th scene in a dataset directory ("scene_00007.json").
std::string dataset_file_name(std::size_t i);

/// {"canvas":{"width","height"}, "background":[r,g,b], "shapes":[...],
///  "z":[...]} or, for pairwise mode, "above":[[i,j],...].
nlohmann::json scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& j);

/// Scene i of a dataset synthesized from `seed` uses sample_scene(seed + i).
std::uint64_t dataset_scene_seed(std::uint64_t seed, std::size_t i);
/// Writes scene_00000.json ... into `dir`.
void synthesize_dataset(const std::string& dir, std::uint64_t seed, std::size_t n,
                        const SceneSamplerConfig& config = {});
/// Every scene_*.json in `dir`, in file-name order.
std::vector<Scene> load_dataset(const std::string& dir);

}  // namespace deocc
