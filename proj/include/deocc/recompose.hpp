#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deocc/content.hpp"
#include "deocc/ordering.hpp"

namespace deocc {

struct Edit {
    enum class Op { Move, Delete, Duplicate, SetOrderEdge, SwapPositions };
    Op op = Op::Move;
    int id = 0;      // move, delete, duplicate
    int dx = 0;      // move, duplicate
    int dy = 0;
    int new_id = 0;  // duplicate
    int i = 0;       // set_order_edge, swap_positions
    int j = 0;
    int direction = 1;  // set_order_edge: 1 i over j, -1 j over i, 0 unordered

    static Edit move(int id, int dx, int dy);
    static Edit remove(int id);
    static Edit duplicate(int id, int dx, int dy, int new_id);
    static Edit set_order_edge(int i, int j, int direction);
    static Edit swap_positions(int i, int j);
};

struct EditScript {
    std::vector<Edit> edits;
};

inline constexpr int kEditScriptVersion = 1;

/// {"version":1,"edits":[{"op":"move","id":..,"dx":..,"dy":..}, ...]}
nlohmann::json edit_script_to_json(const EditScript& script);
/// Malformed individual edits raise EditError with their index.
EditScript edit_script_from_json(const nlohmann::json& j);

/// Editable scene: layers keyed by id, their occlusion graph, background.
struct LayeredScene {
    std::vector<ObjectLayer> layers;
    OcclusionGraph graph;
    RgbImage background;

    const ObjectLayer& layer(int id) const;
    bool operator==(const LayeredScene&) const = default;
};

LayeredScene make_layered_scene(Decomposition d, OcclusionGraph graph);

/// Integer translation; pixels shifted off-canvas are dropped.
ObjectLayer translate_layer(const ObjectLayer& layer, int dx, int dy);

/// Applies edits in order to a copy. Throws EditError naming the failing edit.
LayeredScene apply_edits(const LayeredScene& scene, const EditScript& script);

struct TotalOrder {
    std::vector<int> back_to_front;
    std::vector<std::vector<int>> cycles;  // SCCs with more than one member
};

/// Topological order of the SCC condensation, occludees first. Ready
/// components are taken smallest-id first; SCC members go in id order.
TotalOrder total_order(const OcclusionGraph& graph);

/// Background, then each layer in `back_to_front` overwriting on its mask.
RgbImage render(const std::vector<ObjectLayer>& layers, const std::vector<int>& back_to_front,
                const RgbImage& background);
RgbImage render(const LayeredScene& scene);

/// Directory form: background.png, layer_<id>.png (RGBA), manifest.json.
void save_layered_scene(const std::string& dir, const LayeredScene& scene);
LayeredScene load_layered_scene(const std::string& dir);
nlohmann::json layer_manifest(const LayeredScene& scene);

}  // namespace deocc
