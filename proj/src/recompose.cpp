#include "deocc/recompose.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <queue>
#include <set>

#include <nlohmann/json.hpp>

#include "deocc/errors.hpp"

namespace deocc {

Edit Edit::move(int id, int dx, int dy) {
    Edit e;
    e.op = Op::Move;
    e.id = id;
    e.dx = dx;
    e.dy = dy;
    return e;
}

Edit Edit::remove(int id) {
    Edit e;
    e.op = Op::Delete;
    e.id = id;
    return e;
}

Edit Edit::duplicate(int id, int dx, int dy, int new_id) {
    Edit e = move(id, dx, dy);
    e.op = Op::Duplicate;
    e.new_id = new_id;
    return e;
}

Edit Edit::set_order_edge(int i, int j, int direction) {
    Edit e;
    e.op = Op::SetOrderEdge;
    e.i = i;
    e.j = j;
    e.direction = direction;
    return e;
}

Edit Edit::swap_positions(int i, int j) {
    Edit e;
    e.op = Op::SwapPositions;
    e.i = i;
    e.j = j;
    return e;
}

namespace {

const char* op_name(Edit::Op op) {
    switch (op) {
        case Edit::Op::Move: return "move";
        case Edit::Op::Delete: return "delete";
        case Edit::Op::Duplicate: return "duplicate";
        case Edit::Op::SetOrderEdge: return "set_order_edge";
        case Edit::Op::SwapPositions: return "swap_positions";
    }
    return "?";
}

}  // namespace

nlohmann::json edit_script_to_json(const EditScript& script) {
    nlohmann::json edits = nlohmann::json::array();
    for (const auto& e : script.edits) {
        nlohmann::json j{{"op", op_name(e.op)}};
        switch (e.op) {
            case Edit::Op::Move: j.update({{"id", e.id}, {"dx", e.dx}, {"dy", e.dy}}); break;
            case Edit::Op::Delete: j["id"] = e.id; break;
            case Edit::Op::Duplicate:
                j.update({{"id", e.id}, {"dx", e.dx}, {"dy", e.dy}, {"new_id", e.new_id}});
                break;
            case Edit::Op::SetOrderEdge: j.update({{"i", e.i}, {"j", e.j}, {"direction", e.direction}}); break;
            case Edit::Op::SwapPositions: j.update({{"i", e.i}, {"j", e.j}}); break;
        }
        edits.push_back(std::move(j));
    }
    return {{"version", kEditScriptVersion}, {"edits", std::move(edits)}};
}

EditScript edit_script_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("edits") || !j["edits"].is_array())
        throw FormatError("edit script must be an object with an \"edits\" array");
    if (j.value("version", kEditScriptVersion) != kEditScriptVersion)
        throw FormatError("unsupported edit script version");
    EditScript script;
    const auto& arr = j["edits"];
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const auto& e = arr[k];
        try {
            const auto op = e.at("op").get<std::string>();
            if (op == "move")
                script.edits.push_back(Edit::move(e.at("id").get<int>(), e.value("dx", 0), e.value("dy", 0)));
            else if (op == "delete")
                script.edits.push_back(Edit::remove(e.at("id").get<int>()));
            else if (op == "duplicate")
                script.edits.push_back(Edit::duplicate(e.at("id").get<int>(), e.value("dx", 0), e.value("dy", 0),
                                                       e.at("new_id").get<int>()));
            else if (op == "set_order_edge")
                script.edits.push_back(
                    Edit::set_order_edge(e.at("i").get<int>(), e.at("j").get<int>(), e.value("direction", 1)));
            else if (op == "swap_positions")
                script.edits.push_back(Edit::swap_positions(e.at("i").get<int>(), e.at("j").get<int>()));
            else
                throw EditError(k, "unknown edit op '" + op + "'");
        } catch (const nlohmann::json::exception& ex) {
            throw EditError(k, std::string("malformed edit: ") + ex.what());
        }
    }
    return script;
}

const ObjectLayer& LayeredScene::layer(int id) const {
    for (const auto& l : layers)
        if (l.id == id) return l;
    throw LookupError("unknown layer " + std::to_string(id));
}

LayeredScene make_layered_scene(Decomposition d, OcclusionGraph graph) {
    LayeredScene s{std::move(d.layers), std::move(graph), std::move(d.background)};
    for (const auto& l : s.layers)
        if (!s.graph.has_node(l.id)) throw SpecificationError("graph lacks layer " + std::to_string(l.id));
    if (s.graph.size() != s.layers.size()) throw SpecificationError("graph and layers cover different ids");
    return s;
}

ObjectLayer translate_layer(const ObjectLayer& layer, int dx, int dy) {
    ObjectLayer out = layer;
    const int w = layer.rgb.width(), h = layer.rgb.height();
    out.amodal = translate(layer.amodal, dx, dy);
    out.rgb = RgbImage(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int sx = x - dx, sy = y - dy;
            if (layer.rgb.in_bounds(sx, sy)) out.rgb.at(x, y) = layer.rgb.at(sx, sy);
        }
    return out;
}

namespace {

ObjectLayer& find_layer(std::vector<ObjectLayer>& layers, int id, std::size_t index) {
    for (auto& l : layers)
        if (l.id == id) return l;
    throw EditError(index, "edit " + std::to_string(index) + ": unknown object id " + std::to_string(id));
}

// Integer center of the amodal bounding box (canvas origin when empty).
std::pair<int, int> center(const ObjectLayer& l) {
    const auto box = bounding_box(l.amodal);
    if (!box) return {0, 0};
    return {box->x + box->w / 2, box->y + box->h / 2};
}

}  // namespace

LayeredScene apply_edits(const LayeredScene& scene, const EditScript& script) {
    LayeredScene s = scene;
    for (std::size_t k = 0; k < script.edits.size(); ++k) {
        const auto& e = script.edits[k];
        switch (e.op) {
            case Edit::Op::Move: {
                auto& l = find_layer(s.layers, e.id, k);
                l = translate_layer(l, e.dx, e.dy);
                break;
            }
            case Edit::Op::Delete: {
                find_layer(s.layers, e.id, k);
                std::erase_if(s.layers, [&](const ObjectLayer& l) { return l.id == e.id; });
                s.graph.remove_node(e.id);
                break;
            }
            case Edit::Op::Duplicate: {
                const auto src = find_layer(s.layers, e.id, k);
                if (s.graph.has_node(e.new_id) ||
                    std::any_of(s.layers.begin(), s.layers.end(), [&](const auto& l) { return l.id == e.new_id; }))
                    throw EditError(k, "edit " + std::to_string(k) + ": id " + std::to_string(e.new_id) +
                                           " is already in use");
                auto copy = translate_layer(src, e.dx, e.dy);
                copy.id = e.new_id;
                s.layers.push_back(std::move(copy));
                s.graph.add_node(e.new_id);
                for (int other : s.graph.occluders(e.id)) s.graph.add_edge(other, e.new_id);
                for (int other : s.graph.occludees(e.id)) s.graph.add_edge(e.new_id, other);
                break;
            }
            case Edit::Op::SetOrderEdge: {
                find_layer(s.layers, e.i, k);
                find_layer(s.layers, e.j, k);
                if (e.i == e.j) throw EditError(k, "edit " + std::to_string(k) + ": an edge needs two objects");
                if (e.direction < -1 || e.direction > 1)
                    throw EditError(k, "edit " + std::to_string(k) + ": direction must be -1, 0 or 1");
                s.graph.set_relation(e.i, e.j, e.direction);
                break;
            }
            case Edit::Op::SwapPositions: {
                auto& a = find_layer(s.layers, e.i, k);
                auto& b = find_layer(s.layers, e.j, k);
                const auto [ax, ay] = center(a);
                const auto [bx, by] = center(b);
                a = translate_layer(a, bx - ax, by - ay);
                b = translate_layer(b, ax - bx, ay - by);
                break;
            }
        }
    }
    return s;
}

TotalOrder total_order(const OcclusionGraph& graph) {
    const auto ids = graph.nodes();
    std::map<int, int> pos;
    for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = static_cast<int>(i);
    const int n = static_cast<int>(ids.size());
    // Drawing graph: occludee -> occluder, i.e. "must be drawn before".
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [from, to] : graph.edges()) adj[static_cast<std::size_t>(pos[to])].push_back(pos[from]);

    // Tarjan
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
        comp(static_cast<std::size_t>(n), -1);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    int counter = 0, ncomp = 0;
    std::function<void(int)> strong = [&](int v) {
        const auto uv = static_cast<std::size_t>(v);
        index[uv] = low[uv] = counter++;
        stack.push_back(v);
        on_stack[uv] = 1;
        for (int w : adj[uv]) {
            const auto uw = static_cast<std::size_t>(w);
            if (index[uw] < 0) {
                strong(w);
                low[uv] = std::min(low[uv], low[uw]);
            } else if (on_stack[uw]) {
                low[uv] = std::min(low[uv], index[uw]);
            }
        }
        if (low[uv] == index[uv]) {
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[static_cast<std::size_t>(w)] = 0;
                comp[static_cast<std::size_t>(w)] = ncomp;
            } while (w != v);
            ++ncomp;
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[static_cast<std::size_t>(v)] < 0) strong(v);

    std::vector<std::vector<int>> members(static_cast<std::size_t>(ncomp));
    for (int v = 0; v < n; ++v) members[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])].push_back(v);
    std::vector<std::set<int>> cadj(static_cast<std::size_t>(ncomp));
    std::vector<int> indeg(static_cast<std::size_t>(ncomp), 0);
    for (int v = 0; v < n; ++v)
        for (int w : adj[static_cast<std::size_t>(v)]) {
            const int a = comp[static_cast<std::size_t>(v)], b = comp[static_cast<std::size_t>(w)];
            if (a != b && cadj[static_cast<std::size_t>(a)].insert(b).second) ++indeg[static_cast<std::size_t>(b)];
        }

    // Members are ascending positions, so members[c].front() is the min id.
    using Item = std::pair<int, int>;  // (min position, component)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
    for (int c = 0; c < ncomp; ++c)
        if (indeg[static_cast<std::size_t>(c)] == 0) ready.push({members[static_cast<std::size_t>(c)].front(), c});
    TotalOrder out;
    while (!ready.empty()) {
        const int c = ready.top().second;
        ready.pop();
        const auto& m = members[static_cast<std::size_t>(c)];
        for (int v : m) out.back_to_front.push_back(ids[static_cast<std::size_t>(v)]);
        if (m.size() > 1) {
            std::vector<int> cyc;
            for (int v : m) cyc.push_back(ids[static_cast<std::size_t>(v)]);
            out.cycles.push_back(std::move(cyc));
        }
        for (int d : cadj[static_cast<std::size_t>(c)])
            if (--indeg[static_cast<std::size_t>(d)] == 0) ready.push({members[static_cast<std::size_t>(d)].front(), d});
    }
    return out;
}

RgbImage render(const std::vector<ObjectLayer>& layers, const std::vector<int>& back_to_front,
                const RgbImage& background) {
    if (back_to_front.size() != layers.size())
        throw SpecificationError("render order must list every layer exactly once");
    RgbImage out = background;
    std::set<int> drawn;
    for (int id : back_to_front) {
        if (!drawn.insert(id).second) throw SpecificationError("render order repeats layer " + std::to_string(id));
        const ObjectLayer* layer = nullptr;
        for (const auto& l : layers)
            if (l.id == id) layer = &l;
        if (!layer) throw SpecificationError("render order names unknown layer " + std::to_string(id));
        if (layer->amodal.width() != out.width() || layer->amodal.height() != out.height())
            throw DimensionError("layer size differs from background");
        copy_where(out, layer->rgb, layer->amodal);
    }
    return out;
}

RgbImage render(const LayeredScene& scene) {
    return render(scene.layers, total_order(scene.graph).back_to_front, scene.background);
}

nlohmann::json layer_manifest(const LayeredScene& scene) {
    const auto order = total_order(scene.graph);
    std::map<int, int> z;
    for (std::size_t i = 0; i < order.back_to_front.size(); ++i) z[order.back_to_front[i]] = static_cast<int>(i);
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : scene.layers)
        layers.push_back({{"id", l.id},
                          {"category", l.category_id},
                          {"file", "layer_" + std::to_string(l.id) + ".png"},
                          {"z", z.count(l.id) ? z[l.id] : -1}});
    nlohmann::json cycles = order.cycles;
    return {{"version", 1},
            {"canvas", {{"width", scene.background.width()}, {"height", scene.background.height()}}},
            {"background", "background.png"},
            {"layers", std::move(layers)},
            {"graph", graph_to_json(scene.graph)},
            {"cycles", std::move(cycles)}};
}

void save_layered_scene(const std::string& dir, const LayeredScene& scene) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
    const fs::path root(dir);
    write_file((root / "background.png").string(), encode_png(scene.background));
    for (const auto& l : scene.layers)
        write_file((root / ("layer_" + std::to_string(l.id) + ".png")).string(), encode_png_rgba(l.rgb, l.amodal));
    write_text((root / "manifest.json").string(), layer_manifest(scene).dump(2) + "\n");
}

LayeredScene load_layered_scene(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    const auto bytes = read_file((root / "manifest.json").string());
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("layer manifest is not valid JSON: ") + e.what());
    }
    try {
        LayeredScene s;
        s.background = decode_png(read_file((root / m.at("background").get<std::string>()).string())).rgb;
        for (const auto& jl : m.at("layers")) {
            const auto png = decode_png(read_file((root / jl.at("file").get<std::string>()).string()));
            ObjectLayer l;
            l.id = jl.at("id").get<int>();
            l.category_id = jl.value("category", 1);
            l.amodal = png.alpha;
            l.rgb = mask_image(png.rgb, png.alpha);
            if (l.rgb.width() != s.background.width() || l.rgb.height() != s.background.height())
                throw FormatError("layer " + std::to_string(l.id) + " differs in size from the background");
            s.layers.push_back(std::move(l));
        }
        s.graph = graph_from_json(m.at("graph"));
        for (const auto& l : s.layers)
            if (!s.graph.has_node(l.id)) throw FormatError("graph lacks layer " + std::to_string(l.id));
        if (s.graph.size() != s.layers.size()) throw FormatError("graph and layers cover different ids");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed layer manifest: ") + e.what());
    }
}

}  // namespace deocc
