#include "deocc/ordering.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "deocc/errors.hpp"

namespace deocc {

OcclusionGraph::OcclusionGraph(int n) {
    if (n < 0) throw DomainError("negative node count");
    for (int i = 0; i < n; ++i) nodes_.insert(i);
}

void OcclusionGraph::add_node(int id) {
    if (!nodes_.insert(id).second) throw SpecificationError("node " + std::to_string(id) + " already exists");
}

void OcclusionGraph::remove_node(int id) {
    require(id);
    nodes_.erase(id);
    for (auto it = edges_.begin(); it != edges_.end();)
        it = (it->first == id || it->second == id) ? edges_.erase(it) : std::next(it);
}

void OcclusionGraph::require(int id) const {
    if (!has_node(id)) throw LookupError("unknown node " + std::to_string(id));
}

int OcclusionGraph::relation(int a, int b) const {
    require(a);
    require(b);
    if (edges_.count({a, b})) return 1;
    if (edges_.count({b, a})) return -1;
    return 0;
}

void OcclusionGraph::set_relation(int a, int b, int value) {
    require(a);
    require(b);
    if (value < -1 || value > 1) throw DomainError("relation must be -1, 0 or 1");
    if (a == b) {
        if (value != 0) throw DomainError("a node cannot occlude itself");
        return;
    }
    edges_.erase({a, b});
    edges_.erase({b, a});
    if (value == 1) edges_.insert({a, b});
    if (value == -1) edges_.insert({b, a});
}

std::vector<int> OcclusionGraph::occluders(int id) const {
    require(id);
    std::vector<int> out;
    for (const auto& [from, to] : edges_)
        if (to == id) out.push_back(from);
    return out;
}

std::vector<int> OcclusionGraph::occludees(int id) const {
    require(id);
    std::vector<int> out;
    for (const auto& [from, to] : edges_)
        if (from == id) out.push_back(to);
    return out;
}

std::vector<std::vector<int>> OcclusionGraph::matrix() const {
    const std::vector<int> ids(nodes_.begin(), nodes_.end());
    std::map<int, std::size_t> pos;
    for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
    std::vector<std::vector<int>> m(ids.size(), std::vector<int>(ids.size(), 0));
    for (const auto& [from, to] : edges_) {
        m[pos[from]][pos[to]] = 1;
        m[pos[to]][pos[from]] = -1;
    }
    return m;
}

OcclusionGraph OcclusionGraph::from_matrix(const std::vector<std::vector<int>>& m) {
    OcclusionGraph g(static_cast<int>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != m.size()) throw SpecificationError("order matrix is not square");
        if (m[i][i] != 0) throw SpecificationError("order matrix has a nonzero diagonal");
    }
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (m[i][j] < -1 || m[i][j] > 1 || m[i][j] != -m[j][i])
                throw SpecificationError("order matrix is not antisymmetric over {-1,0,1}");
            if (m[i][j] == 1) g.edges_.insert({static_cast<int>(i), static_cast<int>(j)});
        }
    return g;
}

nlohmann::json graph_to_json(const OcclusionGraph& g) {
    nlohmann::json j;
    j["nodes"] = g.nodes();
    j["edges"] = nlohmann::json::array();
    for (const auto& [from, to] : g.edges()) j["edges"].push_back({{"from", from}, {"to", to}});
    return j;
}

OcclusionGraph graph_from_json(const nlohmann::json& j) {
    try {
        OcclusionGraph g;
        for (const auto& n : j.at("nodes")) g.add_node(n.get<int>());
        for (const auto& e : j.at("edges")) {
            const int from = e.at("from").get<int>(), to = e.at("to").get<int>();
            if (g.relation(from, to) != 0) throw FormatError("duplicate or contradictory edge");
            g.add_edge(from, to);
        }
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed graph JSON: ") + e.what());
    } catch (const LookupError& e) {
        throw FormatError(std::string("graph edge references a missing node: ") + e.what());
    }
}

std::string graph_to_dot(const OcclusionGraph& g) {
    std::ostringstream os;
    os << "digraph occlusion {\n";
    for (int n : g.nodes()) os << "  " << n << ";\n";
    for (const auto& [from, to] : g.edges()) os << "  " << from << " -> " << to << ";\n";
    os << "}\n";
    return os.str();
}

int pairwise_order(const PartialCompleter& completer, const BinaryMask& modal_1, const BinaryMask& modal_2,
                   const CompletionContext& ctx_1, const CompletionContext& ctx_2,
                   PairDiagnostics* diagnostics) {
    const auto d12 = area(subtract(completer.complete_mask(modal_1, modal_2, ctx_1), modal_1));
    const auto d21 = area(subtract(completer.complete_mask(modal_2, modal_1, ctx_2), modal_2));
    if (diagnostics) *diagnostics = PairDiagnostics{d12, d21, d12 == d21 && d12 > 0};
    if (d12 == 0 && d21 == 0) return 0;
    return d12 < d21 ? 1 : -1;
}

OcclusionGraph build_order_graph(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                                 const std::vector<CompletionContext>& contexts, int dilation_radius,
                                 GraphDiagnostics* diagnostics) {
    if (contexts.size() != modals.size()) throw DimensionError("one completion context per object required");
    const int n = static_cast<int>(modals.size());
    OcclusionGraph g(n);
    GraphDiagnostics diag;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            if (!are_neighbors(modals[ui], modals[uj], dilation_radius)) continue;
            PairDiagnostics pd;
            g.set_relation(i, j, pairwise_order(completer, modals[ui], modals[uj], contexts[ui], contexts[uj], &pd));
            ++diag.pairs_evaluated;
            if (pd.tie) diag.ties.emplace_back(i, j);
        }
    if (diagnostics) *diagnostics = std::move(diag);
    return g;
}

std::vector<CompletionContext> object_contexts(const RgbImage* image, const std::vector<int>& categories,
                                               const CropPolicy& crop, int num_categories) {
    std::vector<CompletionContext> out;
    for (std::size_t i = 0; i < categories.size(); ++i)
        out.push_back(CompletionContext{image, categories[i], num_categories, crop, static_cast<int>(i)});
    return out;
}

std::string to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::Area: return "area";
        case BaselineKind::YAxis: return "yaxis";
        case BaselineKind::Convex: return "convex";
    }
    return "?";
}

BaselineKind baseline_from_string(const std::string& s) {
    if (s == "area") return BaselineKind::Area;
    if (s == "yaxis") return BaselineKind::YAxis;
    if (s == "convex") return BaselineKind::Convex;
    throw SpecificationError("unknown ordering baseline '" + s + "'");
}

int baseline_order(BaselineKind kind, const BinaryMask& modal_1, const BinaryMask& modal_2, int id_1, int id_2,
                   const BaselineConfig& cfg) {
    if (!are_neighbors(modal_1, modal_2, cfg.dilation_radius)) return 0;
    const int tie = id_1 < id_2 ? 1 : -1;
    switch (kind) {
        case BaselineKind::Area: {
            const auto a1 = area(modal_1), a2 = area(modal_2);
            if (a1 == a2) return tie;
            return (a1 > a2) == cfg.larger_in_front ? 1 : -1;
        }
        case BaselineKind::YAxis: {
            const int b1 = bottom_row(modal_1), b2 = bottom_row(modal_2);
            if (b1 == b2) return tie;
            return b1 > b2 ? 1 : -1;
        }
        case BaselineKind::Convex: {
            const ConvexCompleter convex(true);
            return pairwise_order(convex, modal_1, modal_2, {}, {});
        }
    }
    return 0;
}

OcclusionGraph baseline_graph(BaselineKind kind, const std::vector<BinaryMask>& modals,
                              const BaselineConfig& cfg) {
    const int n = static_cast<int>(modals.size());
    OcclusionGraph g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            g.set_relation(i, j, baseline_order(kind, modals[static_cast<std::size_t>(i)],
                                                modals[static_cast<std::size_t>(j)], i, j, cfg));
    return g;
}

PairCount ordering_counts(const std::vector<std::vector<int>>& predicted,
                          const std::vector<std::vector<int>>& gt) {
    if (predicted.size() != gt.size()) throw DimensionError("order matrices cover different node sets");
    PairCount c;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i].size() != gt.size() || predicted[i].size() != gt.size())
            throw DimensionError("order matrix is not square");
        for (std::size_t j = i + 1; j < gt.size(); ++j) {
            if (gt[i][j] == 0) continue;
            ++c.total;
            if (predicted[i][j] == gt[i][j]) ++c.correct;
        }
    }
    return c;
}

double ordering_accuracy(const std::vector<std::vector<int>>& predicted,
                         const std::vector<std::vector<int>>& gt) {
    const auto c = ordering_counts(predicted, gt);
    if (c.total == 0) throw UndefinedMetricError("ordering accuracy: no occluded pairs in ground truth");
    return static_cast<double>(c.correct) / static_cast<double>(c.total);
}

}  // namespace deocc
