#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "deocc/completers.hpp"
#include "deocc/mask.hpp"

namespace deocc {

/// Directed occlusion graph over integer node ids. An edge i -> j means i
/// occludes j. Cycles are allowed; a pair carries at most one direction.
class OcclusionGraph {
public:
    OcclusionGraph() = default;
    /// Nodes 0..n-1, no edges.
    explicit OcclusionGraph(int n);

    void add_node(int id);
    /// Drops the node and every edge touching it.
    void remove_node(int id);
    bool has_node(int id) const { return nodes_.count(id) > 0; }
    std::vector<int> nodes() const { return {nodes_.begin(), nodes_.end()}; }
    std::size_t size() const { return nodes_.size(); }

    /// O[a][b]: 1 if a occludes b, -1 if b occludes a, 0 otherwise.
    int relation(int a, int b) const;
    void set_relation(int a, int b, int value);
    void add_edge(int from, int to) { set_relation(from, to, 1); }
    bool has_edge(int from, int to) const { return edges_.count({from, to}) > 0; }
    std::vector<std::pair<int, int>> edges() const { return {edges_.begin(), edges_.end()}; }

    /// Direct occluders of `id`.
    std::vector<int> occluders(int id) const;
    std::vector<int> occludees(int id) const;

    /// Antisymmetric matrix in ascending node-id order.
    std::vector<std::vector<int>> matrix() const;
    /// Node ids 0..n-1; throws SpecificationError unless antisymmetric with
    /// entries in {-1, 0, 1} and zero diagonal.
    static OcclusionGraph from_matrix(const std::vector<std::vector<int>>& m);

    bool operator==(const OcclusionGraph&) const = default;

private:
    void require(int id) const;

    std::set<int> nodes_;
    std::set<std::pair<int, int>> edges_;
};

/// {"nodes":[...], "edges":[{"from":i,"to":j}, ...]}
nlohmann::json graph_to_json(const OcclusionGraph& g);
OcclusionGraph graph_from_json(const nlohmann::json& j);
std::string graph_to_dot(const OcclusionGraph& g);

struct PairDiagnostics {
    std::size_t increment_12 = 0;  // |Δ_{1|2}|, pixels object 1 gains under object 2
    std::size_t increment_21 = 0;
    bool tie = false;  // equal nonzero increments, resolved to -1
};

/// Dual completion. 1 if object 1 occludes object 2, -1 if the reverse, 0 if
/// neither gains pixels under the other.
int pairwise_order(const PartialCompleter& completer, const BinaryMask& modal_1, const BinaryMask& modal_2,
                   const CompletionContext& ctx_1, const CompletionContext& ctx_2,
                   PairDiagnostics* diagnostics = nullptr);

struct GraphDiagnostics {
    std::size_t pairs_evaluated = 0;
    std::vector<std::pair<int, int>> ties;
};

/// One context per mask. Only neighboring pairs reach the completer.
OcclusionGraph build_order_graph(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                                 const std::vector<CompletionContext>& contexts, int dilation_radius = 1,
                                 GraphDiagnostics* diagnostics = nullptr);

/// Contexts with object_id = index, category from `categories`.
std::vector<CompletionContext> object_contexts(const RgbImage* image, const std::vector<int>& categories,
                                               const CropPolicy& crop = {},
                                               int num_categories = kNumShapeKinds);

enum class BaselineKind { Area, YAxis, Convex };
std::string to_string(BaselineKind k);
BaselineKind baseline_from_string(const std::string& s);

struct BaselineConfig {
    bool larger_in_front = true;  // area polarity
    int dilation_radius = 1;
};

/// Heuristic order for a pair with ids id_1, id_2 (used for tie breaks:
/// lower id in front). Non-neighbors give 0.
int baseline_order(BaselineKind kind, const BinaryMask& modal_1, const BinaryMask& modal_2, int id_1, int id_2,
                   const BaselineConfig& cfg = {});

OcclusionGraph baseline_graph(BaselineKind kind, const std::vector<BinaryMask>& modals,
                              const BaselineConfig& cfg = {});

struct PairCount {
    std::size_t correct = 0;
    std::size_t total = 0;
};

/// Over unordered pairs with gt != 0.
PairCount ordering_counts(const std::vector<std::vector<int>>& predicted,
                          const std::vector<std::vector<int>>& gt);
/// Throws UndefinedMetricError when gt has no occluded pair.
double ordering_accuracy(const std::vector<std::vector<int>>& predicted,
                         const std::vector<std::vector<int>>& gt);

}  // namespace deocc
