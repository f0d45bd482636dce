#include "deocc/amodal.hpp"

#include <deque>

#include "deocc/errors.hpp"

namespace deocc {

std::set<int> ancestors(const OcclusionGraph& graph, int node) {
    if (!graph.has_node(node)) throw LookupError("unknown node " + std::to_string(node));
    std::set<int> visited{node};
    std::deque<int> queue{node};
    while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        for (int p : graph.occluders(cur))
            if (visited.insert(p).second) queue.push_back(p);
    }
    visited.erase(node);
    return visited;
}

namespace {

const BinaryMask& mask_at(const std::vector<BinaryMask>& modals, int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= modals.size())
        throw LookupError("node " + std::to_string(id) + " has no mask");
    return modals[static_cast<std::size_t>(id)];
}

void record(AmodalDiagnostics* d, const BinaryMask& eraser) {
    if (!d) return;
    d->eraser_area = area(eraser);
    d->eraser_coverage = eraser.pixel_count() ? static_cast<double>(d->eraser_area) / eraser.pixel_count() : 0.0;
}

}  // namespace

BinaryMask union_of(const std::vector<BinaryMask>& modals, const std::set<int>& ids) {
    if (modals.empty()) throw DomainError("union_of: no masks");
    BinaryMask out(modals.front().width(), modals.front().height());
    for (int id : ids) out = unite(out, mask_at(modals, id));
    return out;
}

BinaryMask amodal_complete_og(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                              const OcclusionGraph& graph, int node, const CompletionContext& ctx,
                              const OgOptions& options, AmodalDiagnostics* diagnostics) {
    const auto& modal = mask_at(modals, node);
    const auto anc = ancestors(graph, node);
    const auto eraser = union_of(modals, anc);
    record(diagnostics, eraser);
    if (anc.empty()) return modal;
    if (!options.iterative) return completer.complete_mask(modal, eraser, ctx);

    // BFS layers from the node, so direct occluders come first.
    std::vector<int> order;
    std::set<int> seen{node};
    std::deque<int> queue{node};
    while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        for (int p : graph.occluders(cur))
            if (seen.insert(p).second) {
                order.push_back(p);
                queue.push_back(p);
            }
    }
    BinaryMask cur = modal;
    for (int a : order) cur = completer.complete_mask(cur, subtract(mask_at(modals, a), cur), ctx);
    return cur;
}

BinaryMask amodal_complete_nog(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                               int node, const CompletionContext& ctx, int dilation_radius,
                               AmodalDiagnostics* diagnostics) {
    const auto& modal = mask_at(modals, node);
    std::set<int> neighbors;
    for (std::size_t j = 0; j < modals.size(); ++j)
        if (static_cast<int>(j) != node && are_neighbors(modal, modals[j], dilation_radius))
            neighbors.insert(static_cast<int>(j));
    const auto eraser = union_of(modals, neighbors);
    record(diagnostics, eraser);
    if (neighbors.empty()) return modal;
    return completer.complete_mask(modal, eraser, ctx);
}

std::vector<BinaryMask> amodal_all_og(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                                      const OcclusionGraph& graph, const std::vector<CompletionContext>& contexts,
                                      const OgOptions& options) {
    if (contexts.size() != modals.size()) throw DimensionError("one completion context per object required");
    std::vector<BinaryMask> out;
    for (std::size_t i = 0; i < modals.size(); ++i)
        out.push_back(amodal_complete_og(completer, modals, graph, static_cast<int>(i), contexts[i], options));
    return out;
}

std::vector<BinaryMask> amodal_all_nog(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                                       const std::vector<CompletionContext>& contexts, int dilation_radius) {
    if (contexts.size() != modals.size()) throw DimensionError("one completion context per object required");
    std::vector<BinaryMask> out;
    for (std::size_t i = 0; i < modals.size(); ++i)
        out.push_back(amodal_complete_nog(completer, modals, static_cast<int>(i), contexts[i], dilation_radius));
    return out;
}

std::optional<double> iou(const BinaryMask& a, const BinaryMask& b) {
    const auto u = area(unite(a, b));
    if (u == 0) return std::nullopt;
    return static_cast<double>(area(intersect(a, b))) / static_cast<double>(u);
}

double amodal_miou(const std::vector<BinaryMask>& predicted, const std::vector<BinaryMask>& gt,
                   std::size_t* skipped) {
    if (predicted.size() != gt.size()) throw DimensionError("amodal_miou: object lists differ in length");
    double sum = 0;
    std::size_t n = 0, skip = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (const auto v = iou(predicted[i], gt[i])) {
            sum += *v;
            ++n;
        } else {
            ++skip;
        }
    }
    if (skipped) *skipped = skip;
    if (n == 0) throw UndefinedMetricError("amodal_miou: every object has an empty union");
    return sum / static_cast<double>(n);
}

}  // namespace deocc
