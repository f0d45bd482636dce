#pragma once

#include <optional>
#include <set>
#include <vector>

#include "deocc/completers.hpp"
#include "deocc/ordering.hpp"

namespace deocc {

/// Every node with a directed path to `node`. Terminates on cycles; the node
/// itself is never included.
std::set<int> ancestors(const OcclusionGraph& graph, int node);

/// Union of modals[id] over ids; an empty set gives an empty mask of the
/// canvas size.
BinaryMask union_of(const std::vector<BinaryMask>& modals, const std::set<int>& ids);

struct AmodalDiagnostics {
    std::size_t eraser_area = 0;
    double eraser_coverage = 0;  // eraser area / canvas area
};

struct OgOptions {
    /// Complete against one ancestor at a time (nearest first) instead of
    /// the single union step.
    bool iterative = false;
};

/// Ordering-grounded completion: eraser = union of the ancestors' modal
/// masks. Node ids index `modals`.
BinaryMask amodal_complete_og(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                              const OcclusionGraph& graph, int node, const CompletionContext& ctx,
                              const OgOptions& options = {}, AmodalDiagnostics* diagnostics = nullptr);

/// Eraser = union of every neighbor's modal mask, order ignored.
BinaryMask amodal_complete_nog(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                               int node, const CompletionContext& ctx, int dilation_radius = 1,
                               AmodalDiagnostics* diagnostics = nullptr);

/// Whole-scene helpers, one context per object.
std::vector<BinaryMask> amodal_all_og(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                                      const OcclusionGraph& graph, const std::vector<CompletionContext>& contexts,
                                      const OgOptions& options = {});
std::vector<BinaryMask> amodal_all_nog(const PartialCompleter& completer, const std::vector<BinaryMask>& modals,
                                       const std::vector<CompletionContext>& contexts, int dilation_radius = 1);

/// nullopt when the union is empty.
std::optional<double> iou(const BinaryMask& a, const BinaryMask& b);

/// Mean IoU over objects; objects with an empty union are skipped and
/// counted in `skipped`. Throws UndefinedMetricError if all are skipped.
double amodal_miou(const std::vector<BinaryMask>& predicted, const std::vector<BinaryMask>& gt,
                   std::size_t* skipped = nullptr);

}  // namespace deocc
