#pragma once

#include <vector>

#include "deocc/amodal.hpp"
#include "deocc/completers.hpp"

namespace deocc {

/// An intact object: RGB defined on the amodal mask (zero elsewhere), alpha
/// equal to the amodal mask.
struct ObjectLayer {
    int id = 0;
    int category_id = 1;
    BinaryMask amodal;
    RgbImage rgb;

    bool operator==(const ObjectLayer&) const = default;
};

/// am ∩ anc_union.
BinaryMask eraser_region(const BinaryMask& am, const BinaryMask& anc_union);

/// Fills am \ modal (which contains am ∩ anc_union whenever am ⊇ modal) and
/// cuts the result to am. Modal pixels are copied from `image` unchanged.
ObjectLayer complete_content(const ContentCompleter& completer, const RgbImage& image, const BinaryMask& modal,
                             const BinaryMask& am, const CompletionContext& ctx);

/// Fills the union of all modal masks, guided by its complement. Completers
/// that need a visible boundary (diffusion) throw NoBoundaryError when the
/// foreground covers the canvas.
RgbImage complete_background(const ContentCompleter& completer, const RgbImage& image,
                             const std::vector<BinaryMask>& modals, const CompletionContext& ctx = {});

struct Decomposition {
    std::vector<ObjectLayer> layers;
    RgbImage background;
};

/// One layer per object (ids are mask indices) plus the background.
Decomposition decompose_scene(const RgbImage& image, const std::vector<BinaryMask>& modals,
                              const std::vector<BinaryMask>& amodals, const std::vector<CompletionContext>& contexts,
                              const ContentCompleter& completer);

}  // namespace deocc
