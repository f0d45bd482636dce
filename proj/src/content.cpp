#include "deocc/content.hpp"

#include "deocc/errors.hpp"

namespace deocc {

BinaryMask eraser_region(const BinaryMask& am, const BinaryMask& anc_union) {
    if (!am.same_dims(anc_union)) throw DimensionError("eraser_region: mask size mismatch");
    return intersect(am, anc_union);
}

ObjectLayer complete_content(const ContentCompleter& completer, const RgbImage& image, const BinaryMask& modal,
                             const BinaryMask& am, const CompletionContext& ctx) {
    if (!modal.same_dims(am) || modal.width() != image.width() || modal.height() != image.height())
        throw DimensionError("complete_content: image and masks differ in size");
    if (!is_subset(modal, am)) throw DomainError("complete_content: amodal mask must contain the modal mask");
    ObjectLayer layer;
    layer.id = ctx.object_id.value_or(0);
    layer.category_id = ctx.category;
    layer.amodal = am;
    const auto region = subtract(am, modal);
    RgbImage filled = region.any() ? completer.fill(erase(image, region), region, modal, ctx) : image;
    copy_where(filled, image, modal);
    layer.rgb = mask_image(filled, am);
    return layer;
}

RgbImage complete_background(const ContentCompleter& completer, const RgbImage& image,
                             const std::vector<BinaryMask>& modals, const CompletionContext& ctx) {
    BinaryMask fg(image.width(), image.height());
    for (const auto& m : modals) {
        if (m.width() != image.width() || m.height() != image.height())
            throw DimensionError("complete_background: mask size differs from image");
        fg = unite(fg, m);
    }
    if (fg.none()) return image;
    CompletionContext bg = ctx;
    bg.object_id.reset();
    return completer.fill(erase(image, fg), fg, complement(fg), bg);
}

Decomposition decompose_scene(const RgbImage& image, const std::vector<BinaryMask>& modals,
                              const std::vector<BinaryMask>& amodals, const std::vector<CompletionContext>& contexts,
                              const ContentCompleter& completer) {
    if (amodals.size() != modals.size() || contexts.size() != modals.size())
        throw DimensionError("decompose_scene: masks, amodal results and contexts differ in count");
    Decomposition d;
    for (std::size_t i = 0; i < modals.size(); ++i) {
        CompletionContext ctx = contexts[i];
        ctx.object_id = static_cast<int>(i);
        d.layers.push_back(complete_content(completer, image, modals[i], amodals[i], ctx));
    }
    d.background = complete_background(completer, image, modals);
    return d;
}

}  // namespace deocc
