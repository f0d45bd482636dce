#include <gtest/gtest.h>

#include "deocc/completers.hpp"
#include "deocc/content.hpp"
#include "deocc/errors.hpp"
#include "deocc/scene.hpp"

using namespace deocc;

namespace {

SceneSpec flat_pair() {
    SceneSpec spec;
    spec.width = 40;
    spec.height = 30;
    spec.background = Rgb{180, 190, 200};
    ShapeSpec a;
    a.kind = ShapeKind::Rect;
    a.box = {5, 5, 20, 14};
    a.fill.primary = Rgb{220, 40, 40};
    ShapeSpec b = a;
    b.box = {18, 10, 14, 14};
    b.fill.primary = Rgb{40, 40, 220};
    spec.shapes = {a, b};
    spec.z = {0, 1};
    return spec;
}

}  // namespace

TEST(Content, EraserRegionIsIntersection) {
    const auto am = BinaryMask::from_rect(10, 10, {0, 0, 6, 6});
    const auto anc = BinaryMask::from_rect(10, 10, {4, 4, 6, 6});
    EXPECT_EQ(eraser_region(am, anc), BinaryMask::from_rect(10, 10, {4, 4, 2, 2}));
}

TEST(Content, OracleLayerMatchesRaster) {
    const auto s = render_scene(flat_pair());
    const OracleContentCompleter oracle(s);
    CompletionContext ctx;
    ctx.object_id = 0;
    const auto layer = complete_content(oracle, s.image, s.objects[0].modal, s.objects[0].amodal, ctx);
    EXPECT_EQ(layer.amodal, s.objects[0].amodal);
    EXPECT_EQ(layer.rgb, s.object_raster(0));
}

TEST(Content, DiffusionFlatColorWithinOneLevel) {
    const auto s = render_scene(flat_pair());
    const DiffusionContentCompleter diffusion;
    const auto layer = complete_content(diffusion, s.image, s.objects[0].modal, s.objects[0].amodal, {});
    const auto truth = s.object_raster(0);
    const auto hidden = subtract(s.objects[0].amodal, s.objects[0].modal);
    ASSERT_TRUE(hidden.any());
    for (int y = 0; y < s.height(); ++y)
        for (int x = 0; x < s.width(); ++x) {
            if (!s.objects[0].amodal.at(x, y)) {
                EXPECT_EQ(layer.rgb.at(x, y), Rgb{});
                continue;
            }
            for (int c = 0; c < 3; ++c) EXPECT_NEAR(layer.rgb.at(x, y)[c], truth.at(x, y)[c], 1);
        }
}

TEST(Content, ModalPixelsCopiedVerbatim) {
    const auto s = render_scene(sample_scene(4));
    const DiffusionContentCompleter diffusion;
    const auto layer = complete_content(diffusion, s.image, s.objects[0].modal, s.objects[0].amodal, {});
    for (int y = 0; y < s.height(); ++y)
        for (int x = 0; x < s.width(); ++x)
            if (s.objects[0].modal.at(x, y)) EXPECT_EQ(layer.rgb.at(x, y), s.image.at(x, y));
}

TEST(Content, BackgroundFlatFill) {
    const auto s = render_scene(flat_pair());
    const auto bg = complete_background(DiffusionContentCompleter{}, s.image, s.modal_masks());
    for (const auto& p : bg.pixels())
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(p[c], s.background_color[c], 1);
    EXPECT_THROW(complete_background(DiffusionContentCompleter{}, s.image, {BinaryMask::full(40, 30)}),
                 NoBoundaryError);
}

TEST(Content, DecomposeProducesOneLayerPerObject) {
    const auto s = render_scene(sample_scene(8));
    const OracleContentCompleter oracle(s);
    const auto d = decompose_scene(s.image, s.modal_masks(), s.amodal_masks(),
                                   object_contexts(&s.image, s.categories()), oracle);
    ASSERT_EQ(d.layers.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(d.layers[i].id, static_cast<int>(i));
        EXPECT_EQ(d.layers[i].rgb, s.object_raster(i));
    }
    EXPECT_EQ(d.background, s.background_raster());
}
