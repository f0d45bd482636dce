#include <random>

#include <gtest/gtest.h>

#include "deocc/amodal.hpp"
#include "deocc/completers.hpp"
#include "deocc/errors.hpp"
#include "deocc/ordering.hpp"
#include "deocc/scene.hpp"

using namespace deocc;

namespace {

// #1 at the bottom, #2 over its right half, #3 over the middle of both.
SceneSpec chain_scene() {
    SceneSpec spec;
    spec.width = 16;
    spec.height = 4;
    auto rect = [](Rect r, Rgb c) {
        ShapeSpec s;
        s.kind = ShapeKind::Rect;
        s.box = r;
        s.fill.primary = c;
        return s;
    };
    spec.shapes = {rect({0, 0, 10, 4}, {200, 0, 0}), rect({6, 0, 6, 4}, {0, 200, 0}),
                   rect({4, 0, 4, 4}, {0, 0, 200})};
    spec.z = {0, 1, 2};
    return spec;
}

}  // namespace

TEST(Ancestors, ChainAndIsolated) {
    OcclusionGraph g(4);
    g.add_edge(2, 1);
    g.add_edge(1, 0);
    EXPECT_EQ(ancestors(g, 0), (std::set<int>{1, 2}));
    EXPECT_TRUE(ancestors(g, 3).empty());
    EXPECT_THROW(ancestors(g, 9), LookupError);
}

TEST(Ancestors, CycleExcludesSelf) {
    OcclusionGraph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    g.add_edge(3, 0);
    EXPECT_EQ(ancestors(g, 0), (std::set<int>{1, 2, 3}));
}

TEST(Ancestors, MatchesTransitiveClosure) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 11;
        OcclusionGraph g(n);
        std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
        std::bernoulli_distribution coin(0.25);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (coin(rng)) {
                    const bool fwd = coin(rng) || coin(rng);
                    g.add_edge(fwd ? a : b, fwd ? b : a);
                    reach[fwd ? a : b][fwd ? b : a] = true;
                }
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (reach[i][k] && reach[k][j]) reach[i][j] = true;
        for (int t = 0; t < n; ++t) {
            std::set<int> expected;
            for (int i = 0; i < n; ++i)
                if (i != t && reach[i][t]) expected.insert(i);
            EXPECT_EQ(ancestors(g, t), expected);
        }
    }
}

TEST(Og, UnoccludedReturnsModal) {
    const auto s = render_scene(make_a_under_b_scene());
    const OracleCompleter oracle(s);
    const auto modals = s.modal_masks();
    const auto g = OcclusionGraph::from_matrix(s.gt_order);
    const auto ctx = object_contexts(&s.image, s.categories());
    EXPECT_EQ(amodal_complete_og(oracle, modals, g, 1, ctx[1]), modals[1]);
    EXPECT_EQ(amodal_complete_og(oracle, modals, g, 0, ctx[0]), s.objects[0].amodal);
}

TEST(Og, HigherOrderAncestorNeeded) {
    const auto s = render_scene(chain_scene());
    const OracleCompleter oracle(s);
    const auto modals = s.modal_masks();
    const auto ctx = object_contexts(&s.image, s.categories());
    OcclusionGraph chain(3);
    chain.add_edge(2, 1);
    chain.add_edge(1, 0);
    AmodalDiagnostics d;
    EXPECT_EQ(amodal_complete_og(oracle, modals, chain, 0, ctx[0], {}, &d), s.objects[0].amodal);
    EXPECT_EQ(d.eraser_area, area(unite(modals[1], modals[2])));
    const auto partial = oracle.complete_mask(modals[0], modals[1], ctx[0]);
    EXPECT_TRUE(is_subset(partial, s.objects[0].amodal));
    EXPECT_NE(partial, s.objects[0].amodal);
}

TEST(Og, IterativeModeAgreesWithOracle) {
    const auto s = render_scene(chain_scene());
    const OracleCompleter oracle(s);
    const auto g = OcclusionGraph::from_matrix(s.gt_order);
    const auto out = amodal_all_og(oracle, s.modal_masks(), g, object_contexts(&s.image, s.categories()),
                                   OgOptions{true});
    EXPECT_EQ(out, s.amodal_masks());
}

TEST(Og, OracleRecoversEveryObject) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto s = render_scene(sample_scene(seed));
        const OracleCompleter oracle(s);
        const auto modals = s.modal_masks();
        const auto ctx = object_contexts(&s.image, s.categories());
        const auto g = build_order_graph(oracle, modals, ctx);
        const auto og = amodal_all_og(oracle, modals, g, ctx);
        EXPECT_EQ(og, s.amodal_masks()) << "seed " << seed;
        for (std::size_t i = 0; i < modals.size(); ++i)
            EXPECT_LE(*iou(modals[i], s.objects[i].amodal), *iou(og[i], s.objects[i].amodal));
    }
}

TEST(Nog, OracleOccluderStaysModal) {
    const auto s = render_scene(make_a_under_b_scene());
    const OracleCompleter oracle(s);
    const auto ctx = object_contexts(&s.image, s.categories());
    EXPECT_EQ(amodal_complete_nog(oracle, s.modal_masks(), 1, ctx[1]), s.objects[1].modal);
    EXPECT_EQ(amodal_complete_nog(oracle, s.modal_masks(), 0, ctx[0]), s.objects[0].amodal);
}

TEST(Metrics, RawIouOnAUnderB) {
    const auto s = render_scene(make_a_under_b_scene());
    EXPECT_DOUBLE_EQ(*iou(s.objects[0].modal, s.objects[0].amodal), 0.5);
    EXPECT_DOUBLE_EQ(amodal_miou(s.modal_masks(), s.amodal_masks()), 0.75);
    EXPECT_DOUBLE_EQ(*iou(BinaryMask::from_rect(4, 4, {0, 0, 2, 2}), BinaryMask::from_rect(4, 4, {2, 2, 2, 2})), 0.0);
    EXPECT_FALSE(iou(BinaryMask(4, 4), BinaryMask(4, 4)).has_value());
    std::size_t skipped = 0;
    EXPECT_DOUBLE_EQ(amodal_miou({BinaryMask(4, 4), BinaryMask::full(4, 4)},
                                 {BinaryMask(4, 4), BinaryMask::full(4, 4)}, &skipped),
                     1.0);
    EXPECT_EQ(skipped, 1u);
    EXPECT_THROW(amodal_miou({BinaryMask(4, 4)}, {BinaryMask(4, 4)}), UndefinedMetricError);
}
