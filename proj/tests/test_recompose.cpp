#include <filesystem>
#include <map>
#include <numeric>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "deocc/completers.hpp"
#include "deocc/content.hpp"
#include "deocc/errors.hpp"
#include "deocc/ordering.hpp"
#include "deocc/recompose.hpp"
#include "deocc/scene.hpp"

using namespace deocc;

namespace {

LayeredScene oracle_layers(const Scene& s) {
    const OracleContentCompleter content(s);
    auto d = decompose_scene(s.image, s.modal_masks(), s.amodal_masks(),
                             object_contexts(&s.image, s.categories()), content);
    return make_layered_scene(std::move(d), OcclusionGraph::from_matrix(s.gt_order));
}

bool respects(const std::vector<int>& order, const OcclusionGraph& g) {
    std::map<int, std::size_t> pos;
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    for (auto [a, b] : g.edges())
        if (pos.at(a) < pos.at(b)) return false;  // occluder must come later
    return true;
}

}  // namespace

TEST(TotalOrder, ChainBackToFront) {
    OcclusionGraph g;
    for (int id : {1, 2, 3}) g.add_node(id);
    g.add_edge(3, 2);
    g.add_edge(2, 1);
    const auto t = total_order(g);
    EXPECT_EQ(t.back_to_front, (std::vector<int>{1, 2, 3}));
    EXPECT_TRUE(t.cycles.empty());
}

TEST(TotalOrder, CycleIsOneComponentInIdOrder) {
    OcclusionGraph g(5);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    g.add_edge(3, 0);
    g.add_edge(4, 2);
    const auto t = total_order(g);
    ASSERT_EQ(t.cycles.size(), 1u);
    EXPECT_EQ(t.cycles[0], (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(t.back_to_front, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(TotalOrder, RandomDagsRespectEveryEdge) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 10;
        std::vector<int> rank(n);
        std::iota(rank.begin(), rank.end(), 0);
        std::shuffle(rank.begin(), rank.end(), rng);
        OcclusionGraph g(n);
        std::bernoulli_distribution coin(0.3);
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (coin(rng)) rank[a] > rank[b] ? g.add_edge(a, b) : g.add_edge(b, a);
        const auto t = total_order(g);
        EXPECT_EQ(t.back_to_front.size(), static_cast<std::size_t>(n));
        EXPECT_TRUE(respects(t.back_to_front, g));
        EXPECT_TRUE(t.cycles.empty());
    }
}

TEST(Render, NoLayersIsBackground) {
    const RgbImage bg(5, 5, Rgb{1, 2, 3});
    EXPECT_EQ(render({}, {}, bg), bg);
}

TEST(Render, OracleRoundTripIsBitExact) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = render_scene(sample_scene(seed));
        EXPECT_EQ(render(oracle_layers(s)), s.image) << "seed " << seed;
    }
}

TEST(Edits, EmptyScriptIsIdentity) {
    const auto s = render_scene(sample_scene(1));
    const auto ls = oracle_layers(s);
    EXPECT_EQ(apply_edits(ls, {}), ls);
}

TEST(Edits, DeleteOccluderRevealsObject) {
    const auto s = render_scene(make_a_under_b_scene());
    const auto out = apply_edits(oracle_layers(s), {{Edit::remove(1)}});
    const auto img = render(out);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) EXPECT_EQ(img.at(x, y), (Rgb{220, 30, 30}));
    EXPECT_EQ(img.at(5, 0), s.background_color);
    EXPECT_FALSE(out.graph.has_node(1));
}

TEST(Edits, ReversedEdgeShowsOccludee) {
    const auto s = render_scene(make_a_under_b_scene());
    const auto img = render(apply_edits(oracle_layers(s), {{Edit::set_order_edge(0, 1, 1)}}));
    for (int y = 0; y < 4; ++y) {
        EXPECT_EQ(img.at(3, y), (Rgb{220, 30, 30}));
        EXPECT_EQ(img.at(4, y), (Rgb{30, 30, 220}));
    }
}

TEST(Edits, MoveOffCanvasEqualsDelete) {
    const auto s = render_scene(sample_scene(2));
    const auto ls = oracle_layers(s);
    EXPECT_EQ(render(apply_edits(ls, {{Edit::move(0, 500, 0)}})), render(apply_edits(ls, {{Edit::remove(0)}})));
}

TEST(Edits, DuplicateCopiesEdgesAndSwapExchangesCenters) {
    const auto s = render_scene(make_a_under_b_scene());
    const auto ls = oracle_layers(s);
    const auto dup = apply_edits(ls, {{Edit::duplicate(1, 0, 0, 7)}});
    EXPECT_TRUE(dup.graph.has_edge(7, 0));
    EXPECT_EQ(dup.layer(7).amodal, ls.layer(1).amodal);
    const auto sw = apply_edits(ls, {{Edit::swap_positions(0, 1)}});
    // centers 1.5 and 3.5 in x -> integer bbox centers 1 and 3, shift by 2
    EXPECT_EQ(sw.layer(0).amodal, translate(ls.layer(0).amodal, 2, 0));
    EXPECT_EQ(sw.layer(1).amodal, translate(ls.layer(1).amodal, -2, 0));
}

TEST(Edits, FailingEditReportsIndex) {
    const auto s = render_scene(make_a_under_b_scene());
    const auto ls = oracle_layers(s);
    try {
        apply_edits(ls, {{Edit::move(0, 1, 0), Edit::remove(9)}});
        FAIL();
    } catch (const EditError& e) {
        EXPECT_EQ(e.edit_index(), 1u);
    }
    EXPECT_THROW(apply_edits(ls, {{Edit::duplicate(0, 0, 0, 1)}}), EditError);
}

TEST(Edits, ScriptJsonRoundTrip) {
    const EditScript script{{Edit::move(1, 2, -3), Edit::remove(4), Edit::duplicate(1, 5, 5, 9),
                             Edit::set_order_edge(2, 3, -1), Edit::swap_positions(0, 2)}};
    const auto j = edit_script_to_json(script);
    EXPECT_EQ(j.at("version"), kEditScriptVersion);
    EXPECT_EQ(j.at("edits").at(0).at("op"), "move");
    EXPECT_EQ(edit_script_to_json(edit_script_from_json(j)), j);
    auto bad = j;
    bad["edits"][2]["op"] = "rotate";
    try {
        edit_script_from_json(bad);
        FAIL();
    } catch (const EditError& e) {
        EXPECT_EQ(e.edit_index(), 2);
    }
}

TEST(Persistence, DirectoryRoundTrip) {
    const auto s = render_scene(sample_scene(5));
    const auto ls = oracle_layers(s);
    const auto dir = std::filesystem::temp_directory_path() / "deocc_layers_test";
    std::filesystem::remove_all(dir);
    save_layered_scene(dir.string(), ls);
    EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "layer_0.png"));
    const auto back = load_layered_scene(dir.string());
    EXPECT_EQ(back.graph, ls.graph);
    EXPECT_EQ(render(back), render(ls));
    for (const auto& l : ls.layers) EXPECT_EQ(back.layer(l.id).amodal, l.amodal);
    std::filesystem::remove_all(dir);
}
