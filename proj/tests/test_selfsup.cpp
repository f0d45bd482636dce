#include <random>

#include <gtest/gtest.h>

#include "deocc/errors.hpp"
#include "deocc/scene.hpp"
#include "deocc/selfsup.hpp"

using namespace deocc;

namespace {

std::vector<Scene> small_scenes(int n) {
    std::vector<Scene> out;
    for (int i = 0; i < n; ++i) out.push_back(render_scene(sample_scene(500 + i)));
    return out;
}

}  // namespace

TEST(SelfSup, Case1EraserBoundsOn4x4) {
    const auto a = BinaryMask::from_rect(32, 32, {14, 14, 4, 4});
    const auto src = BinaryMask::from_rect(32, 32, {0, 0, 5, 3});
    std::mt19937_64 rng(1);
    for (int k = 0; k < 1000; ++k) {
        const auto b = place_eraser(a, src, EraserUse::Case1, rng);
        ASSERT_TRUE(b.has_value());
        const auto hit = area(intersect(a, *b));
        EXPECT_GE(hit, 2u);   // 0.1 * 16 rounded up
        EXPECT_LE(hit, 11u);  // floor(0.7 * 16)
        EXPECT_EQ(area(*b), 15u);
    }
}

TEST(SelfSup, Case2EraserDisjointNeighbor) {
    const auto a = BinaryMask::from_rect(32, 32, {14, 14, 4, 4});
    const auto src = BinaryMask::from_rect(32, 32, {0, 0, 6, 6});
    std::mt19937_64 rng(2);
    for (int k = 0; k < 200; ++k) {
        const auto b = place_eraser(a, src, EraserUse::Case2, rng);
        ASSERT_TRUE(b.has_value());
        const auto rest = subtract(*b, a);
        EXPECT_TRUE(rest.any());
        EXPECT_TRUE(are_neighbors(rest, a, 1));
    }
}

TEST(SelfSup, SampleInvariantsPerCase) {
    const Instance a{BinaryMask::from_rect(64, 64, {20, 20, 16, 12}), 2, nullptr};
    const auto src = BinaryMask::from_rect(64, 64, {0, 0, 10, 10});
    std::mt19937_64 rng(3);
    SampleConfig cfg;
    cfg.crop.out_size = 32;
    for (int k = 0; k < 50; ++k) {
        const auto s1 = make_pcnet_m_sample_for_case(a, src, 1, rng, cfg);
        EXPECT_EQ(unite(s1.input_mask, intersect(s1.target_mask, s1.eraser_mask)), s1.target_mask);
        const auto s2 = make_pcnet_m_sample_for_case(a, src, 2, rng, cfg);
        EXPECT_EQ(s2.input_mask, s2.target_mask);
        EXPECT_FALSE(overlaps(s2.input_mask, s2.eraser_mask));
        EXPECT_EQ(s2.case_id, 2);
    }
}

TEST(SelfSup, CategoryChannelWeightsInputMask) {
    const Instance a{BinaryMask::from_rect(64, 64, {20, 20, 16, 12}), 3, nullptr};
    std::mt19937_64 rng(4);
    SampleConfig cfg;
    cfg.num_categories = 5;
    const auto s = make_pcnet_m_sample_for_case(a, BinaryMask::from_rect(64, 64, {0, 0, 8, 8}), 2, rng, cfg);
    for (std::size_t i = 0; i < s.category_channel.size(); ++i)
        EXPECT_FLOAT_EQ(s.category_channel[i], s.input_mask.bits()[i] ? 0.6f : 0.0f);
}

TEST(SelfSup, DegenerateGammas) {
    const Instance a{BinaryMask::from_rect(64, 64, {20, 20, 16, 12}), 1, nullptr};
    const auto src = BinaryMask::from_rect(64, 64, {0, 0, 10, 10});
    std::mt19937_64 rng(5);
    for (int k = 0; k < 30; ++k) {
        EXPECT_EQ(make_pcnet_m_sample(a, src, 1.0, rng).case_id, 1);
        const auto s = make_pcnet_m_sample(a, src, 0.0, rng);
        EXPECT_EQ(s.case_id, 2);
        EXPECT_EQ(s.input_mask, s.target_mask);
    }
    EXPECT_THROW(make_pcnet_m_sample(a, src, 1.5, rng), DomainError);
}

TEST(SelfSup, StreamIsIndexDeterministic) {
    const auto scenes = small_scenes(4);
    const InstancePool pool(scenes);
    const MaskSampleStream s1(pool, 0.8, 9), s2(pool, 0.8, 9);
    for (std::uint64_t i : {0u, 5u, 77u}) {
        const auto a = s1.sample(i), b = s2.sample(i);
        EXPECT_EQ(a.input_mask, b.input_mask);
        EXPECT_EQ(a.eraser_mask, b.eraser_mask);
        EXPECT_EQ(a.case_id, b.case_id);
    }
}

TEST(SelfSup, StreamCaseFractionNearGamma) {
    const auto scenes = small_scenes(6);
    const InstancePool pool(scenes);
    const MaskSampleStream stream(pool, 0.8, 1);
    int case1 = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) case1 += stream.sample(i).case_id == 1;
    // binomial std at n=2000 is about 0.009; 4 sigma
    EXPECT_NEAR(case1 / double(n), 0.8, 0.036);
}

TEST(SelfSup, ContentSampleRegions) {
    const auto scenes = small_scenes(1);
    const auto& img = scenes[0].image;
    const auto a = BinaryMask::from_rect(96, 96, {20, 20, 20, 20});
    const auto b = BinaryMask::from_rect(96, 96, {30, 30, 20, 20});
    const auto s = make_pcnet_c_sample(a, b, img, {2.0, 40});
    EXPECT_FALSE(overlaps(s.guide_mask, s.eraser_region));
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x)
            if (s.eraser_region.at(x, y)) EXPECT_EQ(s.erased_image.at(x, y), Rgb{});
            else EXPECT_EQ(s.erased_image.at(x, y), s.target_image.at(x, y));
    EXPECT_THROW(make_pcnet_c_sample(a, BinaryMask::from_rect(96, 96, {60, 60, 5, 5}), img),
                 EmptyEraserError);
}

TEST(SelfSup, PoolRejectsMixedCanvas) {
    InstancePool pool;
    pool.add({BinaryMask(8, 8, true), 1, nullptr});
    EXPECT_THROW(pool.add({BinaryMask(9, 8, true), 1, nullptr}), DimensionError);
}
