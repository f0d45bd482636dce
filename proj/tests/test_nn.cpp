#include <random>

#include <gtest/gtest.h>

#include "deocc/errors.hpp"
#include "deocc/gradcheck.hpp"
#include "deocc/nn.hpp"

using namespace deocc;
using namespace deocc::nn;

namespace {

using T64 = BasicTensor<double>;

T64 randn(int n, int c, int h, int w, std::mt19937_64& rng) {
    T64 t(n, c, h, w);
    std::normal_distribution<double> d;
    for (auto& v : t.data()) v = d(rng);
    return t;
}

double dot(const T64& a, const T64& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

// Max relative error of d/dx <proj, f(x)> between `analytic` and central differences.
double check_input_grad(T64 x, const T64& proj, const std::function<T64(const T64&)>& f,
                        const T64& analytic, double eps = 1e-3) {
    double worst = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double o = x.data()[k];
        x.data()[k] = o + eps;
        const double lp = dot(proj, f(x));
        x.data()[k] = o - eps;
        const double lm = dot(proj, f(x));
        x.data()[k] = o;
        worst = std::max(worst, relative_error(analytic.data()[k], (lp - lm) / (2 * eps)));
    }
    return worst;
}

}  // namespace

class ConvGradTest : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(ConvGradTest, MatchesFiniteDifferences) {
    const auto [kernel, stride] = GetParam();
    std::mt19937_64 rng(kernel * 10 + stride);
    Conv2d<double> conv(2, 3, kernel, stride);
    conv.kaiming_uniform(rng);
    for (auto& b : conv.bias()) b = std::normal_distribution<double>()(rng);
    const auto x = randn(2, 2, 8, 8, rng);
    const auto y = conv.forward(x);
    const auto proj = randn(y.batch(), y.channels(), y.height(), y.width(), rng);
    auto grad = conv.zero_grad();
    T64 dx;
    conv.backward(x, proj, grad, &dx);
    EXPECT_LT(check_input_grad(x, proj, [&](const T64& in) { return conv.forward(in); }, dx), 1e-4);

    const double eps = 1e-3;
    double worst = 0;
    for (std::size_t k = 0; k < conv.weight().size(); ++k) {
        const double o = conv.weight()[k];
        conv.weight()[k] = o + eps;
        const double lp = dot(proj, conv.forward(x));
        conv.weight()[k] = o - eps;
        const double lm = dot(proj, conv.forward(x));
        conv.weight()[k] = o;
        worst = std::max(worst, relative_error(grad.weight[k], (lp - lm) / (2 * eps)));
    }
    EXPECT_LT(worst, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Kernels, ConvGradTest,
                         ::testing::Values(std::pair{3, 1}, std::pair{3, 2}, std::pair{1, 1}));

TEST(NnGrad, ConvOutputShape) {
    Conv2d<double> down(1, 1, 3, 2);
    EXPECT_EQ(down.out_dim(8), 4);
    EXPECT_EQ(down.out_dim(7), 4);
    EXPECT_THROW(Conv2d<double>(1, 1, 2, 1), ShapeError);
}

TEST(NnGrad, ReluAwayFromKink) {
    std::mt19937_64 rng(1);
    auto x = randn(1, 2, 8, 8, rng);
    for (auto& v : x.data()) v += v >= 0 ? 0.1 : -0.1;
    const auto proj = randn(1, 2, 8, 8, rng);
    const auto dx = relu_backward(relu(x), proj);
    EXPECT_LT(check_input_grad(x, proj, [](const T64& in) { return relu(in); }, dx), 1e-4);
}

TEST(NnGrad, UpsampleAndConcat) {
    std::mt19937_64 rng(2);
    const auto x = randn(2, 3, 4, 4, rng);
    const auto proj = randn(2, 3, 8, 8, rng);
    EXPECT_LT(check_input_grad(x, proj, [](const T64& in) { return upsample2x(in); },
                               upsample2x_backward(proj)),
              1e-4);

    const auto b = randn(2, 1, 4, 4, rng);
    const auto pc = randn(2, 4, 4, 4, rng);
    const auto [da, db] = concat_backward(pc, 3);
    EXPECT_LT(check_input_grad(x, pc, [&](const T64& in) { return concat_channels(in, b); }, da), 1e-4);
    EXPECT_LT(check_input_grad(b, pc, [&](const T64& in) { return concat_channels(x, in); }, db), 1e-4);
}

TEST(NnGrad, BceLoss) {
    std::mt19937_64 rng(3);
    const auto z = randn(2, 1, 8, 8, rng);
    T64 t(2, 1, 8, 8);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = i % 3 == 0;
    const auto r = bce_loss(z, t);
    T64 one(1, 1, 1, 1);
    one.data()[0] = 1;
    auto scalar = [&](const T64& in) {
        T64 s(1, 1, 1, 1);
        s.data()[0] = bce_loss(in, t).loss;
        return s;
    };
    EXPECT_LT(check_input_grad(z, one, scalar, r.grad), 1e-4);
}

TEST(NnGrad, BceKnownValue) {
    T64 z(1, 1, 1, 2), t(1, 1, 1, 2);
    z.data() = {0.0, 2.0};
    t.data() = {1.0, 0.0};
    // (log 2 + log(1 + e^2)) / 2
    EXPECT_NEAR(bce_loss(z, t).loss, (std::log(2.0) + std::log1p(std::exp(2.0))) / 2, 1e-12);
}

TEST(NnGrad, MaskedL1) {
    std::mt19937_64 rng(4);
    const auto p = randn(1, 3, 8, 8, rng);
    const auto t = randn(1, 3, 8, 8, rng);
    T64 region(1, 1, 8, 8);
    for (int y = 2; y < 6; ++y)
        for (int x = 1; x < 5; ++x) region(0, 0, y, x) = 1;
    const auto r = masked_l1_loss(p, t, region);
    double expected = 0;
    for (int c = 0; c < 3; ++c)
        for (int y = 2; y < 6; ++y)
            for (int x = 1; x < 5; ++x) expected += std::abs(p(0, c, y, x) - t(0, c, y, x));
    EXPECT_NEAR(r.loss, expected / 48, 1e-12);
    T64 one(1, 1, 1, 1);
    one.data()[0] = 1;
    auto scalar = [&](const T64& in) {
        T64 s(1, 1, 1, 1);
        s.data()[0] = masked_l1_loss(in, t, region).loss;
        return s;
    };
    EXPECT_LT(check_input_grad(p, one, scalar, r.grad), 1e-4);
    EXPECT_EQ(masked_l1_loss(p, t, T64(1, 1, 8, 8)).loss, 0.0);
}

TEST(NnGrad, ComposedUNetOneLevel) {
    const auto r = gradcheck_unet(UNetConfig{2, 1, 4, 1}, 7);
    EXPECT_LT(r.max_rel_error, 1e-4);
    EXPECT_GT(r.checked, 500u);
}

TEST(NnGrad, ComposedUNetTwoLevels) {
    const auto r = gradcheck_unet(UNetConfig{2, 1, 4, 2}, 8);
    EXPECT_LT(r.max_rel_error, 1e-4);
    EXPECT_GT(r.checked, 1000u);
}

TEST(MiniUNet, ZeroHeadGivesZeroLogits) {
    MiniUNet<float> net(UNetConfig{3, 1, 8, 1});
    std::mt19937_64 rng(0);
    net.initialize(rng);
    Tensor x(1, 3, 16, 16);
    for (auto& v : x.data()) v = 1.0f;
    const auto y = net.forward(x);
    for (auto v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(MiniUNet, LayerNamesAndShapes) {
    MiniUNet<float> one(UNetConfig{3, 1, 16, 1});
    EXPECT_EQ(one.layer_names(), (std::vector<std::string>{"enc1", "down", "bottleneck", "dec1", "head"}));
    // 3*16*9+16 + 16*32*9+32 + 32*32*9+32 + 48*16*9+16 + 16+1
    EXPECT_EQ(one.parameter_count(), 448u + 4640u + 9248u + 6928u + 17u);
    MiniUNet<float> two(UNetConfig{3, 1, 16, 2});
    EXPECT_EQ(two.layer_names().size(), 7u);
    EXPECT_THROW(two.forward(Tensor(1, 3, 6, 6)), ShapeError);
    EXPECT_THROW(one.forward(Tensor(1, 2, 8, 8)), ShapeError);
    EXPECT_EQ(two.forward(Tensor(2, 3, 8, 8)).channels(), 1);
}

TEST(MiniUNet, BackwardBeforeForwardThrows) {
    MiniUNet<float> net;
    MiniUNet<float>::Activations acts;
    auto g = net.zero_grad();
    EXPECT_THROW(net.backward(acts, Tensor(1, 1, 8, 8), g), StateError);
}

TEST(Sgd, MomentumUpdateByHand) {
    MiniUNet<double> net(UNetConfig{1, 1, 1, 1});
    auto g = net.zero_grad();
    net.layers()[0].bias()[0] = 1.0;
    g[0].bias[0] = 2.0;
    SGD<double> opt(0.1, 0.5);
    opt.step(net, g);  // v = 2, p = 1 - 0.2
    EXPECT_DOUBLE_EQ(net.layers()[0].bias()[0], 0.8);
    opt.step(net, g);  // v = 0.5*2 + 2 = 3, p = 0.8 - 0.3
    EXPECT_DOUBLE_EQ(net.layers()[0].bias()[0], 0.5);
    EXPECT_THROW(SGD<double>(0.0, 0.9), DomainError);
}

TEST(NnGrad, AllLayerKindsUnderTolerance) {
    for (const auto& [name, r] : gradcheck_all_layers(11)) {
        EXPECT_LT(r.max_rel_error, 1e-4) << name;
        EXPECT_GT(r.checked, 0u) << name;
    }
}
