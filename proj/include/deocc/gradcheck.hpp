#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "deocc/nn.hpp"

namespace deocc::nn {

struct GradCheckResult {
    double max_rel_error = 0;
    std::size_t checked = 0;
    /// Coordinates dropped because a ReLU switched sides between the +eps
    /// and -eps evaluations; the difference quotient is meaningless there.
    std::size_t skipped_kinks = 0;
};

/// |a - f| / max(|a| + |f|, floor). Below the floor, difference quotients
/// carry about 1e-12 of rounding noise, so tinier gradients are compared
/// at the floor's scale.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), floor);
}

/// Sign pattern of every ReLU output in a forward pass.
template <typename T>
std::vector<bool> relu_pattern(const typename MiniUNet<T>::Activations& a) {
    std::vector<bool> p;
    auto add = [&](const BasicTensor<T>& t) {
        for (auto v : t.data()) p.push_back(v > T{0});
    };
    for (const auto& t : a.enc) add(t);
    add(a.bottleneck);
    for (const auto& t : a.dec) add(t);
    return p;
}

/// Central differences of mean BCE(net(x), target) against backprop, for
/// every weight, bias and input coordinate (every `stride`-th one).
inline GradCheckResult gradcheck_unet(const UNetConfig& cfg, std::uint64_t seed, double eps = 1e-3,
                                      int batch = 2, int size = 8, std::size_t stride = 1) {
    MiniUNet<double> net(cfg);
    std::mt19937_64 rng(seed);
    net.initialize(rng, false);
    BasicTensor<double> x(batch, cfg.in_channels, size, size);
    BasicTensor<double> target(batch, cfg.out_channels, size, size);
    std::normal_distribution<double> normal;
    std::bernoulli_distribution coin(0.5);
    for (auto& v : x.data()) v = normal(rng);
    for (auto& v : target.data()) v = coin(rng) ? 1.0 : 0.0;

    typename MiniUNet<double>::Activations acts;
    const auto logits = net.forward(x, acts);
    const auto loss = bce_loss(logits, target);
    auto grads = net.zero_grad();
    const auto dx = net.backward(acts, loss.grad, grads, true);

    GradCheckResult r;
    auto probe = [&](double& value, double analytic) {
        const double orig = value;
        typename MiniUNet<double>::Activations ap, am;
        value = orig + eps;
        const double lp = bce_loss(net.forward(x, ap), target).loss;
        value = orig - eps;
        const double lm = bce_loss(net.forward(x, am), target).loss;
        value = orig;
        if (relu_pattern<double>(ap) != relu_pattern<double>(am)) {
            ++r.skipped_kinks;
            return;
        }
        r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic, (lp - lm) / (2 * eps)));
        ++r.checked;
    };
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t k = 0; k < layers[l].weight().size(); k += stride)
            probe(layers[l].weight()[k], grads[l].weight[k]);
        for (std::size_t k = 0; k < layers[l].bias().size(); k += stride)
            probe(layers[l].bias()[k], grads[l].bias[k]);
    }
    for (std::size_t k = 0; k < x.size(); k += stride) probe(x.data()[k], dx.data()[k]);
    return r;
}

namespace detail {

inline BasicTensor<double> randn(int n, int c, int h, int w, std::mt19937_64& rng) {
    BasicTensor<double> t(n, c, h, w);
    std::normal_distribution<double> d;
    for (auto& v : t.data()) v = d(rng);
    return t;
}

inline double dot(const BasicTensor<double>& a, const BasicTensor<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

/// Probes every entry of `values` against d/dv <proj, f()>.
inline void probe_all(std::vector<double>& values, const std::vector<double>& analytic,
                      const BasicTensor<double>& proj, const std::function<BasicTensor<double>()>& f, double eps,
                      GradCheckResult& r) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double o = values[k];
        values[k] = o + eps;
        const double lp = dot(proj, f());
        values[k] = o - eps;
        const double lm = dot(proj, f());
        values[k] = o;
        r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic[k], (lp - lm) / (2 * eps)));
        ++r.checked;
    }
}

inline BasicTensor<double> scalar(double v) {
    BasicTensor<double> s(1, 1, 1, 1);
    s.data()[0] = v;
    return s;
}

}  // namespace detail

/// Every layer kind on its own, then the composed net at 1 to 3 levels, all
/// on random 8x8 inputs. Names label the rows.
inline std::vector<std::pair<std::string, GradCheckResult>> gradcheck_all_layers(std::uint64_t seed,
                                                                                 double eps = 3e-5) {
    using detail::randn;
    using T64 = BasicTensor<double>;
    std::vector<std::pair<std::string, GradCheckResult>> rows;
    std::mt19937_64 rng(seed);

    for (auto [kernel, stride] : {std::pair{3, 1}, std::pair{3, 2}, std::pair{1, 1}}) {
        Conv2d<double> conv(2, 3, kernel, stride);
        conv.kaiming_uniform(rng);
        for (auto& b : conv.bias()) b = std::normal_distribution<double>()(rng);
        auto x = randn(2, 2, 8, 8, rng);
        const auto y = conv.forward(x);
        const auto proj = randn(y.batch(), y.channels(), y.height(), y.width(), rng);
        auto grad = conv.zero_grad();
        T64 dx;
        conv.backward(x, proj, grad, &dx);
        GradCheckResult r;
        auto f = [&] { return conv.forward(x); };
        detail::probe_all(conv.weight(), grad.weight, proj, f, eps, r);
        detail::probe_all(conv.bias(), grad.bias, proj, f, eps, r);
        detail::probe_all(x.data(), dx.data(), proj, f, eps, r);
        rows.emplace_back("conv" + std::to_string(kernel) + "x" + std::to_string(kernel) + "/s" +
                              std::to_string(stride),
                          r);
    }
    {
        auto x = randn(1, 2, 8, 8, rng);
        for (auto& v : x.data()) v += v >= 0 ? 0.1 : -0.1;  // keep off the kink
        const auto proj = randn(1, 2, 8, 8, rng);
        const auto dx = relu_backward(relu(x), proj);
        GradCheckResult r;
        detail::probe_all(x.data(), dx.data(), proj, [&] { return relu(x); }, eps, r);
        rows.emplace_back("relu", r);
    }
    {
        auto x = randn(2, 3, 4, 4, rng);
        const auto proj = randn(2, 3, 8, 8, rng);
        const auto dx = upsample2x_backward(proj);
        GradCheckResult r;
        detail::probe_all(x.data(), dx.data(), proj, [&] { return upsample2x(x); }, eps, r);
        rows.emplace_back("upsample2x", r);
    }
    {
        auto a = randn(2, 3, 8, 8, rng);
        auto b = randn(2, 1, 8, 8, rng);
        const auto proj = randn(2, 4, 8, 8, rng);
        const auto [da, db] = concat_backward(proj, 3);
        GradCheckResult r;
        auto f = [&] { return concat_channels(a, b); };
        detail::probe_all(a.data(), da.data(), proj, f, eps, r);
        detail::probe_all(b.data(), db.data(), proj, f, eps, r);
        rows.emplace_back("concat", r);
    }
    {
        auto z = randn(2, 1, 8, 8, rng);
        T64 t(2, 1, 8, 8);
        std::bernoulli_distribution coin(0.5);
        for (auto& v : t.data()) v = coin(rng) ? 1.0 : 0.0;
        const auto g = bce_loss(z, t).grad;
        GradCheckResult r;
        detail::probe_all(z.data(), g.data(), detail::scalar(1), [&] { return detail::scalar(bce_loss(z, t).loss); },
                          eps, r);
        rows.emplace_back("bce_with_logits", r);
    }
    {
        auto p = randn(1, 3, 8, 8, rng);
        auto t = p;
        // targets at least 0.1 away so no coordinate sits on the |.| kink
        for (auto& v : t.data()) v += std::bernoulli_distribution(0.5)(rng) ? 0.5 : -0.5;
        T64 region(1, 1, 8, 8);
        for (int y = 2; y < 6; ++y)
            for (int x = 1; x < 7; ++x) region(0, 0, y, x) = 1;
        const auto g = masked_l1_loss(p, t, region).grad;
        GradCheckResult r;
        detail::probe_all(p.data(), g.data(), detail::scalar(1),
                          [&] { return detail::scalar(masked_l1_loss(p, t, region).loss); }, eps, r);
        rows.emplace_back("masked_l1", r);
    }
    for (int levels = 1; levels <= 3; ++levels)
        rows.emplace_back("miniunet/levels=" + std::to_string(levels),
                          gradcheck_unet(UNetConfig{3, 1, 4, levels}, seed + static_cast<std::uint64_t>(levels), eps));
    return rows;
}

}  // namespace deocc::nn
