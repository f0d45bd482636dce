#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deocc/tensor.hpp"

namespace deocc::nn {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

/// Weight/bias gradients of one convolution.
template <typename T>
struct ConvGrad {
    std::vector<T> weight;
    std::vector<T> bias;
};

/// Square-kernel 2-D convolution with zero padding k/2.
/// Weight layout: [out][in][ky][kx].
template <typename T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_channels, int out_channels, int kernel, int stride)
        : in_(in_channels), out_(out_channels), k_(kernel), stride_(stride),
          weight_(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel, T{0}),
          bias_(static_cast<std::size_t>(out_channels), T{0}) {
        if (kernel % 2 == 0 || stride < 1) throw ShapeError("conv needs odd kernel, stride >= 1");
    }

    int in_channels() const { return in_; }
    int out_channels() const { return out_; }
    int kernel() const { return k_; }
    int stride() const { return stride_; }
    int patch() const { return in_ * k_ * k_; }
    int out_dim(int d) const { return (d + 2 * (k_ / 2) - k_) / stride_ + 1; }

    std::vector<T>& weight() { return weight_; }
    const std::vector<T>& weight() const { return weight_; }
    std::vector<T>& bias() { return bias_; }
    const std::vector<T>& bias() const { return bias_; }

    ConvGrad<T> zero_grad() const {
        return {std::vector<T>(weight_.size(), T{0}), std::vector<T>(bias_.size(), T{0})};
    }

    /// Kaiming-uniform (fan-in, ReLU gain): U(-sqrt(6/fan_in), sqrt(6/fan_in)).
    template <typename Rng>
    void kaiming_uniform(Rng& rng) {
        const double bound = std::sqrt(6.0 / patch());
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& w : weight_) w = static_cast<T>(dist(rng));
        std::fill(bias_.begin(), bias_.end(), T{0});
    }

    BasicTensor<T> forward(const BasicTensor<T>& x) const {
        check_input(x);
        const int ho = out_dim(x.height()), wo = out_dim(x.width());
        BasicTensor<T> y(x.batch(), out_, ho, wo);
        const int rows = block_rows(wo);
        std::vector<T> col(static_cast<std::size_t>(patch()) * rows * wo);
        ConstMatMap<T> w(weight_.data(), out_, patch());
        const Eigen::Index hw = static_cast<Eigen::Index>(ho) * wo;
        for (int n = 0; n < x.batch(); ++n) {
            T* ys = y.sample(n).data();
            for (int r0 = 0; r0 < ho; r0 += rows) {
                const int nr = std::min(rows, ho - r0);
                const Eigen::Index cols = static_cast<Eigen::Index>(nr) * wo;
                im2col(x, n, r0, nr, wo, col);
                ConstMatMap<T> c(col.data(), patch(), cols);
                Eigen::Map<RowMatrix<T>, 0, Eigen::OuterStride<>> out(
                    ys + static_cast<std::size_t>(r0) * wo, out_, cols, Eigen::OuterStride<>(hw));
                out.noalias() = w * c;
                for (int o = 0; o < out_; ++o)
                    out.row(o).array() += bias_[static_cast<std::size_t>(o)];
            }
        }
        return y;
    }

    /// Accumulates parameter gradients into `grad`; writes the input gradient
    /// into `dx` when non-null.
    void backward(const BasicTensor<T>& x, const BasicTensor<T>& dy, ConvGrad<T>& grad,
                  BasicTensor<T>* dx) const {
        check_input(x);
        const int ho = out_dim(x.height()), wo = out_dim(x.width());
        if (dy.batch() != x.batch() || dy.channels() != out_ || dy.height() != ho || dy.width() != wo)
            throw ShapeError("conv backward: upstream gradient shape mismatch");
        if (grad.weight.size() != weight_.size() || grad.bias.size() != bias_.size())
            throw ShapeError("conv backward: gradient buffer mismatch");
        // Stride 1: the input gradient is a same-padded convolution of dy
        // with the channel-transposed, spatially flipped kernel.
        const bool transposed_route = stride_ == 1 && dx != nullptr;
        if (transposed_route) *dx = flipped().forward(dy);
        else if (dx) *dx = BasicTensor<T>(x.batch(), in_, x.height(), x.width());
        const bool scatter = dx != nullptr && !transposed_route;
        const Eigen::Index hw = static_cast<Eigen::Index>(ho) * wo;
        const int rows = block_rows(wo);
        std::vector<T> col(static_cast<std::size_t>(patch()) * rows * wo);
        std::vector<T> dcol(scatter ? col.size() : 0);
        ConstMatMap<T> w(weight_.data(), out_, patch());
        MatMap<T> dw(grad.weight.data(), out_, patch());
        for (int n = 0; n < x.batch(); ++n) {
            const T* gs = dy.sample(n).data();
            for (int o = 0; o < out_; ++o) {
                const T* g = gs + static_cast<std::size_t>(o) * hw;
                T acc{0};
                for (Eigen::Index i = 0; i < hw; ++i) acc += g[i];
                grad.bias[static_cast<std::size_t>(o)] += acc;
            }
            for (int r0 = 0; r0 < ho; r0 += rows) {
                const int nr = std::min(rows, ho - r0);
                const Eigen::Index cols = static_cast<Eigen::Index>(nr) * wo;
                im2col(x, n, r0, nr, wo, col);
                ConstMatMap<T> c(col.data(), patch(), cols);
                Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>> g(
                    gs + static_cast<std::size_t>(r0) * wo, out_, cols, Eigen::OuterStride<>(hw));
                dw.noalias() += g * c.transpose();
                if (scatter) {
                    MatMap<T> dc(dcol.data(), patch(), cols);
                    dc.noalias() = w.transpose() * g;
                    col2im(dcol, n, r0, nr, wo, *dx);
                }
            }
        }
    }

private:
    void check_input(const BasicTensor<T>& x) const {
        if (x.channels() != in_)
            throw ShapeError("conv expects " + std::to_string(in_) + " input channels, got " +
                             std::to_string(x.channels()));
    }

    Conv2d flipped() const {
        Conv2d f(out_, in_, k_, 1);
        for (int o = 0; o < out_; ++o)
            for (int i = 0; i < in_; ++i)
                for (int ky = 0; ky < k_; ++ky)
                    for (int kx = 0; kx < k_; ++kx)
                        f.weight_[((static_cast<std::size_t>(i) * out_ + o) * k_ + (k_ - 1 - ky)) * k_ +
                                  (k_ - 1 - kx)] =
                            weight_[((static_cast<std::size_t>(o) * in_ + i) * k_ + ky) * k_ + kx];
        return f;
    }

    // Output rows per im2col tile; keeps the column buffer cache-resident.
    int block_rows(int wo) const {
        const int target_cols = 512;
        return std::max(1, target_cols / std::max(1, wo));
    }

    // Columns for output rows [r0, r0 + nr).
    void im2col(const BasicTensor<T>& x, int n, int r0, int nr, int wo, std::vector<T>& col) const {
        const int pad = k_ / 2, h = x.height(), w = x.width();
        const std::size_t cols = static_cast<std::size_t>(nr) * wo;
        std::size_t row = 0;
        for (int c = 0; c < in_; ++c) {
            const T* src = x.plane(n, c).data();
            for (int ky = 0; ky < k_; ++ky) {
                for (int kx = 0; kx < k_; ++kx, ++row) {
                    T* dst = col.data() + row * cols;
                    // Valid output x range for this kernel column.
                    const int ox_lo = std::max(0, (pad - kx + stride_ - 1) / stride_);
                    const int ox_hi = std::min(wo, (w - 1 + pad - kx) / stride_ + 1);
                    for (int r = 0; r < nr; ++r) {
                        const int iy = (r0 + r) * stride_ + ky - pad;
                        T* drow = dst + static_cast<std::size_t>(r) * wo;
                        if (iy < 0 || iy >= h || ox_lo >= ox_hi) {
                            std::fill(drow, drow + wo, T{0});
                            continue;
                        }
                        const T* srow = src + static_cast<std::size_t>(iy) * w;
                        std::fill(drow, drow + ox_lo, T{0});
                        if (stride_ == 1) {
                            std::copy(srow + ox_lo + kx - pad, srow + ox_hi + kx - pad, drow + ox_lo);
                        } else {
                            for (int ox = ox_lo; ox < ox_hi; ++ox) drow[ox] = srow[ox * stride_ + kx - pad];
                        }
                        std::fill(drow + ox_hi, drow + wo, T{0});
                    }
                }
            }
        }
    }

    void col2im(const std::vector<T>& col, int n, int r0, int nr, int wo, BasicTensor<T>& dx) const {
        const int pad = k_ / 2, h = dx.height(), w = dx.width();
        const std::size_t cols = static_cast<std::size_t>(nr) * wo;
        std::size_t row = 0;
        for (int c = 0; c < in_; ++c) {
            T* dst = dx.plane(n, c).data();
            for (int ky = 0; ky < k_; ++ky) {
                for (int kx = 0; kx < k_; ++kx, ++row) {
                    const T* src = col.data() + row * cols;
                    const int ox_lo = std::max(0, (pad - kx + stride_ - 1) / stride_);
                    const int ox_hi = std::min(wo, (w - 1 + pad - kx) / stride_ + 1);
                    for (int r = 0; r < nr; ++r) {
                        const int iy = (r0 + r) * stride_ + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        T* drow = dst + static_cast<std::size_t>(iy) * w;
                        const T* srow = src + static_cast<std::size_t>(r) * wo;
                        for (int ox = ox_lo; ox < ox_hi; ++ox) drow[ox * stride_ + kx - pad] += srow[ox];
                    }
                }
            }
        }
    }

    int in_ = 0;
    int out_ = 0;
    int k_ = 1;
    int stride_ = 1;
    std::vector<T> weight_;
    std::vector<T> bias_;
};

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
    BasicTensor<T> y = x;
    for (auto& v : y.data()) v = v > T{0} ? v : T{0};
    return y;
}

/// Gradient through ReLU given its output.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
    BasicTensor<T> dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i)
        if (!(y.data()[i] > T{0})) dx.data()[i] = T{0};
    return dx;
}

template <typename T>
BasicTensor<T> upsample2x(const BasicTensor<T>& x) {
    const int h = x.height(), w = x.width();
    BasicTensor<T> y(x.batch(), x.channels(), h * 2, w * 2);
    for (int n = 0; n < x.batch(); ++n)
        for (int c = 0; c < x.channels(); ++c) {
            const T* src = x.plane(n, c).data();
            T* dst = y.plane(n, c).data();
            for (int yy = 0; yy < h; ++yy) {
                T* r0 = dst + static_cast<std::size_t>(2 * yy) * (2 * w);
                const T* s = src + static_cast<std::size_t>(yy) * w;
                for (int xx = 0; xx < w; ++xx) r0[2 * xx] = r0[2 * xx + 1] = s[xx];
                std::copy(r0, r0 + 2 * w, r0 + 2 * w);
            }
        }
    return y;
}

template <typename T>
BasicTensor<T> upsample2x_backward(const BasicTensor<T>& dy) {
    const int h = dy.height() / 2, w = dy.width() / 2;
    BasicTensor<T> dx(dy.batch(), dy.channels(), h, w);
    for (int n = 0; n < dy.batch(); ++n)
        for (int c = 0; c < dy.channels(); ++c) {
            const T* src = dy.plane(n, c).data();
            T* dst = dx.plane(n, c).data();
            for (int yy = 0; yy < h; ++yy) {
                const T* r0 = src + static_cast<std::size_t>(2 * yy) * (2 * w);
                const T* r1 = r0 + 2 * w;
                T* d = dst + static_cast<std::size_t>(yy) * w;
                for (int xx = 0; xx < w; ++xx) d[xx] = (r0[2 * xx] + r0[2 * xx + 1]) + (r1[2 * xx] + r1[2 * xx + 1]);
            }
        }
    return dx;
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    if (a.batch() != b.batch() || a.height() != b.height() || a.width() != b.width())
        throw ShapeError("concat: spatial/batch shape mismatch");
    BasicTensor<T> y(a.batch(), a.channels() + b.channels(), a.height(), a.width());
    for (int n = 0; n < a.batch(); ++n) {
        auto dst = y.sample(n);
        std::copy(a.sample(n).begin(), a.sample(n).end(), dst.begin());
        std::copy(b.sample(n).begin(), b.sample(n).end(),
                  dst.begin() + static_cast<std::ptrdiff_t>(a.sample_size()));
    }
    return y;
}

/// Splits a concat gradient back into the (first, second) operands.
template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> concat_backward(const BasicTensor<T>& dy, int first_channels) {
    BasicTensor<T> da(dy.batch(), first_channels, dy.height(), dy.width());
    BasicTensor<T> db(dy.batch(), dy.channels() - first_channels, dy.height(), dy.width());
    for (int n = 0; n < dy.batch(); ++n) {
        auto src = dy.sample(n);
        std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(da.sample_size()),
                  da.sample(n).begin());
        std::copy(src.begin() + static_cast<std::ptrdiff_t>(da.sample_size()), src.end(),
                  db.sample(n).begin());
    }
    return {std::move(da), std::move(db)};
}

struct UNetConfig {
    int in_channels = 3;
    int out_channels = 1;
    int width = 16;
    /// Number of stride-2 stages. 1 is the compact layout; 2 adds a
    /// quarter-resolution stage with its own skip.
    int levels = 1;

    bool operator==(const UNetConfig&) const = default;
};

/// levels = 1: conv3x3(in->w)+ReLU, conv3x3/2(w->2w)+ReLU,
/// conv3x3(2w->2w)+ReLU, nearest up x2, concat with the first activation,
/// conv3x3(3w->w)+ReLU, conv1x1(w->out).
/// Each extra level inserts another conv3x3/2(2w->2w) on the way down and a
/// conv3x3(4w->2w) decoder fed by that level's skip on the way up.
template <typename T>
class MiniUNet {
public:
    struct Activations {
        bool valid = false;
        BasicTensor<T> x;
        std::vector<BasicTensor<T>> enc;   // enc[0] full res, enc[l] at 1/2^l
        BasicTensor<T> bottleneck;
        std::vector<BasicTensor<T>> cat;   // decoder inputs by level
        std::vector<BasicTensor<T>> dec;   // decoder outputs by level
    };
    using Gradients = std::vector<ConvGrad<T>>;

    MiniUNet() : MiniUNet(UNetConfig{}) {}
    explicit MiniUNet(const UNetConfig& cfg) : cfg_(cfg) {
        if (cfg.levels < 1 || cfg.levels > 4) throw DomainError("MiniUNet levels must be in [1, 4]");
        if (cfg.width < 1 || cfg.in_channels < 1 || cfg.out_channels < 1)
            throw DomainError("MiniUNet channel counts must be positive");
        const int w = cfg.width, L = cfg.levels;
        layers_.push_back(Conv2d<T>(cfg.in_channels, w, 3, 1));
        for (int l = 1; l <= L; ++l) layers_.push_back(Conv2d<T>(l == 1 ? w : 2 * w, 2 * w, 3, 2));
        layers_.push_back(Conv2d<T>(2 * w, 2 * w, 3, 1));
        for (int l = L - 1; l >= 0; --l) layers_.push_back(Conv2d<T>(l == 0 ? 3 * w : 4 * w, l == 0 ? w : 2 * w, 3, 1));
        layers_.push_back(Conv2d<T>(w, cfg.out_channels, 1, 1));
    }

    const UNetConfig& config() const { return cfg_; }
    std::vector<Conv2d<T>>& layers() { return layers_; }
    const std::vector<Conv2d<T>>& layers() const { return layers_; }

    /// Parameter-tensor prefixes in layer order.
    std::vector<std::string> layer_names() const {
        const int L = cfg_.levels;
        std::vector<std::string> n{"enc1"};
        for (int l = 1; l <= L; ++l) n.push_back(L == 1 ? "down" : "down" + std::to_string(l));
        n.push_back("bottleneck");
        for (int l = L - 1; l >= 0; --l) n.push_back("dec" + std::to_string(l + 1));
        n.push_back("head");
        return n;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.weight().size() + l.bias().size();
        return n;
    }

    /// Kaiming-uniform everywhere; the head is zeroed when zero_head is set,
    /// so an untrained net outputs logit 0.
    template <typename Rng>
    void initialize(Rng& rng, bool zero_head = true) {
        for (auto& l : layers_) l.kaiming_uniform(rng);
        if (zero_head) {
            std::fill(layers_.back().weight().begin(), layers_.back().weight().end(), T{0});
            std::fill(layers_.back().bias().begin(), layers_.back().bias().end(), T{0});
        }
    }

    Gradients zero_grad() const {
        Gradients g;
        for (const auto& l : layers_) g.push_back(l.zero_grad());
        return g;
    }

    BasicTensor<T> forward(const BasicTensor<T>& x) const {
        Activations acts;
        return forward(x, acts);
    }

    BasicTensor<T> forward(const BasicTensor<T>& x, Activations& acts) const {
        const int L = cfg_.levels;
        if (x.channels() != cfg_.in_channels)
            throw ShapeError("MiniUNet expects " + std::to_string(cfg_.in_channels) +
                             " input channels, got " + std::to_string(x.channels()));
        const int div = 1 << L;
        if (x.height() % div != 0 || x.width() % div != 0)
            throw ShapeError("MiniUNet input spatial dims must be divisible by " + std::to_string(div));
        acts.valid = false;
        acts.x = x;
        acts.enc.assign(static_cast<std::size_t>(L + 1), {});
        acts.cat.assign(static_cast<std::size_t>(L), {});
        acts.dec.assign(static_cast<std::size_t>(L), {});
        acts.enc[0] = relu(layers_[0].forward(x));
        for (int l = 1; l <= L; ++l)
            acts.enc[static_cast<std::size_t>(l)] =
                relu(layers_[static_cast<std::size_t>(l)].forward(acts.enc[static_cast<std::size_t>(l - 1)]));
        acts.bottleneck = relu(layers_[bottleneck_index()].forward(acts.enc[static_cast<std::size_t>(L)]));
        const BasicTensor<T>* below = &acts.bottleneck;
        for (int l = L - 1; l >= 0; --l) {
            const auto ul = static_cast<std::size_t>(l);
            acts.cat[ul] = concat_channels(upsample2x(*below), acts.enc[ul]);
            acts.dec[ul] = relu(layers_[decoder_index(l)].forward(acts.cat[ul]));
            below = &acts.dec[ul];
        }
        auto logits = layers_.back().forward(acts.dec[0]);
        acts.valid = true;
        return logits;
    }

    /// Accumulates into `grads`; returns the input gradient when
    /// `input_grad` is set (an empty tensor otherwise).
    BasicTensor<T> backward(const Activations& acts, const BasicTensor<T>& dlogits,
                            Gradients& grads, bool input_grad = true) const {
        if (!acts.valid) throw StateError("MiniUNet::backward called before forward");
        if (grads.size() != layers_.size()) throw ShapeError("gradient set does not match network");
        const int L = cfg_.levels;
        std::vector<BasicTensor<T>> d_enc(static_cast<std::size_t>(L + 1));
        BasicTensor<T> d_below, d_x;
        layers_.back().backward(acts.dec[0], dlogits, grads.back(), &d_below);
        for (int l = 0; l < L; ++l) {
            const auto ul = static_cast<std::size_t>(l);
            BasicTensor<T> d_cat;
            layers_[decoder_index(l)].backward(acts.cat[ul], relu_backward(acts.dec[ul], d_below),
                                              grads[decoder_index(l)], &d_cat);
            auto [d_up, d_skip] = concat_backward(d_cat, 2 * cfg_.width);
            d_enc[ul] = std::move(d_skip);
            d_below = upsample2x_backward(d_up);
        }
        const auto uL = static_cast<std::size_t>(L);
        layers_[bottleneck_index()].backward(acts.enc[uL], relu_backward(acts.bottleneck, d_below),
                                             grads[bottleneck_index()], &d_enc[uL]);
        for (int l = L; l >= 1; --l) {
            const auto ul = static_cast<std::size_t>(l);
            BasicTensor<T> d_prev;
            layers_[ul].backward(acts.enc[ul - 1], relu_backward(acts.enc[ul], d_enc[ul]), grads[ul], &d_prev);
            auto& acc = d_enc[ul - 1];
            for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += d_prev.data()[i];
        }
        layers_[0].backward(acts.x, relu_backward(acts.enc[0], d_enc[0]), grads[0], input_grad ? &d_x : nullptr);
        return d_x;
    }

private:
    std::size_t bottleneck_index() const { return static_cast<std::size_t>(cfg_.levels) + 1; }
    // Decoder at level l (0 = full resolution).
    std::size_t decoder_index(int l) const {
        return bottleneck_index() + static_cast<std::size_t>(cfg_.levels - l);
    }

    UNetConfig cfg_;
    std::vector<Conv2d<T>> layers_;
};

template <typename T>
struct LossResult {
    double loss = 0;
    BasicTensor<T> grad;
};

/// Mean binary cross-entropy on logits, stable form
/// max(z,0) - z*t + log(1 + exp(-|z|)); gradient (sigmoid(z) - t) / N.
template <typename T>
LossResult<T> bce_loss(const BasicTensor<T>& logits, const BasicTensor<T>& target) {
    if (!logits.same_shape(target)) throw ShapeError("bce_loss: shape mismatch");
    LossResult<T> r{0.0, BasicTensor<T>(logits.batch(), logits.channels(), logits.height(), logits.width())};
    const double inv_n = 1.0 / static_cast<double>(logits.size());
    double total = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double z = logits.data()[i], t = target.data()[i];
        total += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
        const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        r.grad.data()[i] = static_cast<T>((s - t) * inv_n);
    }
    r.loss = total * inv_n;
    return r;
}

/// Mean absolute error over the pixels where `region` (N,1,H,W) is set,
/// across all channels. Empty region: loss 0, zero gradient.
template <typename T>
LossResult<T> masked_l1_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target,
                             const BasicTensor<T>& region) {
    if (!pred.same_shape(target)) throw ShapeError("masked_l1_loss: shape mismatch");
    if (region.batch() != pred.batch() || region.channels() != 1 ||
        region.height() != pred.height() || region.width() != pred.width())
        throw ShapeError("masked_l1_loss: region shape mismatch");
    LossResult<T> r{0.0, BasicTensor<T>(pred.batch(), pred.channels(), pred.height(), pred.width())};
    double count = 0;
    for (auto v : region.data()) count += v > T{0} ? 1.0 : 0.0;
    count *= pred.channels();
    if (count == 0) return r;
    double total = 0;
    for (int n = 0; n < pred.batch(); ++n)
        for (int c = 0; c < pred.channels(); ++c)
            for (int y = 0; y < pred.height(); ++y)
                for (int x = 0; x < pred.width(); ++x) {
                    if (!(region(n, 0, y, x) > T{0})) continue;
                    const double d = static_cast<double>(pred(n, c, y, x)) - target(n, c, y, x);
                    total += std::abs(d);
                    r.grad(n, c, y, x) = static_cast<T>((d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / count);
                }
    r.loss = total / count;
    return r;
}

struct SGDConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 16;
    int iterations = 3000;
    std::uint64_t seed = 0;
};

/// SGD with heavy-ball momentum: v = mu*v + g; p -= lr*v.
template <typename T>
class SGD {
public:
    SGD(double lr, double momentum) : lr_(lr), momentum_(momentum) {
        if (!(lr > 0)) throw DomainError("learning rate must be positive");
    }

    void step(MiniUNet<T>& net, const typename MiniUNet<T>::Gradients& grads) {
        auto& layers = net.layers();
        if (velocity_.empty()) {
            for (const auto& l : layers) velocity_.push_back(l.zero_grad());
        }
        for (std::size_t i = 0; i < layers.size(); ++i) {
            update(layers[i].weight(), grads[i].weight, velocity_[i].weight);
            update(layers[i].bias(), grads[i].bias, velocity_[i].bias);
        }
    }

private:
    void update(std::vector<T>& p, const std::vector<T>& g, std::vector<T>& v) const {
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (momentum_ == 0.0) {
                p[k] -= static_cast<T>(lr_) * g[k];
            } else {
                v[k] = static_cast<T>(momentum_) * v[k] + g[k];
                p[k] -= static_cast<T>(lr_) * v[k];
            }
        }
    }

    double lr_;
    double momentum_;
    std::vector<ConvGrad<T>> velocity_;
};

}  // namespace deocc::nn
