#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "deocc/errors.hpp"

namespace deocc {

/// Dense NCHW array, contiguous row-major.
template <typename T>
class BasicTensor {
public:
    BasicTensor() = default;
    BasicTensor(int n, int c, int h, int w, T value = T{0})
        : shape_{n, c, h, w},
          data_(static_cast<std::size_t>(n) * c * h * w, value) {
        if (n < 0 || c < 0 || h < 0 || w < 0) throw ShapeError("negative tensor dimension");
    }

    int batch() const { return shape_[0]; }
    int channels() const { return shape_[1]; }
    int height() const { return shape_[2]; }
    int width() const { return shape_[3]; }
    const std::array<int, 4>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t plane_size() const { return static_cast<std::size_t>(shape_[2]) * shape_[3]; }
    std::size_t sample_size() const { return plane_size() * shape_[1]; }

    T& operator()(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
    T operator()(int n, int c, int y, int x) const { return data_[offset(n, c, y, x)]; }

    std::span<T> sample(int n) {
        return {data_.data() + sample_size() * static_cast<std::size_t>(n), sample_size()};
    }
    std::span<const T> sample(int n) const {
        return {data_.data() + sample_size() * static_cast<std::size_t>(n), sample_size()};
    }
    std::span<T> plane(int n, int c) {
        return {data_.data() + offset(n, c, 0, 0), plane_size()};
    }
    std::span<const T> plane(int n, int c) const {
        return {data_.data() + offset(n, c, 0, 0), plane_size()};
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const BasicTensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
    }
    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    template <typename U>
    BasicTensor<U> cast() const {
        BasicTensor<U> out(shape_[0], shape_[1], shape_[2], shape_[3]);
        std::transform(data_.begin(), data_.end(), out.data().begin(),
                       [](T v) { return static_cast<U>(v); });
        return out;
    }

    bool operator==(const BasicTensor&) const = default;

private:
    std::size_t offset(int n, int c, int y, int x) const {
        return ((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x;
    }

    std::array<int, 4> shape_{0, 0, 0, 0};
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

}  // namespace deocc
