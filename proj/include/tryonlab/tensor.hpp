// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "tryonlab/error.hpp"

namespace tryonlab {

/// Dense row-major tensor. Image planes are stored CHW; per-channel rows are
/// contiguous so a channel can be viewed as an H*W block.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape, T fill = T(0)) : shape_(std::move(shape)) {
        data_.assign(numel_of(shape_), fill);
    }
    Tensor(std::initializer_list<int> shape, T fill = T(0))
        : Tensor(std::vector<int>(shape), fill) {}

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, T v) { return Tensor(std::move(shape), v); }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // CHW accessors.
    T& at(int c, int y, int x) {
        return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
    }
    const T& at(int c, int y, int x) const {
        return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
    }
    // HW accessors.
    T& at(int y, int x) { return data_[static_cast<std::size_t>(y) * shape_[1] + x]; }
    const T& at(int y, int x) const { return data_[static_cast<std::size_t>(y) * shape_[1] + x]; }

    T* channel(int c) { return data_.data() + static_cast<std::size_t>(c) * plane(); }
    const T* channel(int c) const { return data_.data() + static_cast<std::size_t>(c) * plane(); }
    /// Elements per channel of a CHW tensor.
    std::size_t plane() const { return static_cast<std::size_t>(shape_[1]) * shape_[2]; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

    bool all_finite() const {
        for (const T& v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    static std::size_t numel_of(const std::vector<int>& shape) {
        std::size_t n = 1;
        for (int d : shape) {
            if (d < 0) raise(ErrorCode::ShapeMismatch, "negative tensor dimension");
            n *= static_cast<std::size_t>(d);
        }
        return shape.empty() ? 0 : n;
    }

private:
    std::vector<int> shape_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* where) {
    if (!a.same_shape(b)) raise(ErrorCode::ShapeMismatch, where);
}

/// Stack CHW blocks along the channel axis; all inputs must share H and W.
template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts) {
    if (parts.empty()) raise(ErrorCode::EmptyInput, "concat_channels: no inputs");
    const int h = parts[0]->dim(1);
    const int w = parts[0]->dim(2);
    int c_total = 0;
    for (const auto* p : parts) {
        if (p->ndim() != 3 || p->dim(1) != h || p->dim(2) != w)
            raise(ErrorCode::ShapeMismatch, "concat_channels: H/W mismatch");
        c_total += p->dim(0);
    }
    Tensor<T> out({c_total, h, w});
    T* dst = out.data();
    for (const auto* p : parts) {
        std::copy(p->data(), p->data() + p->numel(), dst);
        dst += p->numel();
    }
    return out;
}

} // namespace tryonlab
