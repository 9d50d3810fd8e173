#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chestnet/core/errors.hpp"
#include "chestnet/core/gemm.hpp"
#include "chestnet/core/rng.hpp"

namespace chestnet {

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

inline std::size_t shape_volume(const Shape& s) {
    std::size_t total = 1;
    for (std::size_t d : s) {
        if (d == 0) throw ValueError("tensor dimension must be >= 1, got shape " + shape_string(s));
        total *= d;
    }
    return total;
}

// Canonical layout for image-like tensors: batch x channels x height x width.
struct Shape4 {
    std::size_t n = 1, c = 1, h = 1, w = 1;

    Shape as_shape() const { return {n, c, h, w}; }
    std::size_t volume() const { return n * c * h * w; }
};

// Dense row-major N-dimensional array. T is float for training and double
// for the tight-tolerance gradient-check mode. Ops return new tensors; a
// constructed tensor is safe to share read-only across threads.
template <typename T>
class TensorT {
public:
    using value_type = T;

    TensorT() = default;

    explicit TensorT(Shape shape)
        : shape_(std::move(shape)), data_(shape_volume(shape_), T(0)) {}

    TensorT(Shape shape, T fill)
        : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {}

    TensorT(Shape shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_volume(shape_) != data_.size())
            throw ValueError("data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_string(shape_));
    }

    static TensorT zeros(Shape shape) { return TensorT(std::move(shape)); }
    static TensorT full(Shape shape, T v) { return TensorT(std::move(shape), v); }

    static TensorT from_data(Shape shape, std::vector<T> data) {
        return TensorT(std::move(shape), std::move(data));
    }

    // Reproducible: the same (seed, shape) always yields the same tensor.
    static TensorT uniform(Shape shape, T lo, T hi, std::uint64_t seed) {
        TensorT t(std::move(shape));
        rng::Stream stream(seed);
        for (T& v : t.data_) v = static_cast<T>(stream.uniform(lo, hi));
        return t;
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& flat() { return data_; }
    const std::vector<T>& flat() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    T operator[](std::size_t i) const { return data_[i]; }

    T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    T at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
        return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    T at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }

    bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (T v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    TensorT<U> cast() const {
        std::vector<U> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return TensorT<U>(shape_, std::move(out));
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

namespace detail {
template <typename T>
void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
}
} // namespace detail

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    detail::require_same_shape(a, b, "add");
    TensorT<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
    detail::require_same_shape(a, b, "sub");
    TensorT<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
    detail::require_same_shape(a, b, "mul");
    TensorT<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

template <typename T>
TensorT<T> scale(const TensorT<T>& a, T alpha) {
    TensorT<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * alpha;
    return out;
}

template <typename T>
TensorT<T> add_scalar(const TensorT<T>& a, T v) {
    TensorT<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + v;
    return out;
}

// max(x, 0) per element.
template <typename T>
TensorT<T> max0(const TensorT<T>& a) {
    TensorT<T> out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > T(0) ? a[i] : T(0);
    return out;
}

template <typename T>
TensorT<T> operator+(const TensorT<T>& a, const TensorT<T>& b) { return add(a, b); }
template <typename T>
TensorT<T> operator-(const TensorT<T>& a, const TensorT<T>& b) { return sub(a, b); }

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw ShapeError("matmul: expects rank-2 tensors, got " + shape_string(a.shape()) +
                         " and " + shape_string(b.shape()));
    if (a.dim(1) != b.dim(0))
        throw ShapeError("matmul: inner dimensions disagree, " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
    TensorT<T> out({a.dim(0), b.dim(1)});
    detail::gemm_nn(a.dim(0), a.dim(1), b.dim(1), a.data(), b.data(), out.data());
    return out;
}

// Preserves flat row-major order.
template <typename T>
TensorT<T> reshape(const TensorT<T>& a, Shape new_shape) {
    if (shape_volume(new_shape) != a.size())
        throw ShapeError("reshape: element count mismatch, " + shape_string(a.shape()) +
                         " -> " + shape_string(new_shape));
    return TensorT<T>(std::move(new_shape), a.flat());
}

template <typename T>
TensorT<T> transpose2d(const TensorT<T>& a) {
    if (a.rank() != 2)
        throw ShapeError("transpose2d: expects rank-2 tensor, got " + shape_string(a.shape()));
    TensorT<T> out({a.dim(1), a.dim(0)});
    detail::transpose(a.dim(0), a.dim(1), a.data(), out.data());
    return out;
}

namespace detail {
template <typename T, typename Fold>
TensorT<T> reduce_axis(const TensorT<T>& a, std::size_t axis, Fold fold) {
    if (axis >= a.rank())
        throw ValueError("reduction axis " + std::to_string(axis) + " out of range for " +
                         shape_string(a.shape()));
    Shape out_shape;
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (i != axis) out_shape.push_back(a.dim(i));
    if (out_shape.empty()) out_shape.push_back(1);

    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= a.dim(i);
    for (std::size_t i = axis + 1; i < a.rank(); ++i) inner *= a.dim(i);
    const std::size_t n = a.dim(axis);

    TensorT<T> out(out_shape);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t in = 0; in < inner; ++in) {
            T acc = T(0);
            // Fixed left-to-right order along the reduced axis.
            for (std::size_t j = 0; j < n; ++j) acc += a[(o * n + j) * inner + in];
            out[o * inner + in] = fold(acc, n);
        }
    return out;
}
} // namespace detail

template <typename T>
TensorT<T> sum_axis(const TensorT<T>& a, std::size_t axis) {
    return detail::reduce_axis(a, axis, [](T acc, std::size_t) { return acc; });
}

template <typename T>
TensorT<T> mean_axis(const TensorT<T>& a, std::size_t axis) {
    return detail::reduce_axis(a, axis, [](T acc, std::size_t n) { return acc / static_cast<T>(n); });
}

} // namespace chestnet
