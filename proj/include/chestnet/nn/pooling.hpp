#pragma once

#include <limits>

#include "chestnet/nn/layer.hpp"

namespace chestnet::nn {

// Max pooling. The argmax position of every window is recorded on forward;
// backward routes each gradient there (first window position wins ties,
// scanning the window in row-major order).
template <typename T>
class MaxPool2d final : public Layer<T> {
public:
    MaxPool2d(std::size_t k, std::size_t s, std::size_t p = 0) : k_(k), s_(s), p_(p) {
        if (k_ == 0 || s_ == 0) throw ValueError("maxpool2d: window and stride must be >= 1");
        if (p_ >= k_) throw ValueError("maxpool2d: padding must be smaller than the window");
    }

    std::string_view kind() const override { return "maxpool2d"; }

    TensorT<T> forward(const TensorT<T>& x, bool /*train*/) override {
        if (x.rank() != 4)
            throw ShapeError("maxpool2d: expects NxCxHxW input, got " + shape_string(x.shape()));
        const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        const std::size_t oh = shape_math::conv_out(h, k_, s_, p_);
        const std::size_t ow = shape_math::conv_out(w, k_, s_, p_);

        in_shape_ = {n, c, h, w};
        argmax_.assign(n * c * oh * ow, 0);
        TensorT<T> out({n, c, oh, ow});
        std::size_t oidx = 0;
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t ch = 0; ch < c; ++ch) {
                const T* plane = x.data() + (b * c + ch) * h * w;
                for (std::size_t i = 0; i < oh; ++i)
                    for (std::size_t j = 0; j < ow; ++j, ++oidx) {
                        T best = -std::numeric_limits<T>::infinity();
                        std::size_t best_at = 0;
                        for (std::size_t u = 0; u < k_; ++u) {
                            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(i * s_ + u) -
                                                      static_cast<std::ptrdiff_t>(p_);
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t v = 0; v < k_; ++v) {
                                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(j * s_ + v) -
                                                          static_cast<std::ptrdiff_t>(p_);
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                                const T val = plane[static_cast<std::size_t>(iy) * w +
                                                    static_cast<std::size_t>(ix)];
                                if (val > best) {
                                    best = val;
                                    best_at = static_cast<std::size_t>(iy) * w +
                                              static_cast<std::size_t>(ix);
                                }
                            }
                        }
                        out[oidx] = best;
                        argmax_[oidx] = best_at;
                    }
            }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        if (argmax_.size() != grad_out.size())
            throw ShapeError("maxpool2d: grad shape " + shape_string(grad_out.shape()) +
                             " does not match cached forward");
        const std::size_t c = in_shape_.c, h = in_shape_.h, w = in_shape_.w;
        const std::size_t per_plane = grad_out.dim(2) * grad_out.dim(3);
        TensorT<T> grad_in(in_shape_.as_shape());
        for (std::size_t plane = 0; plane < in_shape_.n * c; ++plane) {
            T* dst = grad_in.data() + plane * h * w;
            const T* src = grad_out.data() + plane * per_plane;
            const std::size_t* amax = argmax_.data() + plane * per_plane;
            for (std::size_t i = 0; i < per_plane; ++i) dst[amax[i]] += src[i];
        }
        return grad_in;
    }

    std::size_t window() const { return k_; }
    std::size_t stride() const { return s_; }
    std::size_t padding() const { return p_; }

private:
    std::size_t k_, s_, p_;
    Shape4 in_shape_;
    std::vector<std::size_t> argmax_;
};

// Averages each channel plane to a single value: NxCxHxW -> NxC.
template <typename T>
class GlobalAvgPool final : public Layer<T> {
public:
    std::string_view kind() const override { return "global_avg_pool"; }

    TensorT<T> forward(const TensorT<T>& x, bool /*train*/) override {
        if (x.rank() != 4)
            throw ShapeError("global_avg_pool: expects NxCxHxW input, got " +
                             shape_string(x.shape()));
        in_shape_ = {x.dim(0), x.dim(1), x.dim(2), x.dim(3)};
        const std::size_t plane = in_shape_.h * in_shape_.w;
        TensorT<T> out({in_shape_.n, in_shape_.c});
        for (std::size_t p = 0; p < in_shape_.n * in_shape_.c; ++p) {
            const T* src = x.data() + p * plane;
            T acc = T(0);
            for (std::size_t i = 0; i < plane; ++i) acc += src[i];
            out[p] = acc / static_cast<T>(plane);
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        if (grad_out.size() != in_shape_.n * in_shape_.c)
            throw ShapeError("global_avg_pool: grad does not match cached forward");
        const std::size_t plane = in_shape_.h * in_shape_.w;
        const T inv = T(1) / static_cast<T>(plane);
        TensorT<T> grad_in(in_shape_.as_shape());
        for (std::size_t p = 0; p < in_shape_.n * in_shape_.c; ++p) {
            const T g = grad_out[p] * inv;
            T* dst = grad_in.data() + p * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = g;
        }
        return grad_in;
    }

private:
    Shape4 in_shape_;
};

} // namespace chestnet::nn
