#pragma once

#include <cmath>

#include "chestnet/nn/layer.hpp"

namespace chestnet::nn {

namespace detail {

// Unrolls one sample's receptive fields into a [C*k*k, H'*W'] matrix so the
// convolution becomes a single matrix product. Out-of-range taps are zero.
template <typename T>
void im2col(const T* in, std::size_t c, std::size_t h, std::size_t w,
            std::size_t k, std::size_t s, std::size_t p,
            std::size_t oh, std::size_t ow, T* col) {
    for (std::size_t ch = 0; ch < c; ++ch) {
        const T* plane = in + ch * h * w;
        for (std::size_t u = 0; u < k; ++u)
            for (std::size_t v = 0; v < k; ++v) {
                T* row = col + ((ch * k + u) * k + v) * oh * ow;
                for (std::size_t i = 0; i < oh; ++i) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(i * s + u) -
                                              static_cast<std::ptrdiff_t>(p);
                    T* dst = row + i * ow;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
                        for (std::size_t j = 0; j < ow; ++j) dst[j] = T(0);
                        continue;
                    }
                    const T* src = plane + static_cast<std::size_t>(iy) * w;
                    for (std::size_t j = 0; j < ow; ++j) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(j * s + v) -
                                                  static_cast<std::ptrdiff_t>(p);
                        dst[j] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w))
                                     ? T(0)
                                     : src[static_cast<std::size_t>(ix)];
                    }
                }
            }
    }
}

// Scatter-add inverse of im2col.
template <typename T>
void col2im(const T* col, std::size_t c, std::size_t h, std::size_t w,
            std::size_t k, std::size_t s, std::size_t p,
            std::size_t oh, std::size_t ow, T* in) {
    for (std::size_t ch = 0; ch < c; ++ch) {
        T* plane = in + ch * h * w;
        for (std::size_t u = 0; u < k; ++u)
            for (std::size_t v = 0; v < k; ++v) {
                const T* row = col + ((ch * k + u) * k + v) * oh * ow;
                for (std::size_t i = 0; i < oh; ++i) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(i * s + u) -
                                              static_cast<std::ptrdiff_t>(p);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                    T* dst = plane + static_cast<std::size_t>(iy) * w;
                    const T* src = row + i * ow;
                    for (std::size_t j = 0; j < ow; ++j) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(j * s + v) -
                                                  static_cast<std::ptrdiff_t>(p);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(w))
                            dst[static_cast<std::size_t>(ix)] += src[j];
                    }
                }
            }
    }
}

} // namespace detail

// 2-D convolution, weights [out, in, k, k], bias [out], zero padding.
template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(std::size_t in_channels, std::size_t out_channels,
           std::size_t k, std::size_t s, std::size_t p, std::uint64_t init_seed)
        : in_(in_channels), out_(out_channels), k_(k), s_(s), p_(p) {
        if (in_ == 0 || out_ == 0 || k_ == 0 || s_ == 0)
            throw ValueError("conv2d: channels, kernel and stride must be >= 1");
        const T bound = static_cast<T>(std::sqrt(6.0 / static_cast<double>(in_ * k_ * k_)));
        weight = TensorT<T>::uniform({out_, in_, k_, k_}, -bound, bound, init_seed);
        bias = TensorT<T>({out_});
        weight_grad = TensorT<T>({out_, in_, k_, k_});
        bias_grad = TensorT<T>({out_});
    }

    std::string_view kind() const override { return "conv2d"; }

    TensorT<T> forward(const TensorT<T>& x, bool /*train*/) override {
        if (x.rank() != 4)
            throw ShapeError("conv2d: expects NxCxHxW input, got " + shape_string(x.shape()));
        if (x.dim(1) != in_)
            throw ShapeError("conv2d: input has " + std::to_string(x.dim(1)) +
                             " channels, layer expects " + std::to_string(in_));
        const std::size_t n = x.dim(0), h = x.dim(2), w = x.dim(3);
        const std::size_t oh = shape_math::conv_out(h, k_, s_, p_);
        const std::size_t ow = shape_math::conv_out(w, k_, s_, p_);
        const std::size_t patch = in_ * k_ * k_;

        in_shape_ = {n, in_, h, w};
        cols_ = TensorT<T>({n, patch, oh * ow});
        TensorT<T> out({n, out_, oh, ow});
        for (std::size_t b = 0; b < n; ++b) {
            T* col = cols_.data() + b * patch * oh * ow;
            detail::im2col(x.data() + b * in_ * h * w, in_, h, w, k_, s_, p_, oh, ow, col);
            T* dst = out.data() + b * out_ * oh * ow;
            chestnet::detail::gemm_nn(out_, patch, oh * ow, weight.data(), col, dst);
            for (std::size_t f = 0; f < out_; ++f) {
                const T bv = bias[f];
                T* row = dst + f * oh * ow;
                for (std::size_t i = 0; i < oh * ow; ++i) row[i] += bv;
            }
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        if (cols_.empty())
            throw Error("conv2d: backward without a cached forward");
        const std::size_t n = in_shape_.n, h = in_shape_.h, w = in_shape_.w;
        const std::size_t oh = grad_out.dim(2), ow = grad_out.dim(3);
        const std::size_t patch = in_ * k_ * k_;
        if (grad_out.rank() != 4 || grad_out.dim(0) != n || grad_out.dim(1) != out_ ||
            cols_.dim(2) != oh * ow)
            throw ShapeError("conv2d: grad shape " + shape_string(grad_out.shape()) +
                             " does not match cached forward");

        TensorT<T> grad_in(in_shape_.as_shape());
        TensorT<T> col_t({oh * ow, patch});
        TensorT<T> grad_col({patch, oh * ow});
        for (std::size_t b = 0; b < n; ++b) {
            const T* gout = grad_out.data() + b * out_ * oh * ow;
            const T* col = cols_.data() + b * patch * oh * ow;
            // dW += gout * col^T
            chestnet::detail::transpose(patch, oh * ow, col, col_t.data());
            chestnet::detail::gemm_nn(out_, oh * ow, patch, gout, col_t.data(),
                                      weight_grad.data(), /*accumulate=*/true);
            for (std::size_t f = 0; f < out_; ++f) {
                T acc = T(0);
                const T* row = gout + f * oh * ow;
                for (std::size_t i = 0; i < oh * ow; ++i) acc += row[i];
                bias_grad[f] += acc;
            }
            // dX = col2im(W^T * gout)
            chestnet::detail::gemm_tn(patch, out_, oh * ow, weight.data(), gout, grad_col.data());
            detail::col2im(grad_col.data(), in_, h, w, k_, s_, p_, oh, ow,
                           grad_in.data() + b * in_ * h * w);
        }
        return grad_in;
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
        out.push_back({prefix + "weight", &weight, &weight_grad, this->frozen});
        out.push_back({prefix + "bias", &bias, &bias_grad, this->frozen});
    }

    void zero_grads() override {
        std::fill(weight_grad.flat().begin(), weight_grad.flat().end(), T(0));
        std::fill(bias_grad.flat().begin(), bias_grad.flat().end(), T(0));
    }

    std::size_t in_channels() const { return in_; }
    std::size_t out_channels() const { return out_; }
    std::size_t kernel() const { return k_; }
    std::size_t stride() const { return s_; }
    std::size_t padding() const { return p_; }

    TensorT<T> weight, bias;
    TensorT<T> weight_grad, bias_grad;

private:
    std::size_t in_, out_, k_, s_, p_;
    Shape4 in_shape_;
    TensorT<T> cols_; // cached im2col matrices, one per sample
};

} // namespace chestnet::nn
