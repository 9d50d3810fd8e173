#pragma once

#include <cmath>

#include "chestnet/nn/layer.hpp"

namespace chestnet::nn {

// Affine map out = x W^T + b with weights [out_features, in_features].
template <typename T>
class FullyConnected final : public Layer<T> {
public:
    FullyConnected(std::size_t in_features, std::size_t out_features, std::uint64_t init_seed)
        : in_(in_features), out_(out_features) {
        if (in_ == 0 || out_ == 0)
            throw ValueError("fully_connected: feature counts must be >= 1");
        const T bound = static_cast<T>(std::sqrt(6.0 / static_cast<double>(in_)));
        weight = TensorT<T>::uniform({out_, in_}, -bound, bound, init_seed);
        bias = TensorT<T>({out_});
        weight_grad = TensorT<T>({out_, in_});
        bias_grad = TensorT<T>({out_});
    }

    std::string_view kind() const override { return "fully_connected"; }

    TensorT<T> forward(const TensorT<T>& x, bool /*train*/) override {
        if (x.rank() != 2)
            throw ShapeError("fully_connected: expects NxD input, got " + shape_string(x.shape()));
        if (x.dim(1) != in_)
            throw ShapeError("fully_connected: input has " + std::to_string(x.dim(1)) +
                             " features, layer expects " + std::to_string(in_));
        input_ = x;
        const std::size_t n = x.dim(0);
        TensorT<T> wt = transpose2d(weight); // [in, out]
        TensorT<T> out({n, out_});
        chestnet::detail::gemm_nn(n, in_, out_, x.data(), wt.data(), out.data());
        for (std::size_t r = 0; r < n; ++r) {
            T* row = out.data() + r * out_;
            for (std::size_t j = 0; j < out_; ++j) row[j] += bias[j];
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        if (grad_out.rank() != 2 || grad_out.dim(0) != input_.dim(0) || grad_out.dim(1) != out_)
            throw ShapeError("fully_connected: grad shape " + shape_string(grad_out.shape()) +
                             " does not match cached forward");
        const std::size_t n = input_.dim(0);
        // dW += gout^T x ; db += column sums ; dX = gout W
        chestnet::detail::gemm_tn(out_, n, in_, grad_out.data(), input_.data(),
                                  weight_grad.data(), /*accumulate=*/true);
        for (std::size_t r = 0; r < n; ++r) {
            const T* row = grad_out.data() + r * out_;
            for (std::size_t j = 0; j < out_; ++j) bias_grad[j] += row[j];
        }
        TensorT<T> grad_in({n, in_});
        chestnet::detail::gemm_nn(n, out_, in_, grad_out.data(), weight.data(), grad_in.data());
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

    std::size_t in_features() const { return in_; }
    std::size_t out_features() const { return out_; }

    TensorT<T> weight, bias;
    TensorT<T> weight_grad, bias_grad;

private:
    std::size_t in_, out_;
    TensorT<T> input_;
};

// NxCxHxW -> Nx(C*H*W), preserving row-major order.
template <typename T>
class Flatten final : public Layer<T> {
public:
    std::string_view kind() const override { return "flatten"; }

    TensorT<T> forward(const TensorT<T>& x, bool /*train*/) override {
        if (x.rank() != 4)
            throw ShapeError("flatten: expects NxCxHxW input, got " + shape_string(x.shape()));
        in_shape_ = x.shape();
        return reshape(x, {x.dim(0), x.size() / x.dim(0)});
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        return reshape(grad_out, in_shape_);
    }

private:
    Shape in_shape_;
};

} // namespace chestnet::nn
