#pragma once

#include "chestnet/nn/layer.hpp"

namespace chestnet::nn {

// Elementwise max(x, 0). Backward passes gradient where the cached input was
// strictly positive (subgradient 0 at exactly 0).
template <typename T>
class ReLU final : public Layer<T> {
public:
    std::string_view kind() const override { return "relu"; }

    TensorT<T> forward(const TensorT<T>& x, bool /*train*/) override {
        input_ = x;
        return max0(x);
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        detail::require_same_shape(grad_out, input_, "relu backward");
        TensorT<T> grad_in(input_.shape());
        for (std::size_t i = 0; i < input_.size(); ++i)
            grad_in[i] = input_[i] > T(0) ? grad_out[i] : T(0);
        return grad_in;
    }

private:
    TensorT<T> input_;
};

} // namespace chestnet::nn
