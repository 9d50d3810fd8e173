#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "chestnet/core/tensor.hpp"

namespace chestnet::nn {

template <typename T>
struct NamedParam {
    std::string name;
    TensorT<T>* value = nullptr;
    TensorT<T>* grad = nullptr;
    bool frozen = false;
};

// A differentiable layer. forward(train=true) caches whatever the matching
// backward needs (inputs, argmax indices, dropout masks); the cache is
// consumed by the next backward, so one instance serves one worker at a time.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string_view kind() const = 0;
    virtual TensorT<T> forward(const TensorT<T>& x, bool train) = 0;
    virtual TensorT<T> backward(const TensorT<T>& grad_out) = 0;

    virtual void collect_params(const std::string& /*prefix*/,
                                std::vector<NamedParam<T>>& /*out*/) {}
    virtual void zero_grads() {}

    // Frozen layers are skipped by the optimizer (transfer-learning contract).
    bool frozen = false;
};

namespace shape_math {
// floor((n + 2p - k) / s) + 1, the conv/pool output-size rule.
inline std::size_t conv_out(std::size_t n, std::size_t k, std::size_t s, std::size_t p) {
    if (n + 2 * p < k)
        throw ShapeError("window " + std::to_string(k) + " larger than padded input " +
                         std::to_string(n + 2 * p));
    return (n + 2 * p - k) / s + 1;
}
} // namespace shape_math

} // namespace chestnet::nn
