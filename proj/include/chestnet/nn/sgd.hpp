#pragma once

#include "chestnet/nn/layer.hpp"

namespace chestnet::nn {

struct SgdConfig {
    double learning_rate = 0.001;
    double momentum = 0.0; // [0,1); 0 = plain SGD

    void validate() const {
        if (!(learning_rate >= 0.0))
            throw ValueError("sgd: learning rate must be >= 0");
        if (!(momentum >= 0.0 && momentum < 1.0))
            throw ValueError("sgd: momentum must be in [0,1)");
    }
};

// w <- w - lr * v with v = momentum * v_prev + g. Frozen parameters are
// left bit-identical.
template <typename T>
class Sgd {
public:
    explicit Sgd(SgdConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    void step(std::vector<NamedParam<T>>& params) {
        const T lr = static_cast<T>(cfg_.learning_rate);
        const T mu = static_cast<T>(cfg_.momentum);
        if (cfg_.momentum > 0.0 && velocity_.empty()) {
            velocity_.reserve(params.size());
            for (const auto& p : params) velocity_.emplace_back(p.value->shape());
        }
        if (cfg_.momentum > 0.0 && velocity_.size() != params.size())
            throw ValueError("sgd: parameter list changed between steps");

        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i];
            if (p.frozen) continue;
            if (!p.value->same_shape(*p.grad))
                throw ShapeError("sgd: gradient shape mismatch for " + p.name);
            T* w = p.value->data();
            const T* g = p.grad->data();
            const std::size_t n = p.value->size();
            if (cfg_.momentum == 0.0) {
                for (std::size_t j = 0; j < n; ++j) w[j] -= lr * g[j];
            } else {
                T* v = velocity_[i].data();
                for (std::size_t j = 0; j < n; ++j) {
                    v[j] = mu * v[j] + g[j];
                    w[j] -= lr * v[j];
                }
            }
        }
    }

    const SgdConfig& config() const { return cfg_; }

private:
    SgdConfig cfg_;
    std::vector<TensorT<T>> velocity_;
};

} // namespace chestnet::nn
