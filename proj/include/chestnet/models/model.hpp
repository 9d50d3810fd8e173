#pragma once

#include <memory>

#include "chestnet/models/spec.hpp"
#include "chestnet/nn/activation.hpp"
#include "chestnet/nn/blocks.hpp"
#include "chestnet/nn/conv2d.hpp"
#include "chestnet/nn/dense.hpp"
#include "chestnet/nn/dropout.hpp"
#include "chestnet/nn/pooling.hpp"

namespace chestnet::models {

// An instantiated layer stack. Parameter names are "<layer index>.<param>",
// e.g. "0.weight" or "4.conv1.bias" inside blocks.
template <typename T>
class Model {
public:
    static Model build(const ModelSpec& spec, std::uint64_t seed) {
        validate_spec(spec);
        Model m;
        m.spec_ = spec;
        const auto dims = propagate_shapes(spec);
        ValueDims in{false, spec.input.c, spec.input.h, spec.input.w};
        for (std::size_t i = 0; i < spec.layers.size(); ++i) {
            m.layers_.push_back(instantiate(spec.layers[i], in, rng::mix(seed, rng::label("init"), i)));
            in = dims[i];
        }
        return m;
    }

    const ModelSpec& spec() const { return spec_; }
    ModelSpec& mutable_spec() { return spec_; }

    TensorT<T> forward(const TensorT<T>& x, bool train) {
        if (x.rank() != 4 || x.dim(1) != spec_.input.c || x.dim(2) != spec_.input.h ||
            x.dim(3) != spec_.input.w)
            throw ShapeError("model " + spec_.name + " expects Nx" + std::to_string(spec_.input.c) +
                             "x" + std::to_string(spec_.input.h) + "x" +
                             std::to_string(spec_.input.w) + " input, got " +
                             shape_string(x.shape()));
        TensorT<T> cur = x;
        for (auto& layer : layers_) cur = layer->forward(cur, train);
        return cur;
    }

    TensorT<T> backward(const TensorT<T>& grad_logits) {
        TensorT<T> g = grad_logits;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

    std::vector<nn::NamedParam<T>> params() {
        std::vector<nn::NamedParam<T>> out;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            layers_[i]->collect_params(std::to_string(i) + ".", out);
        return out;
    }

    void zero_grads() {
        for (auto& layer : layers_) layer->zero_grads();
    }

    std::size_t layer_count() const { return layers_.size(); }
    nn::Layer<T>& layer(std::size_t i) { return *layers_.at(i); }

    template <typename U>
    Model<U> cast() const {
        Model<U> other = Model<U>::build(spec_, 0);
        auto src = const_cast<Model*>(this)->params();
        auto dst = other.params();
        for (std::size_t i = 0; i < src.size(); ++i)
            *dst[i].value = src[i].value->template cast<U>();
        return other;
    }

private:
    static std::unique_ptr<nn::Layer<T>> instantiate(const LayerDesc& d, const ValueDims& in,
                                                     std::uint64_t seed) {
        if (d.kind == "conv2d")
            return std::make_unique<nn::Conv2d<T>>(in.c, d.out, d.k, d.s, d.p, seed);
        if (d.kind == "maxpool2d")
            return std::make_unique<nn::MaxPool2d<T>>(d.k, d.s, d.p);
        if (d.kind == "relu")
            return std::make_unique<nn::ReLU<T>>();
        if (d.kind == "fully_connected")
            return std::make_unique<nn::FullyConnected<T>>(in.features(), d.out, seed);
        if (d.kind == "dropout")
            return std::make_unique<nn::Dropout<T>>(d.rate, seed);
        if (d.kind == "flatten")
            return std::make_unique<nn::Flatten<T>>();
        if (d.kind == "global_avg_pool")
            return std::make_unique<nn::GlobalAvgPool<T>>();
        if (d.kind == "residual_block")
            return std::make_unique<nn::ResidualBlock<T>>(in.c, d.out, d.s, seed);
        if (d.kind == "inception_block")
            return std::make_unique<nn::InceptionBlock<T>>(
                in.c, nn::InceptionWidths{d.b1, d.b3r, d.b3, d.b5r, d.b5, d.pp}, seed);
        throw ShapeError("unknown layer kind '" + d.kind + "'");
    }

    ModelSpec spec_;
    std::vector<std::unique_ptr<nn::Layer<T>>> layers_;

    template <typename U>
    friend class Model;
};

} // namespace chestnet::models
