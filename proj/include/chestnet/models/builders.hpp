#pragma once

#include "chestnet/models/spec.hpp"

namespace chestnet::models {

namespace detail {

inline LayerDesc conv(std::size_t out, std::size_t k, std::size_t s, std::size_t p) {
    LayerDesc d; d.kind = "conv2d"; d.out = out; d.k = k; d.s = s; d.p = p; return d;
}
inline LayerDesc pool(std::size_t k, std::size_t s, std::size_t p = 0) {
    LayerDesc d; d.kind = "maxpool2d"; d.k = k; d.s = s; d.p = p; return d;
}
inline LayerDesc relu() { LayerDesc d; d.kind = "relu"; return d; }
inline LayerDesc fc(std::size_t out) { LayerDesc d; d.kind = "fully_connected"; d.out = out; return d; }
inline LayerDesc dropout(double rate) { LayerDesc d; d.kind = "dropout"; d.rate = rate; return d; }
inline LayerDesc flatten() { LayerDesc d; d.kind = "flatten"; return d; }
inline LayerDesc gap() { LayerDesc d; d.kind = "global_avg_pool"; return d; }
inline LayerDesc residual(std::size_t out, std::size_t s) {
    LayerDesc d; d.kind = "residual_block"; d.out = out; d.s = s; return d;
}
inline LayerDesc inception(std::size_t b1, std::size_t b3r, std::size_t b3,
                           std::size_t b5r, std::size_t b5, std::size_t pp) {
    LayerDesc d; d.kind = "inception_block";
    d.b1 = b1; d.b3r = b3r; d.b3 = b3; d.b5r = b5r; d.b5 = b5; d.pp = pp; return d;
}

} // namespace detail

// Six conv->ReLU->maxpool(3,2) stages with filter counts 32/64/128/256/512/
// 1024 and kernels 8/3/5/5/5/5 ("same" padding, the pools alone downsample),
// then flatten and one FC to the class logits. At the native 299 input the
// spatial trace is 299 -> 149 -> 74 -> 36 -> 17 -> 8 -> 3. Small input-size
// overrides drop a trailing pool once the running size is below the window.
inline ModelSpec build_paper_cnn(std::size_t input_channels = 1, std::size_t input_size = 299,
                                 std::size_t classes = 4) {
    using namespace detail;
    ModelSpec spec;
    spec.name = "paper-cnn";
    spec.input = {input_channels, input_size, input_size};
    spec.classes = classes;

    static constexpr std::pair<std::size_t, std::size_t> stages[] = {
        {32, 8}, {64, 3}, {128, 5}, {256, 5}, {512, 5}, {1024, 5}};
    std::size_t h = input_size;
    for (auto [filters, k] : stages) {
        spec.layers.push_back(conv(filters, k, 1, k / 2));
        h = nn::shape_math::conv_out(h, k, 1, k / 2);
        spec.layers.push_back(relu());
        if (h >= 3) {
            spec.layers.push_back(pool(3, 2));
            h = nn::shape_math::conv_out(h, 3, 2, 0);
        }
    }
    spec.layers.push_back(flatten());
    spec.layers.push_back(fc(classes));
    validate_spec(spec);
    return spec;
}

// Five convs + three FCs (8 weighted layers) following the classic pattern
// at reduced width; 227x227x3 input, trace 227 -> 55 -> 27 -> 13 -> 6.
inline ModelSpec build_mini_alexnet(std::size_t input_size = 227, std::size_t classes = 4) {
    using namespace detail;
    ModelSpec spec;
    spec.name = "mini-alexnet";
    spec.input = {3, input_size, input_size};
    spec.classes = classes;

    std::size_t h = input_size;
    auto add_conv = [&](std::size_t f, std::size_t k, std::size_t s, std::size_t p) {
        spec.layers.push_back(conv(f, k, s, p));
        h = nn::shape_math::conv_out(h, k, s, p);
        spec.layers.push_back(relu());
    };
    auto add_pool = [&] {
        if (h >= 3) {
            spec.layers.push_back(pool(3, 2));
            h = nn::shape_math::conv_out(h, 3, 2, 0);
        }
    };
    add_conv(16, 11, 4, 0);
    add_pool();
    add_conv(32, 5, 1, 2);
    add_pool();
    add_conv(48, 3, 1, 1);
    add_conv(48, 3, 1, 1);
    add_conv(32, 3, 1, 1);
    add_pool();
    spec.layers.push_back(flatten());
    spec.layers.push_back(fc(256));
    spec.layers.push_back(relu());
    spec.layers.push_back(dropout(0.5));
    spec.layers.push_back(fc(128));
    spec.layers.push_back(relu());
    spec.layers.push_back(dropout(0.5));
    spec.layers.push_back(fc(classes));
    validate_spec(spec);
    return spec;
}

// 18 weighted layers: a 7x7 stride-2 stem, four stages of two residual
// blocks at widths 8/16/32/64 (stages 2-4 open with a stride-2 block and
// projection skip), global average pool, FC head.
// Trace at 224: 224 -> 112 -> 56 -> 56 -> 28 -> 14 -> 7.
inline ModelSpec build_mini_resnet(std::size_t input_channels = 3, std::size_t input_size = 224,
                                   std::size_t classes = 4) {
    using namespace detail;
    ModelSpec spec;
    spec.name = "mini-resnet";
    spec.input = {input_channels, input_size, input_size};
    spec.classes = classes;
    spec.layers.push_back(conv(8, 7, 2, 3));
    spec.layers.push_back(relu());
    spec.layers.push_back(pool(3, 2, 1));
    spec.layers.push_back(residual(8, 1));
    spec.layers.push_back(residual(8, 1));
    spec.layers.push_back(residual(16, 2));
    spec.layers.push_back(residual(16, 1));
    spec.layers.push_back(residual(32, 2));
    spec.layers.push_back(residual(32, 1));
    spec.layers.push_back(residual(64, 2));
    spec.layers.push_back(residual(64, 1));
    spec.layers.push_back(gap());
    spec.layers.push_back(fc(classes));
    validate_spec(spec);
    return spec;
}

// A stride-2 stem then two inception blocks (branch widths 8 / 8->12 / 4->8 /
// pool->8, 36 channels out of each), global average pool, FC head.
inline ModelSpec build_mini_inception(std::size_t input_channels = 3, std::size_t input_size = 299,
                                      std::size_t classes = 4) {
    using namespace detail;
    ModelSpec spec;
    spec.name = "mini-inception";
    spec.input = {input_channels, input_size, input_size};
    spec.classes = classes;
    spec.layers.push_back(conv(8, 3, 2, 0));
    std::size_t h = nn::shape_math::conv_out(input_size, 3, 2, 0);
    spec.layers.push_back(relu());
    if (h >= 3) spec.layers.push_back(pool(3, 2));
    spec.layers.push_back(inception(8, 8, 12, 4, 8, 8));
    spec.layers.push_back(inception(8, 8, 12, 4, 8, 8));
    spec.layers.push_back(gap());
    spec.layers.push_back(fc(classes));
    validate_spec(spec);
    return spec;
}

// CLI name registry. Channel defaults: the Table 1 CNN reads grayscale CXR;
// the three pretrained-style skeletons keep their 3-channel input contracts.
inline ModelSpec build_model_spec(const std::string& name, std::size_t input_size = 0,
                                  std::size_t classes = 4) {
    if (name == "paper-cnn") return build_paper_cnn(1, input_size ? input_size : 299, classes);
    if (name == "mini-alexnet") return build_mini_alexnet(input_size ? input_size : 227, classes);
    if (name == "mini-resnet") return build_mini_resnet(3, input_size ? input_size : 224, classes);
    if (name == "mini-inception")
        return build_mini_inception(3, input_size ? input_size : 299, classes);
    throw ValueError("unknown model '" + name +
                     "' (expected paper-cnn|mini-alexnet|mini-resnet|mini-inception)");
}

} // namespace chestnet::models
