#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chestnet/core/errors.hpp"
#include "chestnet/nn/layer.hpp"

namespace chestnet::models {

// Declarative layer descriptor; channel/feature inputs are derived by shape
// propagation, so a descriptor only stores what the builder chose.
struct LayerDesc {
    std::string kind;            // conv2d | maxpool2d | relu | fully_connected |
                                 // dropout | flatten | global_avg_pool |
                                 // residual_block | inception_block
    std::size_t out = 0;         // conv2d/fully_connected/residual_block
    std::size_t k = 0;           // conv2d/maxpool2d kernel
    std::size_t s = 1;           // stride
    std::size_t p = 0;           // zero padding
    double rate = 0.0;           // dropout
    std::size_t b1 = 0, b3r = 0, b3 = 0, b5r = 0, b5 = 0, pp = 0; // inception widths

    bool operator==(const LayerDesc&) const = default;
};

struct InputSpec {
    std::size_t c = 1, h = 1, w = 1;
    bool operator==(const InputSpec&) const = default;
};

struct ModelSpec {
    std::string name;
    InputSpec input;
    std::size_t classes = 4;
    std::vector<std::string> class_names; // optional; filled in at train time
    std::vector<LayerDesc> layers;
};

// Structural identity ignores class_names (presentation metadata).
inline bool structurally_equal(const ModelSpec& a, const ModelSpec& b) {
    return a.name == b.name && a.input == b.input && a.classes == b.classes &&
           a.layers == b.layers;
}

inline void to_json(nlohmann::json& j, const LayerDesc& d) {
    j = nlohmann::json{{"kind", d.kind}};
    if (d.kind == "conv2d") {
        j["out"] = d.out; j["k"] = d.k; j["s"] = d.s; j["p"] = d.p;
    } else if (d.kind == "maxpool2d") {
        j["k"] = d.k; j["s"] = d.s; j["p"] = d.p;
    } else if (d.kind == "fully_connected") {
        j["out"] = d.out;
    } else if (d.kind == "dropout") {
        j["rate"] = d.rate;
    } else if (d.kind == "residual_block") {
        j["out"] = d.out; j["s"] = d.s;
    } else if (d.kind == "inception_block") {
        j["b1"] = d.b1; j["b3r"] = d.b3r; j["b3"] = d.b3;
        j["b5r"] = d.b5r; j["b5"] = d.b5; j["pp"] = d.pp;
    }
}

inline void from_json(const nlohmann::json& j, LayerDesc& d) {
    d = LayerDesc{};
    j.at("kind").get_to(d.kind);
    d.out = j.value("out", std::size_t{0});
    d.k = j.value("k", std::size_t{0});
    d.s = j.value("s", std::size_t{1});
    d.p = j.value("p", std::size_t{0});
    d.rate = j.value("rate", 0.0);
    d.b1 = j.value("b1", std::size_t{0});
    d.b3r = j.value("b3r", std::size_t{0});
    d.b3 = j.value("b3", std::size_t{0});
    d.b5r = j.value("b5r", std::size_t{0});
    d.b5 = j.value("b5", std::size_t{0});
    d.pp = j.value("pp", std::size_t{0});
}

inline void to_json(nlohmann::json& j, const ModelSpec& s) {
    j = nlohmann::json{
        {"name", s.name},
        {"input", {{"c", s.input.c}, {"h", s.input.h}, {"w", s.input.w}}},
        {"classes", s.classes},
        {"layers", s.layers},
    };
    if (!s.class_names.empty()) j["class_names"] = s.class_names;
}

inline void from_json(const nlohmann::json& j, ModelSpec& s) {
    s = ModelSpec{};
    j.at("name").get_to(s.name);
    s.input.c = j.at("input").at("c").get<std::size_t>();
    s.input.h = j.at("input").at("h").get<std::size_t>();
    s.input.w = j.at("input").at("w").get<std::size_t>();
    j.at("classes").get_to(s.classes);
    j.at("layers").get_to(s.layers);
    if (j.contains("class_names")) j.at("class_names").get_to(s.class_names);
}

// Value shape flowing between layers of one sample: spatial CxHxW until a
// flatten/global pool turns it into a flat feature vector.
struct ValueDims {
    bool flat = false;
    std::size_t c = 0, h = 0, w = 0; // when flat, c holds the feature count

    std::size_t features() const { return flat ? c : c * h * w; }
    std::string str() const {
        return flat ? std::to_string(c)
                    : std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
    }
};

namespace detail {
[[noreturn]] inline void propagation_error(std::size_t idx, const std::string& what) {
    throw ShapeError("layer " + std::to_string(idx) + ": " + what);
}
} // namespace detail

// Per-layer output dims; throws ShapeError when consecutive layers are
// inconsistent or a window no longer fits.
inline std::vector<ValueDims> propagate_shapes(const ModelSpec& spec) {
    ValueDims cur{false, spec.input.c, spec.input.h, spec.input.w};
    if (cur.c == 0 || cur.h == 0 || cur.w == 0)
        throw ShapeError("model input dimensions must be >= 1");
    std::vector<ValueDims> out;
    out.reserve(spec.layers.size());

    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerDesc& d = spec.layers[i];
        if (d.kind == "conv2d" || d.kind == "maxpool2d") {
            if (cur.flat) detail::propagation_error(i, d.kind + " needs a spatial input");
            const std::size_t out_c = d.kind == "conv2d" ? d.out : cur.c;
            try {
                cur = {false, out_c, nn::shape_math::conv_out(cur.h, d.k, d.s, d.p),
                       nn::shape_math::conv_out(cur.w, d.k, d.s, d.p)};
            } catch (const ShapeError& e) {
                detail::propagation_error(i, e.what());
            }
        } else if (d.kind == "residual_block") {
            if (cur.flat) detail::propagation_error(i, "residual_block needs a spatial input");
            try {
                cur = {false, d.out, nn::shape_math::conv_out(cur.h, 3, d.s, 1),
                       nn::shape_math::conv_out(cur.w, 3, d.s, 1)};
            } catch (const ShapeError& e) {
                detail::propagation_error(i, e.what());
            }
        } else if (d.kind == "inception_block") {
            if (cur.flat) detail::propagation_error(i, "inception_block needs a spatial input");
            if (!d.b1 || !d.b3r || !d.b3 || !d.b5r || !d.b5 || !d.pp)
                detail::propagation_error(i, "inception branch widths must all be >= 1");
            if (cur.h < 2 || cur.w < 2)
                detail::propagation_error(i, "inception input too small for its 3x3 pool branch");
            cur = {false, d.b1 + d.b3 + d.b5 + d.pp, cur.h, cur.w};
        } else if (d.kind == "relu" || d.kind == "dropout") {
            // shape preserved
        } else if (d.kind == "flatten") {
            if (cur.flat) detail::propagation_error(i, "flatten needs a spatial input");
            cur = {true, cur.c * cur.h * cur.w, 1, 1};
        } else if (d.kind == "global_avg_pool") {
            if (cur.flat) detail::propagation_error(i, "global_avg_pool needs a spatial input");
            cur = {true, cur.c, 1, 1};
        } else if (d.kind == "fully_connected") {
            if (!cur.flat)
                detail::propagation_error(i, "fully_connected needs a flat input (add flatten "
                                             "or global_avg_pool first)");
            cur = {true, d.out, 1, 1};
        } else {
            detail::propagation_error(i, "unknown layer kind '" + d.kind + "'");
        }
        out.push_back(cur);
    }
    return out;
}

// Full consistency check, including the K-logit output contract.
inline void validate_spec(const ModelSpec& spec) {
    if (spec.classes < 2) throw ShapeError("model must have at least 2 classes");
    if (spec.layers.empty()) throw ShapeError("model has no layers");
    if (!spec.class_names.empty() && spec.class_names.size() != spec.classes)
        throw ShapeError("class_names count does not match class count");
    const auto dims = propagate_shapes(spec);
    const ValueDims& last = dims.back();
    if (spec.layers.back().kind != "fully_connected" || !last.flat || last.c != spec.classes)
        throw ShapeError("model must end in a fully_connected layer producing " +
                         std::to_string(spec.classes) + " logits");
}

// Weight-bearing layers on the main path: convs and FCs count 1, a residual
// block counts its two 3x3 convs (projection shortcuts excluded, matching
// how 18-layer residual nets are named), an inception block its six convs.
inline std::size_t weighted_layer_census(const ModelSpec& spec) {
    std::size_t n = 0;
    for (const LayerDesc& d : spec.layers) {
        if (d.kind == "conv2d" || d.kind == "fully_connected") n += 1;
        else if (d.kind == "residual_block") n += 2;
        else if (d.kind == "inception_block") n += 6;
    }
    return n;
}

} // namespace chestnet::models
