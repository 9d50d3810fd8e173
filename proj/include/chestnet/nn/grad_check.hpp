#pragma once

#include <algorithm>
#include <functional>
#include <span>

#include "chestnet/models/model.hpp"
#include "chestnet/nn/dropout.hpp"
#include "chestnet/nn/loss.hpp"

namespace chestnet::nn {

struct GradCheckOptions {
    double eps = 1e-5;
    // Tensors larger than this have a seeded random subset of coordinates
    // checked instead of all of them; a full sweep over the big conv stacks
    // would need millions of forward passes.
    std::size_t max_coords_per_tensor = SIZE_MAX;
    std::uint64_t seed = 0x636b6863;
    bool check_input = true;
    // Skip coordinates whose analytic gradient is below this magnitude.
    // A centered difference of a loss of size ~1 cannot resolve derivatives
    // near the rounding floor (|g| * 2eps under ~1e-13), so such coordinates
    // are unverifiable by finite differences at any step size.
    double min_abs_analytic = 0.0;
};

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t coords_checked = 0;
};

struct CheckTarget {
    TensorT<double>* value = nullptr;
    const TensorT<double>* analytic = nullptr;
};

// Centered finite differences against the supplied analytic gradients:
// max over checked coordinates of |analytic - numeric| / max(|a|,|n|,1e-12).
inline GradCheckResult grad_check(std::span<const CheckTarget> targets,
                                  const std::function<double()>& loss_fn,
                                  const GradCheckOptions& opt = {}) {
    if (!(opt.eps > 0.0)) throw ValueError("grad_check: eps must be > 0");
    GradCheckResult result;
    rng::Stream pick(rng::mix(opt.seed, rng::label("coords")));

    for (const CheckTarget& t : targets) {
        std::vector<std::size_t> eligible;
        eligible.reserve(t.value->size());
        for (std::size_t i = 0; i < t.value->size(); ++i)
            if (std::abs((*t.analytic)[i]) >= opt.min_abs_analytic) eligible.push_back(i);

        std::vector<std::size_t> coords;
        if (eligible.size() <= opt.max_coords_per_tensor) {
            coords = std::move(eligible);
        } else {
            coords.reserve(opt.max_coords_per_tensor);
            for (std::size_t i = 0; i < opt.max_coords_per_tensor; ++i)
                coords.push_back(eligible[pick.below(eligible.size())]);
        }
        for (std::size_t c : coords) {
            double& slot = (*t.value)[c];
            const double saved = slot;
            slot = saved + opt.eps;
            const double lp = loss_fn();
            slot = saved - opt.eps;
            const double lm = loss_fn();
            slot = saved;
            if (!std::isfinite(lp) || !std::isfinite(lm))
                throw NumericError(0, "grad_check: non-finite loss during probing");
            const double numeric = (lp - lm) / (2.0 * opt.eps);
            const double analytic = (*t.analytic)[c];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
            const double rel = std::abs(analytic - numeric) / denom;
            if (rel > result.max_rel_err) result.max_rel_err = rel;
            ++result.coords_checked;
        }
    }
    return result;
}

// Checks one layer through a fixed random projection loss L = sum(r * y),
// which makes dL/dy = r without needing a classifier head.
inline GradCheckResult grad_check_layer(Layer<double>& layer, const TensorT<double>& input,
                                        const GradCheckOptions& opt = {}) {
    TensorT<double> x = input;
    TensorT<double> y = layer.forward(x, true);
    const TensorT<double> r =
        TensorT<double>::uniform(y.shape(), -1.0, 1.0, rng::mix(opt.seed, rng::label("proj")));

    layer.zero_grads();
    TensorT<double> grad_in = layer.backward(r);

    std::vector<NamedParam<double>> params;
    layer.collect_params("", params);
    std::vector<CheckTarget> targets;
    for (auto& p : params) targets.push_back({p.value, p.grad});
    if (opt.check_input) targets.push_back({&x, &grad_in});

    auto loss_fn = [&]() {
        TensorT<double> out = layer.forward(x, true);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) acc += r[i] * out[i];
        return acc;
    };
    return grad_check(targets, loss_fn, opt);
}

// Whole-model check under the real training loss. Dropout masks are frozen
// for the duration so the model is a fixed differentiable function.
inline GradCheckResult grad_check_model(models::Model<double>& model,
                                        const TensorT<double>& input,
                                        std::span<const int> labels,
                                        const GradCheckOptions& opt = {}) {
    for (std::size_t i = 0; i < model.layer_count(); ++i)
        if (auto* d = dynamic_cast<Dropout<double>*>(&model.layer(i))) d->set_mask_frozen(true);

    TensorT<double> x = input;
    auto loss_fn = [&]() {
        return softmax_cross_entropy(model.forward(x, true), labels).loss;
    };

    loss_fn(); // fixes dropout masks
    auto full = softmax_cross_entropy(model.forward(x, true), labels);
    model.zero_grads();
    TensorT<double> grad_in = model.backward(full.grad_logits);

    auto params = model.params();
    std::vector<CheckTarget> targets;
    for (auto& p : params) targets.push_back({p.value, p.grad});
    if (opt.check_input) targets.push_back({&x, &grad_in});

    GradCheckResult res = grad_check(targets, loss_fn, opt);

    for (std::size_t i = 0; i < model.layer_count(); ++i)
        if (auto* d = dynamic_cast<Dropout<double>*>(&model.layer(i))) d->set_mask_frozen(false);
    return res;
}

} // namespace chestnet::nn
