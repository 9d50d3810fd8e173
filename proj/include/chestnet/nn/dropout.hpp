#pragma once

#include "chestnet/nn/layer.hpp"

namespace chestnet::nn {

// Inverted dropout: in train mode each element is zeroed with probability
// rate and survivors are scaled by 1/(1-rate), so eval mode is the identity.
// Masks come from (seed, call counter) and are replayable.
template <typename T>
class Dropout final : public Layer<T> {
public:
    Dropout(double rate, std::uint64_t seed) : rate_(rate), seed_(seed) {
        if (!(rate >= 0.0 && rate < 1.0))
            throw ValueError("dropout: rate must be in [0,1), got " + std::to_string(rate));
    }

    std::string_view kind() const override { return "dropout"; }

    TensorT<T> forward(const TensorT<T>& x, bool train) override {
        if (!train || rate_ == 0.0) {
            mask_ = TensorT<T>();
            return x;
        }
        if (!(freeze_mask_ && mask_.same_shape(x))) {
            mask_ = TensorT<T>(x.shape());
            rng::Stream stream(rng::mix(seed_, counter_++));
            const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
            for (std::size_t i = 0; i < mask_.size(); ++i)
                mask_[i] = stream.next_unit() < rate_ ? T(0) : keep_scale;
        }
        return mul(x, mask_);
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        if (mask_.empty()) return grad_out; // eval or rate 0: identity
        return mul(grad_out, mask_);
    }

    double rate() const { return rate_; }

    // Reuse the current mask on subsequent train forwards; the
    // finite-difference checker needs the layer to be a fixed function.
    void set_mask_frozen(bool on) { freeze_mask_ = on; }

private:
    double rate_;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    bool freeze_mask_ = false;
    TensorT<T> mask_;
};

} // namespace chestnet::nn
