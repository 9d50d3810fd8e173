#pragma once

#include "chestnet/core/rng.hpp"
#include "chestnet/core/tensor.hpp"

namespace chestnet::data {

// Label-preserving train-time transforms: random crop, horizontal flip,
// per-channel intensity jitter. Randomness is a pure function of
// (seed, sample_index, epoch), so augmented batches replay exactly no matter
// how loading is scheduled.
struct AugmentConfig {
    bool enabled = false;
    std::size_t crop = 0;        // output side length; 0 keeps the full image
    double flip_prob = 0.5;
    double jitter = 0.1;         // multiplicative amplitude per channel
    std::uint64_t seed = 0;
    std::size_t resize_margin = 32; // loader oversizes by this much when cropping

    void validate() const {
        if (jitter < 0.0) throw ValueError("augment: jitter must be >= 0");
        if (!(flip_prob >= 0.0 && flip_prob <= 1.0))
            throw ValueError("augment: flip probability must be in [0,1]");
    }
};

template <typename T>
TensorT<T> crop_window(const TensorT<T>& img, std::size_t oy, std::size_t ox, std::size_t size) {
    const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
    if (oy + size > h || ox + size > w)
        throw ValueError("crop window exceeds the image");
    TensorT<T> out({c, size, size});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t y = 0; y < size; ++y) {
            const T* src = img.data() + (ch * h + oy + y) * w + ox;
            std::copy(src, src + size, out.data() + (ch * size + y) * size);
        }
    return out;
}

template <typename T>
TensorT<T> center_crop(const TensorT<T>& img, std::size_t size) {
    return crop_window(img, (img.dim(1) - size) / 2, (img.dim(2) - size) / 2, size);
}

template <typename T>
TensorT<T> hflip(const TensorT<T>& img) {
    const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
    TensorT<T> out(img.shape());
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t y = 0; y < h; ++y) {
            const T* src = img.data() + (ch * h + y) * w;
            T* dst = out.data() + (ch * h + y) * w;
            for (std::size_t x = 0; x < w; ++x) dst[x] = src[w - 1 - x];
        }
    return out;
}

// Returns the transformed image with its untouched label.
template <typename T>
std::pair<TensorT<T>, int> augment(const TensorT<T>& img, int label, const AugmentConfig& cfg,
                                   std::uint64_t sample_index, std::uint64_t epoch) {
    if (img.rank() != 3) throw ShapeError("augment expects a CxHxW image");
    cfg.validate();
    const std::size_t h = img.dim(1), w = img.dim(2);
    const std::size_t crop = cfg.crop == 0 ? std::min(h, w) : cfg.crop;
    if (crop > h || crop > w)
        throw ValueError("augment: crop " + std::to_string(crop) + " larger than image " +
                         std::to_string(h) + "x" + std::to_string(w));

    rng::Stream stream(rng::mix(cfg.seed, sample_index, epoch));
    const std::size_t oy = stream.below(h - crop + 1);
    const std::size_t ox = stream.below(w - crop + 1);
    TensorT<T> out = crop_window(img, oy, ox, crop);
    if (stream.next_unit() < cfg.flip_prob) out = hflip(out);

    const std::size_t plane = crop * crop;
    for (std::size_t c = 0; c < out.dim(0); ++c) {
        const T factor = static_cast<T>(stream.uniform(1.0 - cfg.jitter, 1.0 + cfg.jitter));
        T* p = out.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            T v = p[i] * factor;
            p[i] = v < T(0) ? T(0) : (v > T(1) ? T(1) : v);
        }
    }
    return {std::move(out), label};
}

} // namespace chestnet::data
