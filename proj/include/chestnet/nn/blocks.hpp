#pragma once

#include <optional>

#include "chestnet/nn/activation.hpp"
#include "chestnet/nn/conv2d.hpp"
#include "chestnet/nn/pooling.hpp"

namespace chestnet::nn {

// Two 3x3 convs with a skip path: out = ReLU(conv2(ReLU(conv1(x))) + skip(x)).
// The skip is the identity when stride is 1 and channels match, otherwise a
// 1x1 stride-s projection conv.
template <typename T>
class ResidualBlock final : public Layer<T> {
public:
    ResidualBlock(std::size_t in_channels, std::size_t out_channels, std::size_t stride,
                  std::uint64_t init_seed, bool force_projection = false)
        : conv1_(in_channels, out_channels, 3, stride, 1, rng::mix(init_seed, 1)),
          conv2_(out_channels, out_channels, 3, 1, 1, rng::mix(init_seed, 2)) {
        if (stride != 1 || in_channels != out_channels || force_projection)
            proj_.emplace(in_channels, out_channels, 1, stride, 0, rng::mix(init_seed, 3));
    }

    std::string_view kind() const override { return "residual_block"; }

    TensorT<T> forward(const TensorT<T>& x, bool train) override {
        TensorT<T> h = relu1_.forward(conv1_.forward(x, train), train);
        TensorT<T> branch = conv2_.forward(h, train);
        TensorT<T> skip = proj_ ? proj_->forward(x, train) : x;
        if (!branch.same_shape(skip))
            throw ShapeError("residual_block: branch " + shape_string(branch.shape()) +
                             " vs skip " + shape_string(skip.shape()));
        return relu_out_.forward(add(branch, skip), train);
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        TensorT<T> g = relu_out_.backward(grad_out);
        TensorT<T> g_main = conv1_.backward(relu1_.backward(conv2_.backward(g)));
        TensorT<T> g_skip = proj_ ? proj_->backward(g) : g;
        return add(g_main, g_skip);
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
        conv1_.frozen = conv2_.frozen = this->frozen;
        conv1_.collect_params(prefix + "conv1.", out);
        conv2_.collect_params(prefix + "conv2.", out);
        if (proj_) {
            proj_->frozen = this->frozen;
            proj_->collect_params(prefix + "proj.", out);
        }
    }

    void zero_grads() override {
        conv1_.zero_grads();
        conv2_.zero_grads();
        if (proj_) proj_->zero_grads();
    }

    bool has_projection() const { return proj_.has_value(); }

private:
    Conv2d<T> conv1_, conv2_;
    std::optional<Conv2d<T>> proj_;
    ReLU<T> relu1_, relu_out_;
};

struct InceptionWidths {
    std::size_t b1;        // 1x1 branch
    std::size_t b3_reduce; // 1x1 before the 3x3
    std::size_t b3;
    std::size_t b5_reduce; // 1x1 before the 5x5
    std::size_t b5;
    std::size_t pool_proj; // 1x1 after the 3x3 maxpool

    std::size_t total() const { return b1 + b3 + b5 + pool_proj; }
};

// Four stride-1 branches concatenated along the channel axis:
//   (a) 1x1   (b) 1x1 -> 3x3 p1   (c) 1x1 -> 5x5 p2   (d) maxpool 3 s1 p1 -> 1x1
// Every conv is followed by ReLU; spatial dims are preserved.
template <typename T>
class InceptionBlock final : public Layer<T> {
public:
    InceptionBlock(std::size_t in_channels, const InceptionWidths& widths, std::uint64_t init_seed)
        : widths_(widths),
          b1_(in_channels, require(widths.b1), 1, 1, 0, rng::mix(init_seed, 1)),
          b3r_(in_channels, require(widths.b3_reduce), 1, 1, 0, rng::mix(init_seed, 2)),
          b3_(widths.b3_reduce, require(widths.b3), 3, 1, 1, rng::mix(init_seed, 3)),
          b5r_(in_channels, require(widths.b5_reduce), 1, 1, 0, rng::mix(init_seed, 4)),
          b5_(widths.b5_reduce, require(widths.b5), 5, 1, 2, rng::mix(init_seed, 5)),
          pool_(3, 1, 1),
          bp_(in_channels, require(widths.pool_proj), 1, 1, 0, rng::mix(init_seed, 6)) {}

    std::string_view kind() const override { return "inception_block"; }

    TensorT<T> forward(const TensorT<T>& x, bool train) override {
        TensorT<T> y1 = relu1_.forward(b1_.forward(x, train), train);
        TensorT<T> y3 = relu3_.forward(
            b3_.forward(relu3r_.forward(b3r_.forward(x, train), train), train), train);
        TensorT<T> y5 = relu5_.forward(
            b5_.forward(relu5r_.forward(b5r_.forward(x, train), train), train), train);
        TensorT<T> yp = relup_.forward(bp_.forward(pool_.forward(x, train), train), train);

        const std::size_t n = x.dim(0), h = y1.dim(2), w = y1.dim(3);
        if (y3.dim(2) != h || y5.dim(2) != h || yp.dim(2) != h ||
            y3.dim(3) != w || y5.dim(3) != w || yp.dim(3) != w)
            throw ShapeError("inception_block: branch spatial dims disagree");

        TensorT<T> out({n, widths_.total(), h, w});
        concat_into(out, y1, y3, y5, yp);
        return out;
    }

    TensorT<T> backward(const TensorT<T>& grad_out) override {
        const std::size_t n = grad_out.dim(0), h = grad_out.dim(2), w = grad_out.dim(3);
        TensorT<T> g1({n, widths_.b1, h, w}), g3({n, widths_.b3, h, w});
        TensorT<T> g5({n, widths_.b5, h, w}), gp({n, widths_.pool_proj, h, w});
        split_from(grad_out, g1, g3, g5, gp);

        TensorT<T> gx = b1_.backward(relu1_.backward(g1));
        gx = add(gx, b3r_.backward(relu3r_.backward(b3_.backward(relu3_.backward(g3)))));
        gx = add(gx, b5r_.backward(relu5r_.backward(b5_.backward(relu5_.backward(g5)))));
        gx = add(gx, pool_.backward(bp_.backward(relup_.backward(gp))));
        return gx;
    }

    void collect_params(const std::string& prefix, std::vector<NamedParam<T>>& out) override {
        for (auto [sub, name] : {std::pair<Conv2d<T>*, const char*>{&b1_, "b1."},
                                 {&b3r_, "b3_reduce."},
                                 {&b3_, "b3."},
                                 {&b5r_, "b5_reduce."},
                                 {&b5_, "b5."},
                                 {&bp_, "pool_proj."}}) {
            sub->frozen = this->frozen;
            sub->collect_params(prefix + name, out);
        }
    }

    void zero_grads() override {
        for (Conv2d<T>* c : {&b1_, &b3r_, &b3_, &b5r_, &b5_, &bp_}) c->zero_grads();
    }

    const InceptionWidths& widths() const { return widths_; }

private:
    static std::size_t require(std::size_t w) {
        if (w == 0) throw ValueError("inception_block: every branch width must be >= 1");
        return w;
    }

    void concat_into(TensorT<T>& out, const TensorT<T>& y1, const TensorT<T>& y3,
                     const TensorT<T>& y5, const TensorT<T>& yp) const {
        const std::size_t n = out.dim(0), plane = out.dim(2) * out.dim(3);
        for (std::size_t b = 0; b < n; ++b) {
            T* dst = out.data() + b * widths_.total() * plane;
            for (const TensorT<T>* y : {&y1, &y3, &y5, &yp}) {
                const std::size_t c = y->dim(1);
                const T* src = y->data() + b * c * plane;
                std::copy(src, src + c * plane, dst);
                dst += c * plane;
            }
        }
    }

    void split_from(const TensorT<T>& grad, TensorT<T>& g1, TensorT<T>& g3, TensorT<T>& g5,
                    TensorT<T>& gp) const {
        const std::size_t n = grad.dim(0), plane = grad.dim(2) * grad.dim(3);
        for (std::size_t b = 0; b < n; ++b) {
            const T* src = grad.data() + b * widths_.total() * plane;
            for (TensorT<T>* g : {&g1, &g3, &g5, &gp}) {
                const std::size_t c = g->dim(1);
                std::copy(src, src + c * plane, g->data() + b * c * plane);
                src += c * plane;
            }
        }
    }

    InceptionWidths widths_;
    Conv2d<T> b1_, b3r_, b3_, b5r_, b5_;
    MaxPool2d<T> pool_;
    Conv2d<T> bp_;
    ReLU<T> relu1_, relu3r_, relu3_, relu5r_, relu5_, relup_;
};

} // namespace chestnet::nn
