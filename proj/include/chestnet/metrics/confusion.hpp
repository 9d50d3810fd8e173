#pragma once

#include <span>
#include <string>
#include <vector>

#include "chestnet/core/errors.hpp"

namespace chestnet::metrics {

// K x K counts, cell(t, p) = samples of true class t predicted as p.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t k, std::vector<std::string> names = {})
        : k_(k), cells_(k * k, 0), names_(std::move(names)) {
        if (k_ == 0) throw ValueError("confusion matrix needs at least one class");
        if (!names_.empty() && names_.size() != k_)
            throw ValueError("confusion matrix class-name count mismatch");
    }

    std::size_t classes() const { return k_; }
    const std::vector<std::string>& class_names() const { return names_; }

    std::uint64_t& cell(std::size_t t, std::size_t p) { return cells_[t * k_ + p]; }
    std::uint64_t cell(std::size_t t, std::size_t p) const { return cells_[t * k_ + p]; }

    std::uint64_t total() const {
        std::uint64_t n = 0;
        for (std::uint64_t c : cells_) n += c;
        return n;
    }

    std::uint64_t trace() const {
        std::uint64_t n = 0;
        for (std::size_t i = 0; i < k_; ++i) n += cell(i, i);
        return n;
    }

    std::uint64_t row_sum(std::size_t t) const {
        std::uint64_t n = 0;
        for (std::size_t p = 0; p < k_; ++p) n += cell(t, p);
        return n;
    }

    std::uint64_t col_sum(std::size_t p) const {
        std::uint64_t n = 0;
        for (std::size_t t = 0; t < k_; ++t) n += cell(t, p);
        return n;
    }

    // Prediction streams are additive: cm(A || B) = cm(A) + cm(B).
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        if (o.k_ != k_) throw ValueError("cannot add confusion matrices of different sizes");
        for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += o.cells_[i];
        return *this;
    }

private:
    std::size_t k_ = 0;
    std::vector<std::uint64_t> cells_;
    std::vector<std::string> names_;
};

inline ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> truths,
                                 std::size_t k, std::vector<std::string> names = {}) {
    if (preds.size() != truths.size())
        throw ValueError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(truths.size()) + " truths");
    ConfusionMatrix cm(k, std::move(names));
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int t = truths[i], p = preds[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= k || static_cast<std::size_t>(p) >= k)
            throw ValueError("confusion: class id out of range at position " + std::to_string(i));
        cm.cell(static_cast<std::size_t>(t), static_cast<std::size_t>(p))++;
    }
    return cm;
}

// Fraction of correctly classified samples: trace / total. For one-vs-rest
// counts this is the same as (TP+TN)/(TP+TN+FP+FN) per class.
inline double accuracy(const ConfusionMatrix& cm) {
    const std::uint64_t total = cm.total();
    if (total == 0) throw ValueError("accuracy of an empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

// One-vs-rest counts for class c.
struct ClassCounts {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
};

inline ClassCounts class_counts(const ConfusionMatrix& cm, std::size_t c) {
    if (c >= cm.classes())
        throw ValueError("class_counts: class " + std::to_string(c) + " out of range");
    ClassCounts cc;
    cc.tp = cm.cell(c, c);
    cc.fn = cm.row_sum(c) - cc.tp;
    cc.fp = cm.col_sum(c) - cc.tp;
    cc.tn = cm.total() - cc.tp - cc.fp - cc.fn;
    return cc;
}

inline double precision(const ClassCounts& c) {
    return c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline double recall(const ClassCounts& c) {
    return c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

inline double f1(const ClassCounts& c) {
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
}

} // namespace chestnet::metrics
