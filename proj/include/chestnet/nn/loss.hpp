#pragma once

#include <cmath>
#include <span>

#include "chestnet/core/tensor.hpp"

namespace chestnet::nn {

template <typename T>
struct LossResult {
    double loss = 0.0;     // mean over the batch of -ln p[label]
    TensorT<T> probs;      // N x K softmax rows
    TensorT<T> grad_logits; // (probs - onehot) / N
};

// Softmax cross-entropy with max-subtraction for stability.
template <typename T>
LossResult<T> softmax_cross_entropy(const TensorT<T>& logits, std::span<const int> labels) {
    if (logits.rank() != 2)
        throw ShapeError("softmax_cross_entropy: expects NxK logits, got " +
                         shape_string(logits.shape()));
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    if (labels.size() != n)
        throw ValueError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(n) + " rows");

    LossResult<T> r;
    r.probs = TensorT<T>({n, k});
    r.grad_logits = TensorT<T>({n, k});
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw ValueError("softmax_cross_entropy: label " + std::to_string(y) +
                             " out of range for K=" + std::to_string(k));
        const T* row = logits.data() + i * k;
        T m = row[0];
        for (std::size_t j = 1; j < k; ++j)
            if (row[j] > m) m = row[j];
        double denom = 0.0;
        for (std::size_t j = 0; j < k; ++j) denom += std::exp(static_cast<double>(row[j] - m));
        for (std::size_t j = 0; j < k; ++j)
            r.probs.at(i, j) = static_cast<T>(std::exp(static_cast<double>(row[j] - m)) / denom);
        // -ln p[y] = m + ln(denom) - logit[y], computed without the quotient.
        total += static_cast<double>(m) + std::log(denom) - static_cast<double>(row[y]);
        for (std::size_t j = 0; j < k; ++j) {
            const T onehot = static_cast<std::size_t>(y) == j ? T(1) : T(0);
            r.grad_logits.at(i, j) = (r.probs.at(i, j) - onehot) / static_cast<T>(n);
        }
    }
    r.loss = total / static_cast<double>(n);
    return r;
}

} // namespace chestnet::nn
