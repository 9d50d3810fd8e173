#pragma once

#include <cstddef>
#include <cstring>

namespace chestnet::detail {

// Dense row-major kernels shared by matmul, conv (im2col) and the FC layer.
// The contraction index always advances left to right, so results are
// bit-identical between runs of the same build. Inner loops run over
// contiguous output columns, which the compiler vectorizes without
// reassociating any sum.

// C[m,n] = A[m,k] * B[k,n]  (+= when accumulate)
template <typename T>
void gemm_nn(std::size_t m, std::size_t k, std::size_t n,
             const T* a, const T* b, T* c, bool accumulate = false) {
    if (!accumulate) std::memset(c, 0, m * n * sizeof(T));
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * n;
        const T* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = arow[p];
            const T* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[m,n] = A[k,m]^T * B[k,n]  (+= when accumulate)
template <typename T>
void gemm_tn(std::size_t m, std::size_t k, std::size_t n,
             const T* a, const T* b, T* c, bool accumulate = false) {
    if (!accumulate) std::memset(c, 0, m * n * sizeof(T));
    for (std::size_t p = 0; p < k; ++p) {
        const T* arow = a + p * m;
        const T* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const T av = arow[i];
            T* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// dst[n,m] = src[m,n]^T
template <typename T>
void transpose(std::size_t m, std::size_t n, const T* src, T* dst) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
}

} // namespace chestnet::detail
