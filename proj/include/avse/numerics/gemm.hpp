#pragma once

#include <cstddef>

namespace avse::numerics {

namespace detail {

template <typename Real>
void gemm_axpy(std::size_t rows, std::size_t inner, std::size_t cols, const Real* a,
              std::size_t lda, const Real* b, std::size_t ldb, Real* c, std::size_t ldc) {
  std::size_t m = 0;
  for (; m + 4 <= rows; m += 4) {
    const Real* a0 = a + (m + 0) * lda;
    const Real* a1 = a + (m + 1) * lda;
    const Real* a2 = a + (m + 2) * lda;
    const Real* a3 = a + (m + 3) * lda;
    Real* c0 = c + (m + 0) * ldc;
    Real* c1 = c + (m + 1) * ldc;
    Real* c2 = c + (m + 2) * ldc;
    Real* c3 = c + (m + 3) * ldc;
    for (std::size_t k = 0; k < inner; ++k) {
      const Real v0 = a0[k], v1 = a1[k], v2 = a2[k], v3 = a3[k];
      const Real* brow = b + k * ldb;
      for (std::size_t n = 0; n < cols; ++n) {
        const Real bv = brow[n];
        c0[n] += v0 * bv;
        c1[n] += v1 * bv;
        c2[n] += v2 * bv;
        c3[n] += v3 * bv;
      }
    }
  }
  for (; m < rows; ++m) {
    const Real* arow = a + m * lda;
    Real* crow = c + m * ldc;
    for (std::size_t k = 0; k < inner; ++k) {
      const Real v = arow[k];
      const Real* brow = b + k * ldb;
      for (std::size_t n = 0; n < cols; ++n) crow[n] += v * brow[n];
    }
  }
}

}  // namespace detail

/// C[m, n] += sum_k A[m, k] * B[k, n], all row-major with explicit leading
/// dimensions.
///
/// Every output element accumulates its products in increasing k. Neither
/// the register tiles nor the leftover-column path change that order, so a
/// row's result is bit-identical no matter how many other rows share the
/// call.
template <typename Real>
void gemm_acc(std::size_t rows, std::size_t inner, std::size_t cols, const Real* a,
              std::size_t lda, const Real* b, std::size_t ldb, Real* c, std::size_t ldc) {
  constexpr std::size_t kRows = 4, kCols = 256 / sizeof(Real);
  std::size_t n0 = 0;
  for (; n0 + kCols <= cols; n0 += kCols) {
    std::size_t m = 0;
    for (; m + kRows <= rows; m += kRows) {
      Real acc[kRows][kCols];
      for (std::size_t i = 0; i < kRows; ++i)
        for (std::size_t j = 0; j < kCols; ++j) acc[i][j] = c[(m + i) * ldc + n0 + j];
      for (std::size_t k = 0; k < inner; ++k) {
        const Real* brow = b + k * ldb + n0;
        for (std::size_t i = 0; i < kRows; ++i) {
          const Real v = a[(m + i) * lda + k];
          for (std::size_t j = 0; j < kCols; ++j) acc[i][j] += v * brow[j];
        }
      }
      for (std::size_t i = 0; i < kRows; ++i)
        for (std::size_t j = 0; j < kCols; ++j) c[(m + i) * ldc + n0 + j] = acc[i][j];
    }
    if (m < rows)
      detail::gemm_axpy(rows - m, inner, kCols, a + m * lda, lda, b + n0, ldb, c + m * ldc + n0, ldc);
  }
  if (n0 < cols) detail::gemm_axpy(rows, inner, cols - n0, a, lda, b + n0, ldb, c + n0, ldc);
}

/// C[m, n] += sum_r A[r, m] * B[r, n]  (A transposed), accumulated over r in
/// increasing order. Used for weight gradients.
template <typename Real>
void gemm_tn_acc(std::size_t rows, std::size_t m_cols, std::size_t n_cols, const Real* a,
                 std::size_t lda, const Real* b, std::size_t ldb, Real* c, std::size_t ldc) {
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* arow = a + r * lda;
    const Real* brow = b + r * ldb;
    for (std::size_t m = 0; m < m_cols; ++m) {
      const Real v = arow[m];
      if (v == Real(0)) continue;
      Real* crow = c + m * ldc;
      for (std::size_t n = 0; n < n_cols; ++n) crow[n] += v * brow[n];
    }
  }
}

/// Row-major transpose of a rows x cols block into cols x rows.
template <typename Real>
void transpose_into(std::size_t rows, std::size_t cols, const Real* src, std::size_t lds,
                    Real* dst, std::size_t ldd) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * ldd + r] = src[r * lds + c];
}

}  // namespace avse::numerics
