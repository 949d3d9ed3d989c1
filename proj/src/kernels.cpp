#include "rtd3/kernels.hpp"

#include <omp.h>

#include <vector>

namespace rtd3::kernels {

namespace {
// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWork = 1 << 16;

inline bool worth_parallel(std::size_t m, std::size_t n, std::size_t k) {
  return m > 1 && m * n * k >= kParallelWork;
}
}  // namespace

namespace {

// C tile (R x C) += A rows (R x k) * B columns (k x C), accumulated in
// registers. Each element sums p = 0..k-1 in order, then adds into C.
template <std::size_t R, std::size_t C>
inline void tile(const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double* c, std::size_t ldc, std::size_t k) {
  double acc[R][C] = {};
  for (std::size_t p = 0; p < k; ++p) {
    const double* br = b + p * ldb;
    for (std::size_t r = 0; r < R; ++r) {
      const double av = a[r * lda + p];
#pragma omp simd
      for (std::size_t j = 0; j < C; ++j) acc[r][j] += av * br[j];
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t j = 0; j < C; ++j) c[r * ldc + j] += acc[r][j];
  }
}

// Rows [i, i + R) of C, all columns, in 16/8/1-wide tiles.
template <std::size_t R>
inline void row_block(const double* a, const double* b, double* c,
                      std::size_t n, std::size_t k) {
  std::size_t j = 0;
  for (; j + 16 <= n; j += 16) tile<R, 16>(a, k, b + j, n, c + j, n, k);
  for (; j + 8 <= n; j += 8) tile<R, 8>(a, k, b + j, n, c + j, n, k);
  for (; j < n; ++j) tile<R, 1>(a, k, b + j, n, c + j, n, k);
}

// C(m x n) (+)= A(m x k) * B(k x n), all row-major.
void gemm_rows(const double* a, const double* b, double* c, std::size_t m,
               std::size_t n, std::size_t k, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  }
  const auto blocks = static_cast<long>((m + 3) / 4);
#pragma omp parallel for schedule(static) if (worth_parallel(m, n, k))
  for (long bb = 0; bb < blocks; ++bb) {
    const std::size_t i = static_cast<std::size_t>(bb) * 4;
    if (i + 4 <= m) {
      row_block<4>(a + i * k, b, c + i * n, n, k);
    } else {
      for (std::size_t r = i; r < m; ++r) {
        row_block<1>(a + r * k, b, c + r * n, n, k);
      }
    }
  }
}

// Per-thread scratch for packed operands.
std::vector<double>& scratch() {
  thread_local std::vector<double> buf;
  return buf;
}

}  // namespace

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate) {
  // Pack B^T (k x n) once so the inner loop runs over contiguous columns.
  std::vector<double>& bt = scratch();
  bt.resize(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* br = b + j * k;
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = br[p];
  }
  gemm_rows(a, bt.data(), c, m, n, k, accumulate);
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate) {
  gemm_rows(a, b, c, m, n, k, accumulate);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate) {
  // Pack A^T (m x k) so rows of C read contiguous multipliers.
  std::vector<double>& at = scratch();
  at.resize(m * k);
  for (std::size_t p = 0; p < k; ++p) {
    const double* ar = a + p * m;
    for (std::size_t i = 0; i < m; ++i) at[i * k + p] = ar[i];
  }
  gemm_rows(at.data(), b, c, m, n, k, accumulate);
}

void add_column_sums(const double* a, double* out, std::size_t m,
                     std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ar = a + i * n;
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) out[j] += ar[j];
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace rtd3::kernels
