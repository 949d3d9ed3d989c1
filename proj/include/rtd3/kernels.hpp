#pragma once

// Dense row-major GEMM kernels used by every layer.
//
// Three layouts cover forward and backward passes of a linear map y = x W^T:
//   gemm_nt: C(m x n) = A(m x k) * B(n x k)^T      (forward, x W^T)
//   gemm_nn: C(m x n) = A(m x k) * B(k x n)        (input gradient, dY W)
//   gemm_tn: C(m x n) = A(k x m)^T * B(k x n)      (weight gradient, dY^T X)
// With `accumulate` the product is added to C, otherwise C is overwritten.
//
// The default kernels are OpenMP-parallel over rows of C. Every element of C
// is produced by exactly one thread with a fixed summation order, so results
// do not depend on the thread count. `serial::` holds straightforward
// reference loops kept for testing and benchmarking.

#include <cstddef>

namespace rtd3::kernels {

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate);
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate);
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate);

// Column sums of A(m x n) added to out(n).
void add_column_sums(const double* a, double* out, std::size_t m,
                     std::size_t n);

namespace serial {

void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate);
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate);
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k, bool accumulate);
void add_column_sums(const double* a, double* out, std::size_t m,
                     std::size_t n);

}  // namespace serial

// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace rtd3::kernels
