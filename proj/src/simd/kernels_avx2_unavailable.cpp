// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// Non-x86 builds: the AVX2 entry points forward to the scalar kernels so the
// dispatch table stays complete. backend_supported() reports kAvx2 as absent.

#include "neurobolt/simd/kernels.hpp"

namespace neurobolt::simd::avx2 {

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc) {
  scalar::gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc) {
  scalar::gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
float dot(const float* x, const float* y, std::size_t n) { return scalar::dot(x, y, n); }
double dot(const double* x, const double* y, std::size_t n) { return scalar::dot(x, y, n); }
void axpy(float a, const float* x, float* y, std::size_t n) { scalar::axpy(a, x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { scalar::axpy(a, x, y, n); }
void exp_inplace(float* x, std::size_t n) { scalar::exp_inplace(x, n); }
void exp_inplace(double* x, std::size_t n) { scalar::exp_inplace(x, n); }
void softmax_row(float* x, std::size_t n) { scalar::softmax_row(x, n); }
void softmax_row(double* x, std::size_t n) { scalar::softmax_row(x, n); }
void gelu(const float* x, float* y, std::size_t n) { scalar::gelu(x, y, n); }
void gelu(const double* x, double* y, std::size_t n) { scalar::gelu(x, y, n); }
void gelu_backward(const float* x, const float* dy, float* dx, std::size_t n) {
  scalar::gelu_backward(x, dy, dx, n);
}
void gelu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
  scalar::gelu_backward(x, dy, dx, n);
}

}  // namespace neurobolt::simd::avx2
