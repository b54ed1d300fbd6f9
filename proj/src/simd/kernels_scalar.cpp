// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// Portable reference kernels. These define the semantics every vectorized
// backend must reproduce.

#include <algorithm>
#include <cmath>

#include "neurobolt/simd/kernels.hpp"

namespace neurobolt::simd::scalar {
namespace {

template <typename T>
void gemm_impl(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, T alpha,
               const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
               std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * ldc;
    if (beta == T(0)) {
      std::fill(crow, crow + n, T(0));
    } else if (beta != T(1)) {
      for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
    }
  }
  if (m == 0 || n == 0 || k == 0 || alpha == T(0)) return;

  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = alpha * (trans_a == Trans::kNo ? a[i * lda + p] : a[p * lda + i]);
      if (trans_b == Trans::kNo) {
        const T* brow = b + p * ldb;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * b[j * ldb + p];
      }
    }
  }
}

template <typename T>
T dot_impl(const T* x, const T* y, std::size_t n) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T>
void softmax_impl(T* x, std::size_t n) {
  if (n == 0) return;
  const T mx = *std::max_element(x, x + n);
  T sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - mx);
    sum += x[i];
  }
  const T inv = T(1) / sum;
  for (std::size_t i = 0; i < n; ++i) x[i] *= inv;
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

template <typename T>
void gelu_impl(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    const T u = T(kGeluC) * (v + T(kGeluA) * v * v * v);
    y[i] = T(0.5) * v * (T(1) + std::tanh(u));
  }
}

template <typename T>
void gelu_backward_impl(const T* x, const T* dy, T* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    const T u = T(kGeluC) * (v + T(kGeluA) * v * v * v);
    const T t = std::tanh(u);
    const T du = T(kGeluC) * (T(1) + T(3 * kGeluA) * v * v);
    dx[i] = dy[i] * (T(0.5) * (T(1) + t) + T(0.5) * v * (T(1) - t * t) * du);
  }
}

}  // namespace

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc) {
  gemm_impl(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc) {
  gemm_impl(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

float dot(const float* x, const float* y, std::size_t n) { return dot_impl(x, y, n); }
double dot(const double* x, const double* y, std::size_t n) { return dot_impl(x, y, n); }

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void exp_inplace(float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}
void exp_inplace(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

void softmax_row(float* x, std::size_t n) { softmax_impl(x, n); }
void softmax_row(double* x, std::size_t n) { softmax_impl(x, n); }

void gelu(const float* x, float* y, std::size_t n) { gelu_impl(x, y, n); }
void gelu(const double* x, double* y, std::size_t n) { gelu_impl(x, y, n); }

void gelu_backward(const float* x, const float* dy, float* dx, std::size_t n) {
  gelu_backward_impl(x, dy, dx, n);
}
void gelu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
  gelu_backward_impl(x, dy, dx, n);
}

}  // namespace neurobolt::simd::scalar
