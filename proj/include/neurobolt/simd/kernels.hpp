// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense arithmetic kernels used by every numeric stage of the library.
//
// Each kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA implementation. The active backend is chosen once at startup
// from the CPU feature flags and can be overridden either programmatically
// (set_backend) or through the NEUROBOLT_SIMD environment variable
// ("scalar" or "avx2"). Both backends are kept numerically equivalent up to
// floating-point reassociation; tests/unit/test_kernels.cpp pins this.

#include <cstddef>
#include <string_view>

namespace neurobolt::simd {

enum class Backend { kScalar, kAvx2 };

enum class Trans { kNo, kYes };

/// Backend currently used by the dispatching entry points below.
Backend active_backend() noexcept;

/// True when the running CPU can execute the given backend.
bool backend_supported(Backend backend) noexcept;

/// Selects the backend for subsequent calls. Returns false (and leaves the
/// selection unchanged) when the CPU does not support it.
bool set_backend(Backend backend) noexcept;

std::string_view backend_name(Backend backend) noexcept;

// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C, where op(A) is MxK and
// op(B) is KxN. When beta == 0 the previous contents of C are ignored (NaNs in
// C do not propagate).
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc);
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc);

float dot(const float* x, const float* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);

// y += alpha * x
void axpy(float alpha, const float* x, float* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x[i] = exp(x[i])
void exp_inplace(float* x, std::size_t n);
void exp_inplace(double* x, std::size_t n);

// Numerically stable in-place softmax of one contiguous row.
void softmax_row(float* x, std::size_t n);
void softmax_row(double* x, std::size_t n);

// GELU, tanh form: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
void gelu(const float* x, float* y, std::size_t n);
void gelu(const double* x, double* y, std::size_t n);

// dx[i] = dy[i] * gelu'(x[i])
void gelu_backward(const float* x, const float* dy, float* dx, std::size_t n);
void gelu_backward(const double* x, const double* dy, double* dx, std::size_t n);

// Direct access to a specific backend, bypassing dispatch. Used by the
// equivalence tests and the benchmark tool.
namespace scalar {
void gemm(Trans, Trans, std::size_t, std::size_t, std::size_t, float, const float*, std::size_t,
          const float*, std::size_t, float, float*, std::size_t);
void gemm(Trans, Trans, std::size_t, std::size_t, std::size_t, double, const double*, std::size_t,
          const double*, std::size_t, double, double*, std::size_t);
float dot(const float*, const float*, std::size_t);
double dot(const double*, const double*, std::size_t);
void axpy(float, const float*, float*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
void exp_inplace(float*, std::size_t);
void exp_inplace(double*, std::size_t);
void softmax_row(float*, std::size_t);
void softmax_row(double*, std::size_t);
void gelu(const float*, float*, std::size_t);
void gelu(const double*, double*, std::size_t);
void gelu_backward(const float*, const float*, float*, std::size_t);
void gelu_backward(const double*, const double*, double*, std::size_t);
}  // namespace scalar

namespace avx2 {
void gemm(Trans, Trans, std::size_t, std::size_t, std::size_t, float, const float*, std::size_t,
          const float*, std::size_t, float, float*, std::size_t);
void gemm(Trans, Trans, std::size_t, std::size_t, std::size_t, double, const double*, std::size_t,
          const double*, std::size_t, double, double*, std::size_t);
float dot(const float*, const float*, std::size_t);
double dot(const double*, const double*, std::size_t);
void axpy(float, const float*, float*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
void exp_inplace(float*, std::size_t);
void exp_inplace(double*, std::size_t);
void softmax_row(float*, std::size_t);
void softmax_row(double*, std::size_t);
void gelu(const float*, float*, std::size_t);
void gelu(const double*, double*, std::size_t);
void gelu_backward(const float*, const float*, float*, std::size_t);
void gelu_backward(const double*, const double*, double*, std::size_t);
}  // namespace avx2

}  // namespace neurobolt::simd
