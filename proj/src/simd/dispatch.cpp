// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "neurobolt/simd/kernels.hpp"

namespace neurobolt::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() noexcept {
  if (const char* env = std::getenv("NEUROBOLT_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar") return Backend::kScalar;
  }
  return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

bool use_avx2() noexcept { return current().load(std::memory_order_relaxed) == Backend::kAvx2; }

}  // namespace

Backend active_backend() noexcept { return current().load(); }

bool backend_supported(Backend backend) noexcept {
  return backend == Backend::kScalar || cpu_has_avx2();
}

bool set_backend(Backend backend) noexcept {
  if (!backend_supported(backend)) return false;
  current().store(backend);
  return true;
}

std::string_view backend_name(Backend backend) noexcept {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

#define NEUROBOLT_DISPATCH(call) return use_avx2() ? avx2::call : scalar::call

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, float alpha,
          const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
          std::size_t ldc) {
  NEUROBOLT_DISPATCH(gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc));
}
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc) {
  NEUROBOLT_DISPATCH(gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc));
}
float dot(const float* x, const float* y, std::size_t n) { NEUROBOLT_DISPATCH(dot(x, y, n)); }
double dot(const double* x, const double* y, std::size_t n) { NEUROBOLT_DISPATCH(dot(x, y, n)); }
void axpy(float alpha, const float* x, float* y, std::size_t n) {
  NEUROBOLT_DISPATCH(axpy(alpha, x, y, n));
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  NEUROBOLT_DISPATCH(axpy(alpha, x, y, n));
}
void exp_inplace(float* x, std::size_t n) { NEUROBOLT_DISPATCH(exp_inplace(x, n)); }
void exp_inplace(double* x, std::size_t n) { NEUROBOLT_DISPATCH(exp_inplace(x, n)); }
void softmax_row(float* x, std::size_t n) { NEUROBOLT_DISPATCH(softmax_row(x, n)); }
void softmax_row(double* x, std::size_t n) { NEUROBOLT_DISPATCH(softmax_row(x, n)); }
void gelu(const float* x, float* y, std::size_t n) { NEUROBOLT_DISPATCH(gelu(x, y, n)); }
void gelu(const double* x, double* y, std::size_t n) { NEUROBOLT_DISPATCH(gelu(x, y, n)); }
void gelu_backward(const float* x, const float* dy, float* dx, std::size_t n) {
  NEUROBOLT_DISPATCH(gelu_backward(x, dy, dx, n));
}
void gelu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
  NEUROBOLT_DISPATCH(gelu_backward(x, dy, dx, n));
}

#undef NEUROBOLT_DISPATCH

}  // namespace neurobolt::simd
