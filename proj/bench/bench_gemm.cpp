// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// Rough single-thread GEMM throughput for the shapes the encoders use.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "neurobolt/simd/kernels.hpp"

using neurobolt::simd::Trans;

int main() {
  struct Shape { std::size_t m, n, k; Trans ta, tb; };
  const Shape shapes[] = {{416, 192, 64, Trans::kNo, Trans::kYes},
                          {832, 256, 64, Trans::kNo, Trans::kYes},
                          {416, 416, 16, Trans::kNo, Trans::kYes},
                          {64, 256, 832, Trans::kYes, Trans::kNo},
                          {416, 200, 200, Trans::kNo, Trans::kYes},
                          {512, 512, 512, Trans::kNo, Trans::kNo}};
  std::mt19937 gen(1);
  std::uniform_real_distribution<float> u(-1, 1);
  for (const auto& s : shapes) {
    std::vector<float> a(s.m * s.k + s.k * s.m), b(s.k * s.n + s.n * s.k), c(s.m * s.n);
    for (auto& v : a) v = u(gen);
    for (auto& v : b) v = u(gen);
    const std::size_t lda = s.ta == Trans::kNo ? s.k : s.m;
    const std::size_t ldb = s.tb == Trans::kNo ? s.n : s.k;
    for (int which = 0; which < 2; ++which) {
      const int reps = which == 0 ? 200 : 5;
      auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < reps; ++r) {
        if (which == 0)
          neurobolt::simd::avx2::gemm(s.ta, s.tb, s.m, s.n, s.k, 1.0f, a.data(), lda, b.data(), ldb, 0.0f, c.data(), s.n);
        else
          neurobolt::simd::scalar::gemm(s.ta, s.tb, s.m, s.n, s.k, 1.0f, a.data(), lda, b.data(), ldb, 0.0f, c.data(), s.n);
      }
      const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("%-6s m=%zu n=%zu k=%zu  %.1f GFLOP/s\n", which == 0 ? "avx2" : "scalar", s.m, s.n,
                  s.k, 2.0 * s.m * s.n * s.k * reps / sec * 1e-9);
    }
  }
}
