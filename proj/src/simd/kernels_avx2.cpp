// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// is only entered after a runtime CPU check. Everything except the exported
// entry points lives in an anonymous namespace, and no standard-library
// templates are instantiated here, so no AVX code can leak into inline
// functions shared with the rest of the program.

#include <immintrin.h>

#include <cstdlib>
#include <cstring>

#include "neurobolt/simd/kernels.hpp"

namespace neurobolt::simd::avx2 {
namespace {

inline std::size_t min_sz(std::size_t a, std::size_t b) { return a < b ? a : b; }

template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using reg = __m256;
  static constexpr std::size_t kWidth = 8;
  static reg zero() { return _mm256_setzero_ps(); }
  static reg set1(float v) { return _mm256_set1_ps(v); }
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static reg div(reg a, reg b) { return _mm256_div_ps(a, b); }
  static reg max(reg a, reg b) { return _mm256_max_ps(a, b); }
  static reg min(reg a, reg b) { return _mm256_min_ps(a, b); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg fnmadd(reg a, reg b, reg c) { return _mm256_fnmadd_ps(a, b, c); }
  static reg round(reg a) { return _mm256_round_ps(a, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC); }
  static float hsum(reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    lo = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, lo);
    lo = _mm_add_ss(lo, sh);
    return _mm_cvtss_f32(lo);
  }
  static float hmax(reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_max_ps(lo, hi);
    lo = _mm_max_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_max_ss(lo, _mm_shuffle_ps(lo, lo, 1));
    return _mm_cvtss_f32(lo);
  }
  // 2^n for integral-valued n in the normal exponent range.
  static reg pow2n(reg n) {
    const __m256i e = _mm256_add_epi32(_mm256_cvtps_epi32(n), _mm256_set1_epi32(127));
    return _mm256_castsi256_ps(_mm256_slli_epi32(e, 23));
  }
  static constexpr float kExpLo = -87.3f;
  static constexpr float kExpHi = 88.3f;
  static constexpr int kExpDegree = 7;
};

template <>
struct Vec<double> {
  using reg = __m256d;
  static constexpr std::size_t kWidth = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg set1(double v) { return _mm256_set1_pd(v); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static reg div(reg a, reg b) { return _mm256_div_pd(a, b); }
  static reg max(reg a, reg b) { return _mm256_max_pd(a, b); }
  static reg min(reg a, reg b) { return _mm256_min_pd(a, b); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg fnmadd(reg a, reg b, reg c) { return _mm256_fnmadd_pd(a, b, c); }
  static reg round(reg a) { return _mm256_round_pd(a, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC); }
  static double hsum(reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  }
  static double hmax(reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
  }
  static reg pow2n(reg n) {
    // n + 1.5*2^52 places n in the low mantissa bits.
    const reg magic = _mm256_set1_pd(6755399441055744.0);
    __m256i bits = _mm256_castpd_si256(_mm256_add_pd(n, magic));
    bits = _mm256_sub_epi64(bits, _mm256_castpd_si256(magic));
    bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
    return _mm256_castsi256_pd(_mm256_slli_epi64(bits, 52));
  }
  static constexpr double kExpLo = -708.0;
  static constexpr double kExpHi = 709.0;
  static constexpr int kExpDegree = 13;
};

// ---------------------------------------------------------------------------
// GEMM: packed panels, 6 x (2 * width) register tile.

constexpr std::size_t kMr = 6;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 72;
constexpr std::size_t kNc = 2048;

struct ScratchBuffer {
  void* ptr = nullptr;
  std::size_t bytes = 0;
  ~ScratchBuffer() { std::free(ptr); }
  void* reserve(std::size_t need) {
    if (need > bytes) {
      std::free(ptr);
      bytes = (need + 63) / 64 * 64;
      ptr = std::aligned_alloc(64, bytes);
    }
    return ptr;
  }
};

thread_local ScratchBuffer g_pack_a;
thread_local ScratchBuffer g_pack_b;

// op(A)[i][p] for i in [i0, i0+mc), p in [p0, p0+kc), alpha folded in.
template <typename T>
void pack_a(Trans ta, const T* a, std::size_t lda, std::size_t i0, std::size_t mc,
            std::size_t p0, std::size_t kc, T alpha, T* out) {
  for (std::size_t ir = 0; ir < mc; ir += kMr) {
    const std::size_t mr = min_sz(kMr, mc - ir);
    for (std::size_t p = 0; p < kc; ++p) {
      for (std::size_t r = 0; r < mr; ++r) {
        const std::size_t i = i0 + ir + r;
        const std::size_t q = p0 + p;
        out[r] = alpha * (ta == Trans::kNo ? a[i * lda + q] : a[q * lda + i]);
      }
      for (std::size_t r = mr; r < kMr; ++r) out[r] = T(0);
      out += kMr;
    }
  }
}

// op(B)[p][j] for p in [p0, p0+kc), j in [j0, j0+nc).
template <typename T>
void pack_b(Trans tb, const T* b, std::size_t ldb, std::size_t p0, std::size_t kc,
            std::size_t j0, std::size_t nc, T* out) {
  constexpr std::size_t nr_full = 2 * Vec<T>::kWidth;
  for (std::size_t jr = 0; jr < nc; jr += nr_full) {
    const std::size_t nr = min_sz(nr_full, nc - jr);
    for (std::size_t p = 0; p < kc; ++p) {
      const std::size_t q = p0 + p;
      if (tb == Trans::kNo) {
        const T* src = b + q * ldb + j0 + jr;
        if (nr == nr_full) {
          std::memcpy(out, src, nr_full * sizeof(T));
        } else {
          for (std::size_t c = 0; c < nr; ++c) out[c] = src[c];
          for (std::size_t c = nr; c < nr_full; ++c) out[c] = T(0);
        }
      } else {
        for (std::size_t c = 0; c < nr; ++c) out[c] = b[(j0 + jr + c) * ldb + q];
        for (std::size_t c = nr; c < nr_full; ++c) out[c] = T(0);
      }
      out += nr_full;
    }
  }
}

template <typename T>
void micro_kernel(std::size_t kc, const T* ap, const T* bp, T* c, std::size_t ldc, std::size_t mr,
                  std::size_t nr) {
  using V = Vec<T>;
  using reg = typename V::reg;
  constexpr std::size_t w = V::kWidth;
  reg acc0[kMr];
  reg acc1[kMr];
#pragma GCC unroll 6
  for (std::size_t r = 0; r < kMr; ++r) {
    acc0[r] = V::zero();
    acc1[r] = V::zero();
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const reg b0 = V::load(bp);
    const reg b1 = V::load(bp + w);
#pragma GCC unroll 6
    for (std::size_t r = 0; r < kMr; ++r) {
      const reg av = V::set1(ap[r]);
      acc0[r] = V::fmadd(av, b0, acc0[r]);
      acc1[r] = V::fmadd(av, b1, acc1[r]);
    }
    ap += kMr;
    bp += 2 * w;
  }
  if (mr == kMr && nr == 2 * w) {
#pragma GCC unroll 6
    for (std::size_t r = 0; r < kMr; ++r) {
      T* crow = c + r * ldc;
      V::store(crow, V::add(V::load(crow), acc0[r]));
      V::store(crow + w, V::add(V::load(crow + w), acc1[r]));
    }
    return;
  }
  alignas(32) T tile[kMr * 2 * w];
  for (std::size_t r = 0; r < kMr; ++r) {
    V::store(tile + r * 2 * w, acc0[r]);
    V::store(tile + r * 2 * w + w, acc1[r]);
  }
  for (std::size_t r = 0; r < mr; ++r) {
    for (std::size_t j = 0; j < nr; ++j) c[r * ldc + j] += tile[r * 2 * w + j];
  }
}

// Outputs at most two vectors wide (attention heads, low-rank projections).
// Packing A would cost as much as the product itself, so B is packed once
// with alpha folded in and A is streamed: row by row into registers, or for a
// transposed A, column by column into an m x (2 * width) accumulator.
template <typename T, bool Two>
void gemm_narrow(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha,
                 const T* a, std::size_t lda, const T* b, std::size_t ldb, T* c,
                 std::size_t ldc) {
  using V = Vec<T>;
  using reg = typename V::reg;
  constexpr std::size_t w = V::kWidth;
  constexpr std::size_t nr = 2 * w;
  T* bp = static_cast<T*>(g_pack_b.reserve(k * nr * sizeof(T) + 64));
  for (std::size_t p = 0; p < k; ++p) {
    T* row = bp + p * nr;
    for (std::size_t j = 0; j < n; ++j) row[j] = alpha * (tb == Trans::kNo ? b[p * ldb + j] : b[j * ldb + p]);
    for (std::size_t j = n; j < nr; ++j) row[j] = T(0);
  }
  alignas(32) T tile[nr];
  if (ta == Trans::kNo) {
    for (std::size_t i = 0; i < m; ++i) {
      const T* ai = a + i * lda;
      // Four independent chains per output vector hide the FMA latency.
      reg acc0[4] = {V::zero(), V::zero(), V::zero(), V::zero()};
      reg acc1[4] = {V::zero(), V::zero(), V::zero(), V::zero()};
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
#pragma GCC unroll 4
        for (std::size_t u = 0; u < 4; ++u) {
          const reg av = V::set1(ai[p + u]);
          acc0[u] = V::fmadd(av, V::load(bp + (p + u) * nr), acc0[u]);
          if constexpr (Two) acc1[u] = V::fmadd(av, V::load(bp + (p + u) * nr + w), acc1[u]);
        }
      }
      for (; p < k; ++p) {
        const reg av = V::set1(ai[p]);
        acc0[0] = V::fmadd(av, V::load(bp + p * nr), acc0[0]);
        if constexpr (Two) acc1[0] = V::fmadd(av, V::load(bp + p * nr + w), acc1[0]);
      }
      V::store(tile, V::add(V::add(acc0[0], acc0[1]), V::add(acc0[2], acc0[3])));
      V::store(tile + w, V::add(V::add(acc1[0], acc1[1]), V::add(acc1[2], acc1[3])));
      T* ci = c + i * ldc;
      for (std::size_t j = 0; j < n; ++j) ci[j] += tile[j];
    }
    return;
  }
  T* acc = static_cast<T*>(g_pack_a.reserve(m * nr * sizeof(T) + 64));
  std::memset(acc, 0, m * nr * sizeof(T));
  for (std::size_t p = 0; p < k; ++p) {
    const T* ap = a + p * lda;
    const reg b0 = V::load(bp + p * nr);
    const reg b1 = V::load(bp + p * nr + w);
    for (std::size_t i = 0; i < m; ++i) {
      const reg av = V::set1(ap[i]);
      T* ai = acc + i * nr;
      V::store(ai, V::fmadd(av, b0, V::load(ai)));
      if constexpr (Two) V::store(ai + w, V::fmadd(av, b1, V::load(ai + w)));
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] += acc[i * nr + j];
  }
}

template <typename T>
void gemm_impl(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha,
               const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c,
               std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * ldc;
    if (beta == T(0)) {
      std::memset(crow, 0, n * sizeof(T));
    } else if (beta != T(1)) {
      for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
    }
  }
  if (m == 0 || n == 0 || k == 0 || alpha == T(0)) return;

  constexpr std::size_t nr_full = 2 * Vec<T>::kWidth;
  if (n <= Vec<T>::kWidth) {
    gemm_narrow<T, false>(ta, tb, m, n, k, alpha, a, lda, b, ldb, c, ldc);
    return;
  }
  if (n <= nr_full) {
    gemm_narrow<T, true>(ta, tb, m, n, k, alpha, a, lda, b, ldb, c, ldc);
    return;
  }
  const std::size_t nc_max = min_sz(kNc, (n + nr_full - 1) / nr_full * nr_full);
  const std::size_t kc_max = min_sz(kKc, k);
  const std::size_t mc_max = min_sz(kMc, (m + kMr - 1) / kMr * kMr);
  T* bbuf = static_cast<T*>(g_pack_b.reserve(nc_max * kc_max * sizeof(T) + 64));
  T* abuf = static_cast<T*>(g_pack_a.reserve(mc_max * kc_max * sizeof(T) + 64));

  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = min_sz(kNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = min_sz(kKc, k - pc);
      pack_b(tb, b, ldb, pc, kc, jc, nc, bbuf);
      for (std::size_t ic = 0; ic < m; ic += kMc) {
        const std::size_t mc = min_sz(kMc, m - ic);
        pack_a(ta, a, lda, ic, mc, pc, kc, alpha, abuf);
        for (std::size_t jr = 0; jr < nc; jr += nr_full) {
          const std::size_t nr = min_sz(nr_full, nc - jr);
          const T* bp = bbuf + (jr / nr_full) * kc * nr_full;
          for (std::size_t ir = 0; ir < mc; ir += kMr) {
            const std::size_t mr = min_sz(kMr, mc - ir);
            const T* ap = abuf + (ir / kMr) * kc * kMr;
            micro_kernel(kc, ap, bp, c + (ic + ir) * ldc + jc + jr, ldc, mr, nr);
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise kernels.

template <typename T>
T dot_impl(const T* x, const T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  auto acc0 = V::zero();
  auto acc1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * w <= n; i += 2 * w) {
    acc0 = V::fmadd(V::load(x + i), V::load(y + i), acc0);
    acc1 = V::fmadd(V::load(x + i + w), V::load(y + i + w), acc1);
  }
  for (; i + w <= n; i += w) acc0 = V::fmadd(V::load(x + i), V::load(y + i), acc0);
  T s = V::hsum(V::add(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

template <typename T>
void axpy_impl(T alpha, const T* x, T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  const auto va = V::set1(alpha);
  std::size_t i = 0;
  for (; i + w <= n; i += w) V::store(y + i, V::fmadd(va, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr double inv_factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return 1.0 / f;
}

// exp(x) = 2^n * exp(r), |r| <= ln2/2, exp(r) by a truncated Taylor series in
// Horner form (degree 7 for float, 13 for double).
template <typename T>
typename Vec<T>::reg exp_vec(typename Vec<T>::reg x) {
  using V = Vec<T>;
  x = V::min(V::max(x, V::set1(V::kExpLo)), V::set1(V::kExpHi));
  const auto n = V::round(V::mul(x, V::set1(T(1.4426950408889634))));
  auto r = V::fnmadd(n, V::set1(T(0.693145751953125)), x);
  r = V::fnmadd(n, V::set1(T(1.4286068203094172321e-6)), r);
  auto p = V::set1(T(inv_factorial(V::kExpDegree)));
#pragma GCC unroll 13
  for (int i = V::kExpDegree - 1; i >= 0; --i) {
    p = V::fmadd(p, r, V::set1(T(inv_factorial(i))));
  }
  return V::mul(p, V::pow2n(n));
}

template <typename T>
T exp_scalar_tail(T v) {
  alignas(32) T buf[Vec<T>::kWidth] = {};
  buf[0] = v;
  Vec<T>::store(buf, exp_vec<T>(Vec<T>::load(buf)));
  return buf[0];
}

template <typename T>
void exp_impl(T* x, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  std::size_t i = 0;
  for (; i + w <= n; i += w) V::store(x + i, exp_vec<T>(V::load(x + i)));
  for (; i < n; ++i) x[i] = exp_scalar_tail(x[i]);
}

template <typename T>
void softmax_impl(T* x, std::size_t n) {
  if (n == 0) return;
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  std::size_t i = 0;
  T mx = x[0];
  if (n >= w) {
    auto vm = V::load(x);
    for (i = w; i + w <= n; i += w) vm = V::max(vm, V::load(x + i));
    mx = V::hmax(vm);
  }
  for (; i < n; ++i) mx = x[i] > mx ? x[i] : mx;

  const auto vmx = V::set1(mx);
  auto vs = V::zero();
  for (i = 0; i + w <= n; i += w) {
    const auto e = exp_vec<T>(V::sub(V::load(x + i), vmx));
    V::store(x + i, e);
    vs = V::add(vs, e);
  }
  T sum = V::hsum(vs);
  for (; i < n; ++i) {
    x[i] = exp_scalar_tail(T(x[i] - mx));
    sum += x[i];
  }
  const T inv = T(1) / sum;
  const auto vinv = V::set1(inv);
  for (i = 0; i + w <= n; i += w) V::store(x + i, V::mul(V::load(x + i), vinv));
  for (; i < n; ++i) x[i] *= inv;
}

constexpr double kGeluC = 0.7978845608028654;
constexpr double kGeluA = 0.044715;

// tanh(u) = 1 - 2 / (exp(2u) + 1)
template <typename T>
typename Vec<T>::reg tanh_vec(typename Vec<T>::reg u) {
  using V = Vec<T>;
  const auto e = exp_vec<T>(V::add(u, u));
  return V::sub(V::set1(T(1)), V::div(V::set1(T(2)), V::add(e, V::set1(T(1)))));
}

template <typename T>
void gelu_impl(const T* x, T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  const auto c = V::set1(T(kGeluC));
  const auto a = V::set1(T(kGeluA));
  const auto half = V::set1(T(0.5));
  const auto one = V::set1(T(1));
  std::size_t i = 0;
  for (; i + w <= n; i += w) {
    const auto v = V::load(x + i);
    const auto v3 = V::mul(V::mul(v, v), v);
    const auto u = V::mul(c, V::fmadd(a, v3, v));
    const auto t = tanh_vec<T>(u);
    V::store(y + i, V::mul(V::mul(half, v), V::add(one, t)));
  }
  if (i < n) {
    alignas(32) T xin[w] = {};
    alignas(32) T yout[w];
    for (std::size_t j = i; j < n; ++j) xin[j - i] = x[j];
    gelu_impl(xin, yout, w);
    for (std::size_t j = i; j < n; ++j) y[j] = yout[j - i];
  }
}

template <typename T>
void gelu_backward_impl(const T* x, const T* dy, T* dx, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  const auto c = V::set1(T(kGeluC));
  const auto a = V::set1(T(kGeluA));
  const auto a3 = V::set1(T(3 * kGeluA));
  const auto half = V::set1(T(0.5));
  const auto one = V::set1(T(1));
  std::size_t i = 0;
  for (; i + w <= n; i += w) {
    const auto v = V::load(x + i);
    const auto v2 = V::mul(v, v);
    const auto u = V::mul(c, V::fmadd(V::mul(a, v2), v, v));
    const auto t = tanh_vec<T>(u);
    const auto du = V::mul(c, V::fmadd(a3, v2, one));
    const auto sech2 = V::fnmadd(t, t, one);
    const auto g = V::fmadd(V::mul(V::mul(half, v), sech2), du, V::mul(half, V::add(one, t)));
    V::store(dx + i, V::mul(V::load(dy + i), g));
  }
  if (i < n) {
    alignas(32) T xin[w] = {};
    alignas(32) T dyin[w] = {};
    alignas(32) T dxout[w];
    for (std::size_t j = i; j < n; ++j) {
      xin[j - i] = x[j];
      dyin[j - i] = dy[j];
    }
    gelu_backward_impl(xin, dyin, dxout, w);
    for (std::size_t j = i; j < n; ++j) dx[j] = dxout[j - i];
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

void axpy(float alpha, const float* x, float* y, std::size_t n) { axpy_impl(alpha, x, y, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { axpy_impl(alpha, x, y, n); }

void exp_inplace(float* x, std::size_t n) { exp_impl(x, n); }
void exp_inplace(double* x, std::size_t n) { exp_impl(x, n); }

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

}  // namespace neurobolt::simd::avx2
