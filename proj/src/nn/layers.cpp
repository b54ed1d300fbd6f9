// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstring>

#include "neurobolt/error.hpp"
#include "neurobolt/nn.hpp"
#include "neurobolt/simd/kernels.hpp"

namespace neurobolt::nn {

using simd::Trans;

namespace {

template <typename T>
void ensure(Matrix<T>& m, std::size_t rows, std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols) m.resize(rows, cols);
}

template <typename T>
void add_row_broadcast(T* y, std::size_t n, std::size_t cols, const T* b) {
  for (std::size_t i = 0; i < n; ++i) simd::axpy(T(1), b, y + i * cols, cols);
}

template <typename T>
void accumulate_colsum(const T* dy, std::size_t n, std::size_t cols, T* out) {
  for (std::size_t i = 0; i < n; ++i) simd::axpy(T(1), dy + i * cols, out, cols);
}

// Group normalization over a (P * L) x ch map: statistics per patch and
// channel group, affine per channel. y is overwritten with the output.
template <typename T>
void gn_forward(Matrix<T>& y, std::size_t len, std::size_t groups, const Param<T>& gamma,
                const Param<T>& beta, Matrix<T>& xh, Matrix<T>& rstd) {
  constexpr double kEps = 1e-5;
  const std::size_t ch = y.cols();
  const std::size_t patches = y.rows() / len;
  const std::size_t cg = ch / groups;
  ensure(xh, y.rows(), ch);
  ensure(rstd, patches, groups);
  const double count = static_cast<double>(len * cg);
  for (std::size_t p = 0; p < patches; ++p) {
    for (std::size_t g = 0; g < groups; ++g) {
      double mean = 0.0;
      for (std::size_t l = 0; l < len; ++l) {
        const T* row = y.row(p * len + l).data() + g * cg;
        for (std::size_t c = 0; c < cg; ++c) mean += row[c];
      }
      mean /= count;
      double var = 0.0;
      for (std::size_t l = 0; l < len; ++l) {
        const T* row = y.row(p * len + l).data() + g * cg;
        for (std::size_t c = 0; c < cg; ++c) {
          const double dv = row[c] - mean;
          var += dv * dv;
        }
      }
      var /= count;
      const T rs = static_cast<T>(1.0 / std::sqrt(var + kEps));
      rstd(p, g) = rs;
      for (std::size_t l = 0; l < len; ++l) {
        T* row = y.row(p * len + l).data();
        T* hrow = xh.row(p * len + l).data();
        for (std::size_t c = g * cg; c < (g + 1) * cg; ++c) {
          hrow[c] = (row[c] - static_cast<T>(mean)) * rs;
          row[c] = hrow[c] * gamma.value(0, c) + beta.value(0, c);
        }
      }
    }
  }
}

// dy (dL/d output) is replaced by dL/d input.
template <typename T>
void gn_backward(Matrix<T>& dy, std::size_t len, std::size_t groups, Param<T>& gamma,
                 Param<T>& beta, const Matrix<T>& xh, const Matrix<T>& rstd) {
  const std::size_t ch = dy.cols();
  const std::size_t patches = dy.rows() / len;
  const std::size_t cg = ch / groups;
  const T count = static_cast<T>(len * cg);
  for (std::size_t p = 0; p < patches; ++p) {
    for (std::size_t g = 0; g < groups; ++g) {
      T sum_d = 0;
      T sum_dx = 0;
      for (std::size_t l = 0; l < len; ++l) {
        T* drow = dy.row(p * len + l).data();
        const T* hrow = xh.row(p * len + l).data();
        for (std::size_t c = g * cg; c < (g + 1) * cg; ++c) {
          gamma.grad(0, c) += drow[c] * hrow[c];
          beta.grad(0, c) += drow[c];
          drow[c] *= gamma.value(0, c);  // now dxhat
          sum_d += drow[c];
          sum_dx += drow[c] * hrow[c];
        }
      }
      const T md = sum_d / count;
      const T mdx = sum_dx / count;
      const T rs = rstd(p, g);
      for (std::size_t l = 0; l < len; ++l) {
        T* drow = dy.row(p * len + l).data();
        const T* hrow = xh.row(p * len + l).data();
        for (std::size_t c = g * cg; c < (g + 1) * cg; ++c) {
          drow[c] = rs * (drow[c] - md - hrow[c] * mdx);
        }
      }
    }
  }
}

// Kernel-3, padding-1 im2col of a (P * L) x ch map: row (p, l) holds
// x[(p, l - 1)], x[(p, l)], x[(p, l + 1)] (zeros outside the patch).
template <typename T>
void im2col3(const Matrix<T>& x, std::size_t len, Matrix<T>& col) {
  const std::size_t ch = x.cols();
  const std::size_t rows = x.rows();
  ensure(col, rows, 3 * ch);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t l = r % len;
    T* out = col.row(r).data();
    for (std::size_t j = 0; j < 3; ++j) {
      const long src = static_cast<long>(l) + static_cast<long>(j) - 1;
      if (src < 0 || src >= static_cast<long>(len)) {
        std::fill(out + j * ch, out + (j + 1) * ch, T(0));
      } else {
        std::memcpy(out + j * ch, x.row(r - l + static_cast<std::size_t>(src)).data(),
                    ch * sizeof(T));
      }
    }
  }
}

template <typename T>
void col2im3(const Matrix<T>& dcol, std::size_t len, Matrix<T>& dx) {
  const std::size_t ch = dcol.cols() / 3;
  const std::size_t rows = dcol.rows();
  ensure(dx, rows, ch);
  dx.set_zero();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t l = r % len;
    const T* in = dcol.row(r).data();
    for (std::size_t j = 0; j < 3; ++j) {
      const long dst = static_cast<long>(l) + static_cast<long>(j) - 1;
      if (dst < 0 || dst >= static_cast<long>(len)) continue;
      simd::axpy(T(1), in + j * ch, dx.row(r - l + static_cast<std::size_t>(dst)).data(), ch);
    }
  }
}

template <typename T>
void conv_backward(const Matrix<T>& col, const Matrix<T>& dy, Param<T>& w, Param<T>& b,
                   Matrix<T>* dcol) {
  const std::size_t rows = col.rows();
  const std::size_t k = col.cols();
  const std::size_t ch = dy.cols();
  simd::gemm(Trans::kYes, Trans::kNo, k, ch, rows, T(1), col.data(), k, dy.data(), ch, T(1),
             w.grad.data(), ch);
  accumulate_colsum(dy.data(), rows, ch, b.grad.data());
  if (dcol != nullptr) {
    ensure(*dcol, rows, k);
    simd::gemm(Trans::kNo, Trans::kYes, rows, k, ch, T(1), dy.data(), ch, w.value.data(), ch, T(0),
               dcol->data(), k);
  }
}

}  // namespace

template <typename T>
void trunc_normal(Matrix<T>& m, Rng& rng, double stddev) {
  for (auto& v : m.flat()) v = static_cast<T>(rng.truncated_normal(stddev));
}

// ---------------------------------------------------------------------------
// Linear

template <typename T>
void Linear<T>::init(std::size_t in_features, std::size_t out_features, Rng& rng, double stddev) {
  in = in_features;
  out = out_features;
  weight.init(in, out);
  bias.init(1, out);
  trunc_normal(weight.value, rng, stddev);
}

template <typename T>
void Linear<T>::forward(const T* x, std::size_t n, T* y) const {
  simd::gemm(Trans::kNo, Trans::kNo, n, out, in, T(1), x, in, weight.value.data(), out, T(0), y,
             out);
  add_row_broadcast(y, n, out, bias.value.data());
}

template <typename T>
void Linear<T>::backward(const T* x, const T* dy, std::size_t n, T* dx) {
  simd::gemm(Trans::kYes, Trans::kNo, in, out, n, T(1), x, in, dy, out, T(1), weight.grad.data(),
             out);
  accumulate_colsum(dy, n, out, bias.grad.data());
  if (dx != nullptr) {
    simd::gemm(Trans::kNo, Trans::kYes, n, in, out, T(1), dy, out, weight.value.data(), out, T(0),
               dx, in);
  }
}

template <typename T>
void Linear<T>::collect(ParamList<T>& list, const std::string& prefix, ParamKind weight_kind,
                        int layer, int n_layers) {
  list.push_back({prefix + ".weight", &weight, weight_kind, layer, n_layers});
  list.push_back({prefix + ".bias", &bias, ParamKind::kBias, layer, n_layers});
}

// ---------------------------------------------------------------------------
// LayerNorm

template <typename T>
void LayerNorm<T>::init(std::size_t dim) {
  d = dim;
  gamma.init(1, d);
  beta.init(1, d);
  gamma.value.fill(T(1));
}

template <typename T>
void LayerNorm<T>::forward(const Matrix<T>& x, Matrix<T>& y, LayerNormCache<T>* cache) const {
  const std::size_t n = x.rows();
  ensure(y, n, d);
  if (cache != nullptr) {
    ensure(cache->xhat, n, d);
    cache->rstd.resize(n);
  }
  const T* g = gamma.value.data();
  const T* b = beta.value.data();
  for (std::size_t i = 0; i < n; ++i) {
    const T* xr = x.row(i).data();
    T mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<T>(d);
    const T rs = T(1) / std::sqrt(var + static_cast<T>(kEps));
    T* yr = y.row(i).data();
    T* hr = cache != nullptr ? cache->xhat.row(i).data() : nullptr;
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (xr[j] - mean) * rs;
      if (hr != nullptr) hr[j] = h;
      yr[j] = h * g[j] + b[j];
    }
    if (cache != nullptr) cache->rstd[i] = rs;
  }
}

template <typename T>
void LayerNorm<T>::backward(const Matrix<T>& dy, const LayerNormCache<T>& cache, Matrix<T>& dx,
                            bool accumulate) {
  const std::size_t n = dy.rows();
  if (!accumulate) {
    ensure(dx, n, d);
    dx.set_zero();
  }
  const T* g = gamma.value.data();
  T* dg = gamma.grad.data();
  T* db = beta.grad.data();
  const T inv_d = T(1) / static_cast<T>(d);
  for (std::size_t i = 0; i < n; ++i) {
    const T* dyr = dy.row(i).data();
    const T* hr = cache.xhat.row(i).data();
    T* dxr = dx.row(i).data();
    T sum_d = 0;
    T sum_dh = 0;
    for (std::size_t j = 0; j < d; ++j) {
      dg[j] += dyr[j] * hr[j];
      db[j] += dyr[j];
      const T dxh = dyr[j] * g[j];
      sum_d += dxh;
      sum_dh += dxh * hr[j];
    }
    const T md = sum_d * inv_d;
    const T mdh = sum_dh * inv_d;
    const T rs = cache.rstd[i];
    for (std::size_t j = 0; j < d; ++j) {
      dxr[j] += rs * (dyr[j] * g[j] - md - hr[j] * mdh);
    }
  }
}

template <typename T>
void LayerNorm<T>::collect(ParamList<T>& list, const std::string& prefix, int layer,
                           int n_layers) {
  list.push_back({prefix + ".gamma", &gamma, ParamKind::kNorm, layer, n_layers});
  list.push_back({prefix + ".beta", &beta, ParamKind::kNorm, layer, n_layers});
}

// ---------------------------------------------------------------------------
// Attention

template <typename T>
void Attention<T>::init(std::size_t dim, std::size_t n_heads, Rng& rng) {
  if (n_heads == 0 || dim % n_heads != 0) {
    throw InvalidArgument("attention: width " + std::to_string(dim) +
                          " is not divisible by heads " + std::to_string(n_heads));
  }
  d = dim;
  heads = n_heads;
  low_rank = false;
  rank = 0;
  n_max = 0;
  qkv.init(d, 3 * d, rng);
  proj.init(d, d, rng);
}

template <typename T>
void Attention<T>::init_low_rank(std::size_t dim, std::size_t n_heads, std::size_t r,
                                 std::size_t max_tokens, Rng& rng) {
  init(dim, n_heads, rng);
  if (r == 0 || r > max_tokens) {
    throw InvalidArgument("attention: rank " + std::to_string(r) + " must be in [1, " +
                          std::to_string(max_tokens) + "]");
  }
  low_rank = true;
  rank = r;
  n_max = max_tokens;
  e.init(rank, n_max);
  f.init(rank, n_max);
  trunc_normal(e.value, rng, 0.02);
  trunc_normal(f.value, rng, 0.02);
}

template <typename T>
void Attention<T>::forward(const Matrix<T>& x, Matrix<T>& y, AttentionCache<T>& c) const {
  const std::size_t n = x.rows();
  const std::size_t m = low_rank ? rank : n;
  if (low_rank && (n > n_max || rank > n)) {
    throw InvalidArgument("attention: " + std::to_string(n) + " tokens with rank " +
                          std::to_string(rank) + " and capacity " + std::to_string(n_max));
  }
  const std::size_t dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  ensure(c.qkv, n, 3 * d);
  qkv.forward(x.data(), n, c.qkv.data());
  ensure(c.k, n, d);
  ensure(c.v, n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = c.qkv.row(i).data();
    std::memcpy(c.k.row(i).data(), row + d, d * sizeof(T));
    std::memcpy(c.v.row(i).data(), row + 2 * d, d * sizeof(T));
  }
  if (low_rank) {
    ensure(c.kp, m, d);
    ensure(c.vp, m, d);
    simd::gemm(Trans::kNo, Trans::kNo, m, d, n, T(1), e.value.data(), n_max, c.k.data(), d, T(0),
               c.kp.data(), d);
    simd::gemm(Trans::kNo, Trans::kNo, m, d, n, T(1), f.value.data(), n_max, c.v.data(), d, T(0),
               c.vp.data(), d);
  } else {
    c.kp = c.k;
    c.vp = c.v;
  }
  ensure(c.probs, heads * n, m);
  ensure(c.o, n, d);
  for (std::size_t h = 0; h < heads; ++h) {
    T* p = c.probs.data() + h * n * m;
    simd::gemm(Trans::kNo, Trans::kYes, n, m, dh, scale, c.qkv.data() + h * dh, 3 * d,
               c.kp.data() + h * dh, d, T(0), p, m);
    for (std::size_t i = 0; i < n; ++i) simd::softmax_row(p + i * m, m);
    simd::gemm(Trans::kNo, Trans::kNo, n, dh, m, T(1), p, m, c.vp.data() + h * dh, d, T(0),
               c.o.data() + h * dh, d);
  }
  ensure(y, n, d);
  proj.forward(c.o.data(), n, y.data());
}

template <typename T>
void Attention<T>::backward(const Matrix<T>& x, const Matrix<T>& dy, AttentionCache<T>& c,
                            Matrix<T>& dx) {
  const std::size_t n = x.rows();
  const std::size_t m = low_rank ? rank : n;
  const std::size_t dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));

  ensure(c.dout, n, d);
  proj.backward(c.o.data(), dy.data(), n, c.dout.data());

  ensure(c.dqkv, n, 3 * d);
  ensure(c.dkp, m, d);
  ensure(c.dvp, m, d);
  ensure(c.dp, n, m);
  for (std::size_t h = 0; h < heads; ++h) {
    const T* p = c.probs.data() + h * n * m;
    const T* dout_h = c.dout.data() + h * dh;
    simd::gemm(Trans::kNo, Trans::kYes, n, m, dh, T(1), dout_h, d, c.vp.data() + h * dh, d, T(0),
               c.dp.data(), m);
    simd::gemm(Trans::kYes, Trans::kNo, m, dh, n, T(1), p, m, dout_h, d, T(0),
               c.dvp.data() + h * dh, d);
    for (std::size_t i = 0; i < n; ++i) {
      T* dr = c.dp.data() + i * m;
      const T* pr = p + i * m;
      const T s = simd::dot(dr, pr, m);
      for (std::size_t j = 0; j < m; ++j) dr[j] = pr[j] * (dr[j] - s) * scale;
    }
    simd::gemm(Trans::kNo, Trans::kNo, n, dh, m, T(1), c.dp.data(), m, c.kp.data() + h * dh, d,
               T(0), c.dqkv.data() + h * dh, 3 * d);
    simd::gemm(Trans::kYes, Trans::kNo, m, dh, n, T(1), c.dp.data(), m, c.qkv.data() + h * dh,
               3 * d, T(0), c.dkp.data() + h * dh, d);
  }
  if (low_rank) {
    simd::gemm(Trans::kYes, Trans::kNo, n, d, m, T(1), e.value.data(), n_max, c.dkp.data(), d,
               T(0), c.dqkv.data() + d, 3 * d);
    simd::gemm(Trans::kYes, Trans::kNo, n, d, m, T(1), f.value.data(), n_max, c.dvp.data(), d,
               T(0), c.dqkv.data() + 2 * d, 3 * d);
    simd::gemm(Trans::kNo, Trans::kYes, m, n, d, T(1), c.dkp.data(), d, c.k.data(), d, T(1),
               e.grad.data(), n_max);
    simd::gemm(Trans::kNo, Trans::kYes, m, n, d, T(1), c.dvp.data(), d, c.v.data(), d, T(1),
               f.grad.data(), n_max);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      T* row = c.dqkv.row(i).data();
      std::memcpy(row + d, c.dkp.row(i).data(), d * sizeof(T));
      std::memcpy(row + 2 * d, c.dvp.row(i).data(), d * sizeof(T));
    }
  }
  ensure(dx, n, d);
  qkv.backward(x.data(), c.dqkv.data(), n, dx.data());
}

template <typename T>
void Attention<T>::collect(ParamList<T>& list, const std::string& prefix, int layer,
                           int n_layers) {
  qkv.collect(list, prefix + ".qkv", ParamKind::kWeight, layer, n_layers);
  proj.collect(list, prefix + ".proj", ParamKind::kWeight, layer, n_layers);
  if (low_rank) {
    list.push_back({prefix + ".E", &e, ParamKind::kWeight, layer, n_layers});
    list.push_back({prefix + ".F", &f, ParamKind::kWeight, layer, n_layers});
  }
}

template <typename T>
Matrix<T> dense_attention_reference(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v,
                                    std::size_t heads) {
  const std::size_t n = q.rows();
  const std::size_t d = q.cols();
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix<T> out(n, d);
  std::vector<double> w(k.rows());
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -HUGE_VAL;
      for (std::size_t j = 0; j < k.rows(); ++j) {
        double s = 0.0;
        for (std::size_t t = h * dh; t < (h + 1) * dh; ++t) s += double(q(i, t)) * double(k(j, t));
        w[j] = s * scale;
        mx = std::max(mx, w[j]);
      }
      double z = 0.0;
      for (auto& x : w) z += (x = std::exp(x - mx));
      for (std::size_t t = h * dh; t < (h + 1) * dh; ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k.rows(); ++j) acc += w[j] * double(v(j, t));
        out(i, t) = static_cast<T>(acc / z);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block

template <typename T>
void Block<T>::init(std::size_t d, std::size_t heads, std::size_t ff_mult, Rng& rng) {
  ln1.init(d);
  attn.init(d, heads, rng);
  ln2.init(d);
  fc1.init(d, ff_mult * d, rng);
  fc2.init(ff_mult * d, d, rng);
}

template <typename T>
void Block<T>::init_low_rank(std::size_t d, std::size_t heads, std::size_t ff_mult,
                             std::size_t rank, std::size_t n_max, Rng& rng) {
  ln1.init(d);
  attn.init_low_rank(d, heads, rank, n_max, rng);
  ln2.init(d);
  fc1.init(d, ff_mult * d, rng);
  fc2.init(ff_mult * d, d, rng);
}

template <typename T>
void Block<T>::forward(Matrix<T>& x, BlockCache<T>& c, const Stochastic& st) const {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const bool train = st.rng != nullptr;
  const auto path_scale = [&]() -> T {
    if (!train || st.drop_path <= 0.0) return T(1);
    return st.rng->uniform() < st.drop_path ? T(0) : static_cast<T>(1.0 / (1.0 - st.drop_path));
  };
  c.path_attn = path_scale();
  c.path_ff = path_scale();

  if (c.path_attn != T(0)) {
    ln1.forward(x, c.h1, &c.ln1);
    attn.forward(c.h1, c.a, c.attn);
    if (train && st.attn_dropout > 0.0) {
      ensure(c.attn_mask, n, d);
      const T keep = static_cast<T>(1.0 / (1.0 - st.attn_dropout));
      for (auto& mv : c.attn_mask.flat()) mv = st.rng->uniform() < st.attn_dropout ? T(0) : keep;
      T* a = c.a.data();
      const T* mk = c.attn_mask.data();
      for (std::size_t i = 0; i < n * d; ++i) a[i] *= mk[i];
    } else {
      c.attn_mask = Matrix<T>();
    }
    simd::axpy(c.path_attn, c.a.data(), x.data(), n * d);
  }
  if (c.path_ff != T(0)) {
    const std::size_t hidden = fc1.out;
    ln2.forward(x, c.h2, &c.ln2);
    ensure(c.f, n, hidden);
    ensure(c.g, n, hidden);
    ensure(c.m, n, d);
    fc1.forward(c.h2.data(), n, c.f.data());
    simd::gelu(c.f.data(), c.g.data(), n * hidden);
    fc2.forward(c.g.data(), n, c.m.data());
    simd::axpy(c.path_ff, c.m.data(), x.data(), n * d);
  }
}

template <typename T>
void Block<T>::backward(Matrix<T>& dx, BlockCache<T>& c) {
  const std::size_t n = dx.rows();
  const std::size_t d = dx.cols();
  if (c.path_ff != T(0)) {
    const std::size_t hidden = fc1.out;
    ensure(c.dtmp, n, d);
    ensure(c.dg, n, hidden);
    ensure(c.df, n, hidden);
    ensure(c.dh, n, d);
    const T* src = dx.data();
    T* dm = c.dtmp.data();
    for (std::size_t i = 0; i < n * d; ++i) dm[i] = c.path_ff * src[i];
    fc2.backward(c.g.data(), dm, n, c.dg.data());
    simd::gelu_backward(c.f.data(), c.dg.data(), c.df.data(), n * hidden);
    fc1.backward(c.h2.data(), c.df.data(), n, c.dh.data());
    ln2.backward(c.dh, c.ln2, dx, true);
  }
  if (c.path_attn != T(0)) {
    ensure(c.dtmp, n, d);
    const T* src = dx.data();
    T* da = c.dtmp.data();
    for (std::size_t i = 0; i < n * d; ++i) da[i] = c.path_attn * src[i];
    if (!c.attn_mask.empty()) {
      const T* mk = c.attn_mask.data();
      for (std::size_t i = 0; i < n * d; ++i) da[i] *= mk[i];
    }
    attn.backward(c.h1, c.dtmp, c.attn, c.dh);
    ln1.backward(c.dh, c.ln1, dx, true);
  }
}

template <typename T>
void Block<T>::collect(ParamList<T>& list, const std::string& prefix, int layer, int n_layers) {
  ln1.collect(list, prefix + ".ln1", layer, n_layers);
  attn.collect(list, prefix + ".attn", layer, n_layers);
  ln2.collect(list, prefix + ".ln2", layer, n_layers);
  fc1.collect(list, prefix + ".fc1", ParamKind::kWeight, layer, n_layers);
  fc2.collect(list, prefix + ".fc2", ParamKind::kWeight, layer, n_layers);
}

// ---------------------------------------------------------------------------
// PatchEncoder

std::size_t conv1_stride(std::size_t w, std::size_t positions) {
  if (positions == 0 || positions > w) {
    throw InvalidArgument("patch encoder: " + std::to_string(positions) +
                          " output positions do not fit a patch of " + std::to_string(w));
  }
  return positions == 1 ? w : (w - 1) / (positions - 1);
}

template <typename T>
void PatchEncoder<T>::init(std::size_t w, std::size_t d, std::size_t channels,
                           std::size_t gn_groups, Rng& rng) {
  if (channels == 0 || d % channels != 0) {
    throw InvalidArgument("patch encoder: width " + std::to_string(d) +
                          " is not divisible by conv channels " + std::to_string(channels));
  }
  if (gn_groups == 0 || channels % gn_groups != 0) {
    throw InvalidArgument("patch encoder: conv channels " + std::to_string(channels) +
                          " not divisible by groups " + std::to_string(gn_groups));
  }
  width = w;
  ch = channels;
  positions = d / ch;
  stride = conv1_stride(w, positions);
  groups = gn_groups;
  w1.init(kKernel1, ch);
  b1.init(1, ch);
  g1.init(1, ch);
  be1.init(1, ch);
  w2.init(kKernel2 * ch, ch);
  b2.init(1, ch);
  g2.init(1, ch);
  be2.init(1, ch);
  w3.init(kKernel2 * ch, ch);
  b3.init(1, ch);
  g3.init(1, ch);
  be3.init(1, ch);
  trunc_normal(w1.value, rng, 0.02);
  trunc_normal(w2.value, rng, 0.02);
  trunc_normal(w3.value, rng, 0.02);
  g1.value.fill(T(1));
  g2.value.fill(T(1));
  g3.value.fill(T(1));
}

template <typename T>
void PatchEncoder<T>::forward(const Matrix<T>& patches, Matrix<T>& out,
                              PatchEncoderCache<T>& c) const {
  if (patches.cols() != width) {
    throw InvalidArgument("patch encoder: patch width " + std::to_string(patches.cols()) +
                          " != configured " + std::to_string(width));
  }
  const std::size_t np = patches.rows();
  const std::size_t rows = np * positions;
  ensure(c.col1, rows, kKernel1);
  for (std::size_t p = 0; p < np; ++p) {
    const T* src = patches.row(p).data();
    for (std::size_t l = 0; l < positions; ++l) {
      T* dst = c.col1.row(p * positions + l).data();
      const long base = static_cast<long>(l * stride) - static_cast<long>(kPad1);
      for (std::size_t j = 0; j < kKernel1; ++j) {
        const long idx = base + static_cast<long>(j);
        dst[j] = (idx < 0 || idx >= static_cast<long>(width)) ? T(0) : src[idx];
      }
    }
  }
  const auto conv = [&](const Matrix<T>& col, const Param<T>& wt, const Param<T>& b, Matrix<T>& y) {
    ensure(y, rows, ch);
    simd::gemm(Trans::kNo, Trans::kNo, rows, ch, col.cols(), T(1), col.data(), col.cols(),
               wt.value.data(), ch, T(0), y.data(), ch);
    add_row_broadcast(y.data(), rows, ch, b.value.data());
  };
  conv(c.col1, w1, b1, c.y1);
  gn_forward(c.y1, positions, groups, g1, be1, c.xh1, c.rstd1);
  ensure(c.a1, rows, ch);
  simd::gelu(c.y1.data(), c.a1.data(), rows * ch);

  im2col3(c.a1, positions, c.col2);
  conv(c.col2, w2, b2, c.y2);
  gn_forward(c.y2, positions, groups, g2, be2, c.xh2, c.rstd2);
  ensure(c.a2, rows, ch);
  simd::gelu(c.y2.data(), c.a2.data(), rows * ch);

  im2col3(c.a2, positions, c.col3);
  conv(c.col3, w3, b3, c.y3);
  gn_forward(c.y3, positions, groups, g3, be3, c.xh3, c.rstd3);
  ensure(out, np, positions * ch);
  simd::gelu(c.y3.data(), out.data(), rows * ch);
}

template <typename T>
void PatchEncoder<T>::backward(const Matrix<T>& dout, PatchEncoderCache<T>& c) {
  const std::size_t rows = dout.rows() * positions;
  ensure(c.dy, rows, ch);
  simd::gelu_backward(c.y3.data(), dout.data(), c.dy.data(), rows * ch);
  gn_backward(c.dy, positions, groups, g3, be3, c.xh3, c.rstd3);
  conv_backward(c.col3, c.dy, w3, b3, &c.dcol);
  col2im3(c.dcol, positions, c.da);

  simd::gelu_backward(c.y2.data(), c.da.data(), c.dy.data(), rows * ch);
  gn_backward(c.dy, positions, groups, g2, be2, c.xh2, c.rstd2);
  conv_backward(c.col2, c.dy, w2, b2, &c.dcol);
  col2im3(c.dcol, positions, c.da);

  simd::gelu_backward(c.y1.data(), c.da.data(), c.dy.data(), rows * ch);
  gn_backward(c.dy, positions, groups, g1, be1, c.xh1, c.rstd1);
  conv_backward<T>(c.col1, c.dy, w1, b1, nullptr);
}

template <typename T>
void PatchEncoder<T>::collect(ParamList<T>& list, const std::string& prefix, int layer,
                              int n_layers) {
  const auto conv = [&](const char* name, Param<T>& wt, Param<T>& b, Param<T>& g, Param<T>& be) {
    list.push_back({prefix + "." + name + ".weight", &wt, ParamKind::kWeight, layer, n_layers});
    list.push_back({prefix + "." + name + ".bias", &b, ParamKind::kBias, layer, n_layers});
    list.push_back({prefix + "." + name + ".gn_gamma", &g, ParamKind::kNorm, layer, n_layers});
    list.push_back({prefix + "." + name + ".gn_beta", &be, ParamKind::kNorm, layer, n_layers});
  };
  conv("conv1", w1, b1, g1, be1);
  conv("conv2", w2, b2, g2, be2);
  conv("conv3", w3, b3, g3, be3);
}

#define NEUROBOLT_INSTANTIATE(T)                                                               \
  template void trunc_normal<T>(Matrix<T>&, Rng&, double);                                     \
  template struct Linear<T>;                                                                   \
  template struct LayerNorm<T>;                                                                \
  template struct Attention<T>;                                                                \
  template struct Block<T>;                                                                    \
  template struct PatchEncoder<T>;                                                             \
  template Matrix<T> dense_attention_reference<T>(const Matrix<T>&, const Matrix<T>&,          \
                                                  const Matrix<T>&, std::size_t);

NEUROBOLT_INSTANTIATE(float)
NEUROBOLT_INSTANTIATE(double)
#undef NEUROBOLT_INSTANTIATE

}  // namespace neurobolt::nn
