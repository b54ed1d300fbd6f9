// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/spec_encoder.hpp"

#include <cmath>

#include "neurobolt/error.hpp"
#include "neurobolt/fft.hpp"
#include "neurobolt/simd/kernels.hpp"

namespace neurobolt {

using simd::Trans;

template <typename T>
SpectralPyramid<T> multiscale_spectra(const Matrix<T>& x, std::size_t w_b, std::size_t max_level,
                                      bool log1p) {
  if (w_b == 0 || w_b % 2 != 0) {
    throw InvalidArgument("multiscale_spectra: base window " + std::to_string(w_b) +
                          " must be positive and even");
  }
  const std::size_t top = w_b << max_level;
  const std::size_t t = x.cols();
  if (t == 0 || t % top != 0) {
    throw InvalidArgument("multiscale_spectra: window length " + std::to_string(t) +
                          " is not divisible by the largest analysis window " +
                          std::to_string(top));
  }
  SpectralPyramid<T> pyr;
  pyr.base = w_b;
  pyr.channels = x.rows();
  // Row c's segments are contiguous, so each level is one batch of C * count transforms.
  std::vector<double> buf(x.size());
  std::copy(x.data(), x.data() + x.size(), buf.begin());
  std::vector<double> mag;
  for (std::size_t l = 0; l <= max_level; ++l) {
    SpectralLevel<T> level;
    level.window = w_b << l;
    level.count = t / level.window;
    level.bins = level.window / 2 + 1;
    level.mags = Matrix<T>(x.rows() * level.count, level.bins);
    mag.resize(level.mags.size());
    fft::rfft_magnitude_batch(buf, level.window, mag);
    T* dst = level.mags.data();
    for (std::size_t i = 0; i < mag.size(); ++i) {
      dst[i] = static_cast<T>(log1p ? std::log1p(mag[i]) : mag[i]);
    }
    pyr.levels.push_back(std::move(level));
  }
  return pyr;
}

template <typename T>
void SpecEncoder<T>::init(const SpecConfig& config, std::size_t window_samples, std::size_t vocab,
                          Rng& rng) {
  cfg = config;
  samples = window_samples;
  const std::size_t top = cfg.base_window << cfg.max_level;
  if (cfg.base_window == 0 || cfg.base_window % 2 != 0 || samples % top != 0) {
    throw InvalidArgument("spectral encoder: window " + std::to_string(samples) +
                          " must be divisible by w_b * 2^L = " + std::to_string(top) +
                          " with even w_b");
  }
  if (cfg.n == 0) throw InvalidArgument("spectral encoder: n must be positive");
  levels.resize(cfg.max_level + 1);
  for (std::size_t l = 0; l <= cfg.max_level; ++l) {
    const std::size_t w = cfg.base_window << l;
    auto& lv = levels[l];
    lv.fe.init(w / 2 + 1, cfg.d, rng);
    lv.we.init(cfg.n, samples / w);
    lv.we_bias.init(1, cfg.n);
    nn::trunc_normal(lv.we.value, rng, 0.02);
  }
  se.init(vocab, cfg.d);
  nn::trunc_normal(se.value, rng, 0.02);
  if (cfg.cls_token) {
    cls.init(1, cfg.d);
    nn::trunc_normal(cls.value, rng, 0.02);
  }
  const std::size_t n_max = tokens(vocab);
  if (cfg.rank > n_max) {
    throw InvalidArgument("spectral encoder: rank " + std::to_string(cfg.rank) +
                          " exceeds the token capacity " + std::to_string(n_max));
  }
  blocks.resize(cfg.depth);
  for (auto& b : blocks) b.init_low_rank(cfg.d, cfg.heads, cfg.ff_mult, cfg.rank, n_max, rng);
}

template <typename T>
void SpecEncoder<T>::embed_level(const SpectralLevel<T>& level, std::size_t l, Matrix<T>& out,
                                 Matrix<T>& freq) const {
  const auto& lv = levels.at(l);
  if (level.bins != lv.fe.in || level.count != lv.we.value.cols()) {
    throw InvalidArgument("embed_level: level " + std::to_string(l) + " has " +
                          std::to_string(level.count) + " windows x " +
                          std::to_string(level.bins) + " bins, expected " +
                          std::to_string(lv.we.value.cols()) + " x " + std::to_string(lv.fe.in));
  }
  const std::size_t channels = level.mags.rows() / level.count;
  const std::size_t d = cfg.d;
  const std::size_t n = cfg.n;
  if (freq.rows() != level.mags.rows() || freq.cols() != d) freq.resize(level.mags.rows(), d);
  lv.fe.forward(level.mags.data(), level.mags.rows(), freq.data());
  if (out.rows() != channels * n || out.cols() != d) out.resize(channels * n, d);
  for (std::size_t c = 0; c < channels; ++c) {
    T* dst = out.row(c * n).data();
    simd::gemm(Trans::kNo, Trans::kNo, n, d, level.count, T(1), lv.we.value.data(), level.count,
               freq.row(c * level.count).data(), d, T(0), dst, d);
    for (std::size_t j = 0; j < n; ++j) {
      const T b = lv.we_bias.value(0, j);
      T* row = dst + j * d;
      for (std::size_t k = 0; k < d; ++k) row[k] += b;
    }
  }
}

template <typename T>
void SpecEncoder<T>::fuse_levels(std::span<const Matrix<T>> embedded,
                                 std::span<const std::size_t> channel_ids, Matrix<T>& out) const {
  if (embedded.empty()) throw InvalidArgument("fuse_levels: no levels");
  const std::size_t rows = embedded[0].rows();
  const std::size_t d = embedded[0].cols();
  for (const auto& m : embedded) {
    if (m.rows() != rows || m.cols() != d) throw InvalidArgument("fuse_levels: inconsistent level shapes");
  }
  if (rows != channel_ids.size() * cfg.n) {
    throw InvalidArgument("fuse_levels: rows do not match channels x n");
  }
  out = embedded[0];
  for (std::size_t l = 1; l < embedded.size(); ++l) {
    simd::axpy(T(1), embedded[l].data(), out.data(), rows * d);
  }
  for (std::size_t c = 0; c < channel_ids.size(); ++c) {
    if (channel_ids[c] >= se.value.rows()) throw InvalidArgument("fuse_levels: channel id out of range");
    const T* s = se.value.row(channel_ids[c]).data();
    for (std::size_t j = 0; j < cfg.n; ++j) simd::axpy(T(1), s, out.row(c * cfg.n + j).data(), d);
  }
}

template <typename T>
void SpecEncoder<T>::forward(const Matrix<T>& x, std::span<const std::size_t> channel_ids,
                             SpecCache<T>& c, const nn::Stochastic& st, T* r) const {
  if (x.rows() != channel_ids.size()) {
    throw InvalidArgument("spec_forward: " + std::to_string(x.rows()) + " rows but " +
                          std::to_string(channel_ids.size()) + " channel ids");
  }
  if (x.cols() != samples) {
    throw InvalidArgument("spec_forward: window of " + std::to_string(x.cols()) +
                          " samples, configured " + std::to_string(samples));
  }
  c.pyramid = multiscale_spectra(x, cfg.base_window, cfg.max_level, cfg.log1p);
  std::vector<Matrix<T>> embedded(levels.size());
  c.freq.resize(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    embed_level(c.pyramid.levels[l], l, embedded[l], c.freq[l]);
  }
  Matrix<T> fused;
  fuse_levels(embedded, channel_ids, fused);
  const std::size_t d = cfg.d;
  const std::size_t off = cfg.cls_token ? 1 : 0;
  const std::size_t n_tok = fused.rows() + off;
  if (c.x.rows() != n_tok || c.x.cols() != d) c.x.resize(n_tok, d);
  if (cfg.cls_token) std::copy(cls.value.data(), cls.value.data() + d, c.x.data());
  std::copy(fused.data(), fused.data() + fused.size(), c.x.data() + off * d);

  c.blocks.resize(blocks.size());
  nn::Stochastic block_st = st;
  block_st.drop_path = 0.0;
  block_st.attn_dropout = cfg.attn_dropout;
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].forward(c.x, c.blocks[i], block_st);

  std::fill(r, r + d, T(0));
  for (std::size_t i = 0; i < n_tok; ++i) simd::axpy(T(1), c.x.row(i).data(), r, d);
  const T inv = T(1) / static_cast<T>(n_tok);
  for (std::size_t j = 0; j < d; ++j) r[j] *= inv;
}

template <typename T>
void SpecEncoder<T>::backward(const T* dr, std::span<const std::size_t> channel_ids,
                              SpecCache<T>& c) {
  const std::size_t n_tok = c.x.rows();
  const std::size_t d = cfg.d;
  const std::size_t n = cfg.n;
  const std::size_t off = cfg.cls_token ? 1 : 0;
  if (c.dx.rows() != n_tok || c.dx.cols() != d) c.dx.resize(n_tok, d);
  const T inv = T(1) / static_cast<T>(n_tok);
  for (std::size_t i = 0; i < n_tok; ++i) {
    T* row = c.dx.row(i).data();
    for (std::size_t j = 0; j < d; ++j) row[j] = dr[j] * inv;
  }
  for (std::size_t i = blocks.size(); i-- > 0;) blocks[i].backward(c.dx, c.blocks[i]);
  if (cfg.cls_token) simd::axpy(T(1), c.dx.data(), cls.grad.data(), d);

  const std::size_t channels = channel_ids.size();
  for (std::size_t ch = 0; ch < channels; ++ch) {
    T* ds = se.grad.row(channel_ids[ch]).data();
    for (std::size_t j = 0; j < n; ++j) simd::axpy(T(1), c.dx.row(off + ch * n + j).data(), ds, d);
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    auto& lv = levels[l];
    const auto& level = c.pyramid.levels[l];
    const std::size_t count = level.count;
    if (c.dfreq.rows() != channels * count || c.dfreq.cols() != d) c.dfreq.resize(channels * count, d);
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const T* dout = c.dx.row(off + ch * n).data();
      simd::gemm(Trans::kNo, Trans::kYes, n, count, d, T(1), dout, d,
                 c.freq[l].row(ch * count).data(), d, T(1), lv.we.grad.data(), count);
      for (std::size_t j = 0; j < n; ++j) {
        const T* row = dout + j * d;
        T acc = 0;
        for (std::size_t k = 0; k < d; ++k) acc += row[k];
        lv.we_bias.grad(0, j) += acc;
      }
      simd::gemm(Trans::kYes, Trans::kNo, count, d, n, T(1), lv.we.value.data(), count, dout, d,
                 T(0), c.dfreq.row(ch * count).data(), d);
    }
    lv.fe.backward(level.mags.data(), c.dfreq.data(), level.mags.rows(), nullptr);
  }
}

template <typename T>
void SpecEncoder<T>::collect(nn::ParamList<T>& out) {
  const int nl = n_layers();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::string p = "sp.level" + std::to_string(l);
    levels[l].fe.collect(out, p + ".fe", nn::ParamKind::kEmbedding, 0, nl);
    out.push_back({p + ".we.weight", &levels[l].we, nn::ParamKind::kWeight, 0, nl});
    out.push_back({p + ".we.bias", &levels[l].we_bias, nn::ParamKind::kBias, 0, nl});
  }
  out.push_back({"sp.se", &se, nn::ParamKind::kEmbedding, 0, nl});
  if (cfg.cls_token) out.push_back({"sp.cls", &cls, nn::ParamKind::kEmbedding, 0, nl});
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i].collect(out, "sp.blocks." + std::to_string(i), static_cast<int>(i) + 1, nl);
  }
}

template <typename T>
Matrix<T> linear_attention(const Matrix<T>& tokens, const nn::Attention<T>& attn) {
  if (!attn.low_rank) throw InvalidArgument("linear_attention: attention layer is dense");
  if (attn.rank > tokens.rows()) {
    throw InvalidArgument("linear_attention: rank " + std::to_string(attn.rank) + " exceeds " +
                          std::to_string(tokens.rows()) + " tokens");
  }
  nn::AttentionCache<T> cache;
  Matrix<T> y;
  attn.forward(tokens, y, cache);
  return y;
}

template SpectralPyramid<float> multiscale_spectra(const Matrix<float>&, std::size_t, std::size_t, bool);
template SpectralPyramid<double> multiscale_spectra(const Matrix<double>&, std::size_t, std::size_t, bool);
template struct SpecEncoder<float>;
template struct SpecEncoder<double>;
template Matrix<float> linear_attention(const Matrix<float>&, const nn::Attention<float>&);
template Matrix<double> linear_attention(const Matrix<double>&, const nn::Attention<double>&);

}  // namespace neurobolt
