// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Multi-scale spectral branch.
//
// Level l cuts each channel into non-overlapping windows of w_l = w_b * 2^l
// samples and takes the one-sided FFT magnitude of each (rectangular window,
// no padding, unnormalized transform, so a constant a gives w_l |a| at DC).
// Per level, a frequency projection maps the w_l/2+1 bins to d and a window
// projection maps the T/w_l windows to n along time. Levels are summed, a
// per-channel spatial embedding is added, and the C * n tokens pass through a
// low-rank attention transformer before mean pooling.

#include <span>
#include <vector>

#include "neurobolt/nn.hpp"

namespace neurobolt {

template <typename T>
struct SpectralLevel {
  std::size_t window = 0;  // w_l
  std::size_t count = 0;   // windows per channel, T / w_l
  std::size_t bins = 0;    // w_l / 2 + 1
  Matrix<T> mags;          // (C * count) x bins, row c * count + k
};

template <typename T>
struct SpectralPyramid {
  std::vector<SpectralLevel<T>> levels;
  std::size_t base = 0;  // w_b
  std::size_t channels = 0;
};

/// Requires T divisible by w_b * 2^max_level and w_b even. With `log1p`,
/// magnitudes are replaced by log(1 + |X|).
template <typename T>
SpectralPyramid<T> multiscale_spectra(const Matrix<T>& x, std::size_t w_b, std::size_t max_level,
                                      bool log1p = false);

struct SpecConfig {
  std::size_t base_window = 100;  // w_b
  std::size_t max_level = 3;      // L
  std::size_t n = 32;
  std::size_t d = 200;
  std::size_t depth = 4;
  std::size_t heads = 8;
  std::size_t ff_mult = 4;
  std::size_t rank = 64;  // D
  bool cls_token = false;
  bool log1p = false;
  double attn_dropout = 0.1;
};

template <typename T>
struct LevelEmbedding {
  nn::Linear<T> fe;        // bins -> d
  nn::Param<T> we;         // n x count
  nn::Param<T> we_bias;    // 1 x n, broadcast over d
};

template <typename T>
struct SpecCache {
  SpectralPyramid<T> pyramid;
  std::vector<Matrix<T>> freq;  // per level, (C * count) x d
  Matrix<T> x;                  // token stream
  std::vector<nn::BlockCache<T>> blocks;
  Matrix<T> dx, dfreq;
};

template <typename T>
struct SpecEncoder {
  SpecConfig cfg;
  std::vector<LevelEmbedding<T>> levels;
  nn::Param<T> se;   // vocabulary x d
  nn::Param<T> cls;  // 1 x d (when enabled)
  std::vector<nn::Block<T>> blocks;
  std::size_t samples = 0;

  void init(const SpecConfig& config, std::size_t window_samples, std::size_t vocab, Rng& rng);

  /// Token count for C channels: C * n (+1 with the class token).
  std::size_t tokens(std::size_t channels) const { return channels * cfg.n + (cfg.cls_token ? 1 : 0); }

  /// Level l magnitudes -> C*n x d. `freq` receives the frequency-projected
  /// rows (C*count x d) for backward.
  void embed_level(const SpectralLevel<T>& level, std::size_t l, Matrix<T>& out,
                   Matrix<T>& freq) const;

  /// Sum of embedded levels plus SE[channel_ids[c]] on every row of channel c.
  void fuse_levels(std::span<const Matrix<T>> embedded, std::span<const std::size_t> channel_ids,
                   Matrix<T>& out) const;

  void forward(const Matrix<T>& x, std::span<const std::size_t> channel_ids, SpecCache<T>& cache,
               const nn::Stochastic& st, T* r) const;
  void backward(const T* dr, std::span<const std::size_t> channel_ids, SpecCache<T>& cache);

  void collect(nn::ParamList<T>& out);
  int n_layers() const { return static_cast<int>(blocks.size()) + 1; }
};

/// Low-rank attention as a free function over explicit weights, for tests:
/// softmax((x Wq)(E[:, :N] x Wk)^T / sqrt(dh)) (F[:, :N] x Wv) per head,
/// followed by the output projection held in `attn`.
template <typename T>
Matrix<T> linear_attention(const Matrix<T>& tokens, const nn::Attention<T>& attn);

}  // namespace neurobolt
