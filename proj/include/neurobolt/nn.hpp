// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Layers with hand-written backward passes.
//
// Activations are row-major token matrices (N x d). A forward call that will
// be differentiated fills a cache owned by the caller; backward reads that
// cache, accumulates parameter gradients into Param::grad and returns the
// input gradient. Instantiated for float and double.

#include <cstddef>
#include <string>
#include <vector>

#include "neurobolt/rng.hpp"
#include "neurobolt/tensor.hpp"

namespace neurobolt::nn {

template <typename T>
struct Param {
  Matrix<T> value;
  Matrix<T> grad;

  void init(std::size_t rows, std::size_t cols) {
    value = Matrix<T>(rows, cols);
    grad = Matrix<T>(rows, cols);
  }
};

/// Decides weight decay: only kWeight tensors are decayed.
enum class ParamKind { kWeight, kBias, kNorm, kEmbedding };

template <typename T>
struct ParamRef {
  std::string name;
  Param<T>* param = nullptr;
  ParamKind kind = ParamKind::kWeight;
  int layer = 0;     // 0 = input embeddings, i + 1 = transformer block i
  int n_layers = 1;  // learning-rate multiplier is decay^(n_layers - layer)
};

template <typename T>
using ParamList = std::vector<ParamRef<T>>;

/// Truncated normal (+/- 2 sd) fill.
template <typename T>
void trunc_normal(Matrix<T>& m, Rng& rng, double stddev);

// ---------------------------------------------------------------------------

template <typename T>
struct Linear {
  Param<T> weight;  // in x out
  Param<T> bias;    // 1 x out
  std::size_t in = 0;
  std::size_t out = 0;

  void init(std::size_t in_features, std::size_t out_features, Rng& rng, double stddev = 0.02);

  /// y (n x out) = x (n x in) W + b.
  void forward(const T* x, std::size_t n, T* y) const;

  /// Accumulates dW, db. Writes dx (n x in) when dx is non-null.
  void backward(const T* x, const T* dy, std::size_t n, T* dx);

  void collect(ParamList<T>& out, const std::string& prefix, ParamKind weight_kind, int layer,
               int n_layers);
};

// ---------------------------------------------------------------------------

template <typename T>
struct LayerNormCache {
  Matrix<T> xhat;
  std::vector<T> rstd;
};

template <typename T>
struct LayerNorm {
  Param<T> gamma;  // 1 x d
  Param<T> beta;   // 1 x d
  std::size_t d = 0;
  static constexpr double kEps = 1e-6;

  void init(std::size_t dim);
  void forward(const Matrix<T>& x, Matrix<T>& y, LayerNormCache<T>* cache) const;
  /// dx = (accumulate ? dx : 0) + dL/dx.
  void backward(const Matrix<T>& dy, const LayerNormCache<T>& cache, Matrix<T>& dx,
                bool accumulate);
  void collect(ParamList<T>& out, const std::string& prefix, int layer, int n_layers);
};

// ---------------------------------------------------------------------------

/// Multi-head self-attention. Dense mode attends over all N keys. Low-rank
/// mode first projects keys and values along the token axis with E and F
/// (rank x n_max, the first N columns used), so every query attends over
/// `rank` mixed keys: softmax(Q (E K)^T / sqrt(dh)) (F V). E and F are shared
/// by all heads.
template <typename T>
struct AttentionCache {
  Matrix<T> qkv;     // N x 3d
  Matrix<T> k, v;    // N x d
  Matrix<T> kp, vp;  // M x d, the keys and values actually attended
  Matrix<T> probs;   // (H * N) x M
  Matrix<T> o;       // N x d, concatenated head outputs
  // Backward scratch.
  Matrix<T> dqkv, dkp, dvp, dp, dk, dv, dout;
};

template <typename T>
struct Attention {
  Linear<T> qkv;
  Linear<T> proj;
  Param<T> e;  // rank x n_max (low-rank only)
  Param<T> f;
  std::size_t d = 0;
  std::size_t heads = 1;
  bool low_rank = false;
  std::size_t rank = 0;
  std::size_t n_max = 0;

  void init(std::size_t dim, std::size_t n_heads, Rng& rng);
  void init_low_rank(std::size_t dim, std::size_t n_heads, std::size_t r, std::size_t max_tokens,
                     Rng& rng);

  void forward(const Matrix<T>& x, Matrix<T>& y, AttentionCache<T>& cache) const;
  void backward(const Matrix<T>& x, const Matrix<T>& dy, AttentionCache<T>& cache, Matrix<T>& dx);
  void collect(ParamList<T>& out, const std::string& prefix, int layer, int n_layers);
};

/// Plain softmax attention over explicit Q, K, V (N x d each, `heads` equal
/// column slices). Independent of Attention; used as a reference.
template <typename T>
Matrix<T> dense_attention_reference(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v,
                                    std::size_t heads);

// ---------------------------------------------------------------------------

/// Per-call stochastic choices of one block. `path_*` is 0 (branch dropped)
/// or the inverted-dropout scale; `attn_mask` holds 0 or 1/(1-p) per element
/// and is empty when attention dropout is inactive.
template <typename T>
struct BlockCache {
  LayerNormCache<T> ln1, ln2;
  Matrix<T> h1, a, h2, f, g, m;
  AttentionCache<T> attn;
  Matrix<T> attn_mask;
  T path_attn = T(1);
  T path_ff = T(1);
  Matrix<T> dh, dtmp, dg, df;
};

struct Stochastic {
  Rng* rng = nullptr;  // null in evaluation mode
  double drop_path = 0.0;
  double attn_dropout = 0.0;
};

/// Pre-LN transformer block: x += DropPath(Dropout(Attn(LN(x)))); x += DropPath(FF(LN(x))),
/// FF = Linear(d, 4d) -> GELU -> Linear(4d, d).
template <typename T>
struct Block {
  LayerNorm<T> ln1;
  Attention<T> attn;
  LayerNorm<T> ln2;
  Linear<T> fc1;
  Linear<T> fc2;

  void init(std::size_t d, std::size_t heads, std::size_t ff_mult, Rng& rng);
  void init_low_rank(std::size_t d, std::size_t heads, std::size_t ff_mult, std::size_t rank,
                     std::size_t n_max, Rng& rng);

  /// Updates x in place.
  void forward(Matrix<T>& x, BlockCache<T>& cache, const Stochastic& st) const;
  /// dx holds dL/d(output) on entry and dL/d(input) on return.
  void backward(Matrix<T>& dx, BlockCache<T>& cache);
  void collect(ParamList<T>& out, const std::string& prefix, int layer, int n_layers);
};

// ---------------------------------------------------------------------------

/// Per-patch temporal encoder: three 1-D convolution blocks, each followed by
/// group normalization and GELU. conv1 maps 1 -> ch channels with kernel 15,
/// padding 7 and the stride that yields d / ch output positions; conv2 and
/// conv3 map ch -> ch with kernel 3, padding 1. The (position, channel)
/// feature map is flattened position-major into d values.
template <typename T>
struct PatchEncoderCache {
  Matrix<T> col1, y1, xh1, a1;
  Matrix<T> col2, y2, xh2, a2;
  Matrix<T> col3, y3, xh3;
  Matrix<T> rstd1, rstd2, rstd3;
  Matrix<T> dy, dcol, da;
};

template <typename T>
struct PatchEncoder {
  static constexpr std::size_t kKernel1 = 15;
  static constexpr std::size_t kPad1 = 7;
  static constexpr std::size_t kKernel2 = 3;

  Param<T> w1, b1, g1, be1;
  Param<T> w2, b2, g2, be2;
  Param<T> w3, b3, g3, be3;
  std::size_t width = 0;      // patch length w
  std::size_t ch = 0;         // convolution channels
  std::size_t positions = 0;  // conv1 output length = d / ch
  std::size_t stride = 0;
  std::size_t groups = 1;

  void init(std::size_t w, std::size_t d, std::size_t channels, std::size_t gn_groups, Rng& rng);
  std::size_t dim() const { return positions * ch; }

  /// patches (P x w) -> out (P x d).
  void forward(const Matrix<T>& patches, Matrix<T>& out, PatchEncoderCache<T>& cache) const;
  /// Parameter gradients only; the input is data.
  void backward(const Matrix<T>& dout, PatchEncoderCache<T>& cache);
  void collect(ParamList<T>& out, const std::string& prefix, int layer, int n_layers);
};

/// conv1 stride for patch width w and `positions` outputs.
std::size_t conv1_stride(std::size_t w, std::size_t positions);

}  // namespace neurobolt::nn
