// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Spatiotemporal branch: per-patch convolutional embedding, temporal and
// spatial embeddings, dense-attention transformer, mean pooling.

#include <span>
#include <string>
#include <vector>

#include "neurobolt/nn.hpp"
#include "neurobolt/tokenizer.hpp"

namespace neurobolt {

struct STConfig {
  std::size_t patch = 200;   // w
  std::size_t stride = 200;  // s
  std::size_t d = 200;
  std::size_t depth = 4;
  std::size_t heads = 8;
  std::size_t ff_mult = 4;
  std::size_t conv_channels = 8;
  std::size_t gn_groups = 4;
  double drop_path = 0.1;
};

template <typename T>
struct STCache {
  PatchGrid<T> grid;
  nn::PatchEncoderCache<T> enc;
  Matrix<T> e;  // (C * K_p) x d, patch embeddings
  Matrix<T> x;  // token stream
  std::vector<nn::BlockCache<T>> blocks;
  Matrix<T> dx;
};

template <typename T>
struct STEncoder {
  STConfig cfg;
  nn::PatchEncoder<T> encoder;
  nn::Param<T> te;  // K_p x d
  nn::Param<T> se;  // vocabulary x d
  std::vector<nn::Block<T>> blocks;

  /// `samples` fixes K_p (the TE row count); `vocab` is the SE row count.
  void init(const STConfig& config, std::size_t samples, std::size_t vocab, Rng& rng);

  std::size_t patches_per_channel() const { return te.value.rows(); }

  /// grid rows -> (C * K_p) x d embeddings.
  void encode_patches(const PatchGrid<T>& grid, Matrix<T>& e, nn::PatchEncoderCache<T>& cache) const;

  /// e[c * K_p + k] += TE[k] + SE[channel_ids[c]].
  void add_pos_embeddings(Matrix<T>& e, std::size_t per_channel,
                          std::span<const std::size_t> channel_ids) const;

  /// x (C x T) -> r (d values). `st.rng` null means evaluation mode.
  void forward(const Matrix<T>& x, std::span<const std::size_t> channel_ids, STCache<T>& cache,
               const nn::Stochastic& st, T* r) const;
  void backward(const T* dr, std::span<const std::size_t> channel_ids, STCache<T>& cache);

  void collect(nn::ParamList<T>& out);
  int n_layers() const { return static_cast<int>(blocks.size()) + 1; }
};

}  // namespace neurobolt
