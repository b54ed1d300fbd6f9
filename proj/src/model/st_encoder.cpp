// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/st_encoder.hpp"

#include "neurobolt/error.hpp"
#include "neurobolt/simd/kernels.hpp"

namespace neurobolt {

template <typename T>
void STEncoder<T>::init(const STConfig& config, std::size_t samples, std::size_t vocab, Rng& rng) {
  cfg = config;
  const std::size_t kp = patch_count(samples, cfg.patch, cfg.stride);
  encoder.init(cfg.patch, cfg.d, cfg.conv_channels, cfg.gn_groups, rng);
  te.init(kp, cfg.d);
  se.init(vocab, cfg.d);
  nn::trunc_normal(te.value, rng, 0.02);
  nn::trunc_normal(se.value, rng, 0.02);
  blocks.resize(cfg.depth);
  for (auto& b : blocks) b.init(cfg.d, cfg.heads, cfg.ff_mult, rng);
}

template <typename T>
void STEncoder<T>::encode_patches(const PatchGrid<T>& grid, Matrix<T>& e,
                                  nn::PatchEncoderCache<T>& cache) const {
  if (grid.w != cfg.patch) {
    throw InvalidArgument("encode_patches: patch width " + std::to_string(grid.w) +
                          " != configured " + std::to_string(cfg.patch));
  }
  encoder.forward(grid.patches, e, cache);
}

template <typename T>
void STEncoder<T>::add_pos_embeddings(Matrix<T>& e, std::size_t per_channel,
                                      std::span<const std::size_t> channel_ids) const {
  if (per_channel > te.value.rows()) {
    throw InvalidArgument("add_pos_embeddings: " + std::to_string(per_channel) +
                          " patches exceed the " + std::to_string(te.value.rows()) +
                          " temporal embeddings");
  }
  if (e.rows() != channel_ids.size() * per_channel) {
    throw InvalidArgument("add_pos_embeddings: token count does not match channels x patches");
  }
  const std::size_t d = cfg.d;
  for (std::size_t c = 0; c < channel_ids.size(); ++c) {
    if (channel_ids[c] >= se.value.rows()) {
      throw InvalidArgument("add_pos_embeddings: channel id out of range");
    }
    const T* s = se.value.row(channel_ids[c]).data();
    for (std::size_t k = 0; k < per_channel; ++k) {
      T* row = e.row(c * per_channel + k).data();
      simd::axpy(T(1), te.value.row(k).data(), row, d);
      simd::axpy(T(1), s, row, d);
    }
  }
}

template <typename T>
void STEncoder<T>::forward(const Matrix<T>& x, std::span<const std::size_t> channel_ids,
                           STCache<T>& c, const nn::Stochastic& st, T* r) const {
  if (x.rows() != channel_ids.size()) {
    throw InvalidArgument("st_forward: " + std::to_string(x.rows()) + " rows but " +
                          std::to_string(channel_ids.size()) + " channel ids");
  }
  c.grid = patch(x, cfg.patch, cfg.stride);
  encode_patches(c.grid, c.e, c.enc);
  add_pos_embeddings(c.e, c.grid.per_channel, channel_ids);
  c.x = c.e;
  c.blocks.resize(blocks.size());
  nn::Stochastic block_st = st;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    // Stochastic depth rate grows linearly from 0 at the first block.
    block_st.drop_path = blocks.size() > 1
                             ? cfg.drop_path * static_cast<double>(i) / double(blocks.size() - 1)
                             : 0.0;
    block_st.attn_dropout = 0.0;
    blocks[i].forward(c.x, c.blocks[i], block_st);
  }
  const std::size_t n = c.x.rows();
  const std::size_t d = cfg.d;
  std::fill(r, r + d, T(0));
  for (std::size_t i = 0; i < n; ++i) simd::axpy(T(1), c.x.row(i).data(), r, d);
  const T inv = T(1) / static_cast<T>(n);
  for (std::size_t j = 0; j < d; ++j) r[j] *= inv;
}

template <typename T>
void STEncoder<T>::backward(const T* dr, std::span<const std::size_t> channel_ids, STCache<T>& c) {
  const std::size_t n = c.x.rows();
  const std::size_t d = cfg.d;
  const std::size_t kp = c.grid.per_channel;
  if (c.dx.rows() != n || c.dx.cols() != d) c.dx.resize(n, d);
  const T inv = T(1) / static_cast<T>(n);
  for (std::size_t i = 0; i < n; ++i) {
    T* row = c.dx.row(i).data();
    for (std::size_t j = 0; j < d; ++j) row[j] = dr[j] * inv;
  }
  for (std::size_t i = blocks.size(); i-- > 0;) blocks[i].backward(c.dx, c.blocks[i]);
  for (std::size_t ch = 0; ch < channel_ids.size(); ++ch) {
    T* ds = se.grad.row(channel_ids[ch]).data();
    for (std::size_t k = 0; k < kp; ++k) {
      const T* row = c.dx.row(ch * kp + k).data();
      simd::axpy(T(1), row, te.grad.row(k).data(), d);
      simd::axpy(T(1), row, ds, d);
    }
  }
  encoder.backward(c.dx, c.enc);
}

template <typename T>
void STEncoder<T>::collect(nn::ParamList<T>& out) {
  const int nl = n_layers();
  encoder.collect(out, "st.patch_encoder", 0, nl);
  out.push_back({"st.te", &te, nn::ParamKind::kEmbedding, 0, nl});
  out.push_back({"st.se", &se, nn::ParamKind::kEmbedding, 0, nl});
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i].collect(out, "st.blocks." + std::to_string(i), static_cast<int>(i) + 1, nl);
  }
}

template struct STEncoder<float>;
template struct STEncoder<double>;

}  // namespace neurobolt
