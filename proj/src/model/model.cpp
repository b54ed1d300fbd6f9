// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/model.hpp"

#include <algorithm>
#include <cmath>

#include "neurobolt/error.hpp"
#include "neurobolt/simd/kernels.hpp"

namespace neurobolt {

std::string to_string(Branches b) {
  switch (b) {
    case Branches::kBoth: return "both";
    case Branches::kSTOnly: return "st_only";
    case Branches::kSpecOnly: return "spec_only";
  }
  return "both";
}

Branches branches_from_string(const std::string& s) {
  if (s == "both") return Branches::kBoth;
  if (s == "st_only") return Branches::kSTOnly;
  if (s == "spec_only") return Branches::kSpecOnly;
  throw InvalidArgument("unknown branch toggle '" + s + "' (expected both, st_only or spec_only)");
}

std::vector<std::string> standard_channels() {
  return {"Fp1", "Fp2", "F3", "F4", "C3",  "C4",  "P3", "P4", "O1",  "O2",   "F7",  "F8",   "T7",
          "T8",  "P7",  "P8", "FPz", "Fz", "Cz", "Pz", "POz", "Oz", "FT9", "FT10", "TP9", "TP10"};
}

NeuroBoltConfig::NeuroBoltConfig() : channel_vocab(standard_channels()), channels(channel_vocab) {
  st.d = sp.d = d;
  st.depth = sp.depth = 1;
  st.heads = sp.heads = 2;
  st.conv_channels = 4;
  st.gn_groups = 2;
}

std::size_t NeuroBoltConfig::window_samples() const {
  return static_cast<std::size_t>(std::llround(window_sec * fs));
}

void NeuroBoltConfig::validate() const {
  const auto bad = [](const std::string& m) { throw InvalidArgument("model config: " + m); };
  if (channels.empty()) bad("no input channels");
  for (const auto& c : channels) {
    if (std::find(channel_vocab.begin(), channel_vocab.end(), c) == channel_vocab.end()) {
      bad("channel '" + c + "' is not in the channel vocabulary");
    }
  }
  if (!(fs > 0.0) || !(window_sec > 0.0)) bad("fs and window_sec must be positive");
  if (d == 0) bad("d must be positive");
  if (st.d != d || sp.d != d) bad("branch widths must equal d");
  if (sp.max_level > 4) bad("scale level L must be in 0..4");
  const std::size_t t = window_samples();
  if (has_st()) {
    if (st.patch == 0 || st.patch > t) bad("patch width must be in [1, window samples]");
    if (st.heads == 0 || d % st.heads != 0) bad("d must be divisible by st.heads");
    if (st.conv_channels == 0 || d % st.conv_channels != 0) bad("d must be divisible by st.conv_channels");
    if (st.gn_groups == 0 || st.conv_channels % st.gn_groups != 0) {
      bad("st.conv_channels must be divisible by st.gn_groups");
    }
  }
  if (has_sp()) {
    const std::size_t top = sp.base_window << sp.max_level;
    if (sp.base_window % 2 != 0 || t % top != 0) bad("window samples must be divisible by w_b * 2^L");
    if (sp.heads == 0 || d % sp.heads != 0) bad("d must be divisible by sp.heads");
    if (sp.rank == 0 || sp.rank > channels.size() * sp.n) bad("rank must be in [1, C * n]");
  }
}

NeuroBoltConfig NeuroBoltConfig::reference() {
  NeuroBoltConfig c;
  c.d = 200;
  c.st.d = c.sp.d = 200;
  c.st.depth = c.sp.depth = 4;
  c.st.heads = c.sp.heads = 8;
  c.st.conv_channels = 8;
  c.st.gn_groups = 4;
  c.sp.n = 32;
  c.sp.rank = 64;
  return c;
}

NeuroBoltConfig NeuroBoltConfig::tiny() {
  NeuroBoltConfig c;
  c.channel_vocab = {"C3", "C4"};
  c.channels = c.channel_vocab;
  c.window_sec = 2.0;
  c.d = 8;
  c.st.d = c.sp.d = 8;
  c.st.depth = c.sp.depth = 1;
  c.st.heads = c.sp.heads = 2;
  c.st.conv_channels = 2;
  c.st.gn_groups = 1;
  c.sp.max_level = 1;
  c.sp.n = 4;
  c.sp.rank = 4;
  return c;
}

template <typename T>
NeuroBoltModel<T>::NeuroBoltModel(const NeuroBoltConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  input_ids_ = resolve_channels(cfg_.channels);
  Rng rng(derive_seed(cfg_.seed, 0x1417));
  const std::size_t t = cfg_.window_samples();
  const std::size_t vocab = cfg_.channel_vocab.size();
  if (cfg_.has_st()) st_.init(cfg_.st, t, vocab, rng);
  if (cfg_.has_sp()) sp_.init(cfg_.sp, t, vocab, rng);
  head_.init(cfg_.d, 1, rng);
}

template <typename T>
std::vector<std::size_t> NeuroBoltModel<T>::resolve_channels(
    const std::vector<std::string>& labels) const {
  std::vector<std::size_t> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = std::find(cfg_.channel_vocab.begin(), cfg_.channel_vocab.end(), l);
    if (it == cfg_.channel_vocab.end()) throw InvalidArgument("unknown channel label '" + l + "'");
    ids.push_back(static_cast<std::size_t>(it - cfg_.channel_vocab.begin()));
  }
  return ids;
}

template <typename T>
T NeuroBoltModel<T>::forward(const Matrix<T>& x, ModelCache<T>& cache, Rng* rng) const {
  return forward(x, input_ids_, cache, rng);
}

template <typename T>
T NeuroBoltModel<T>::forward(const Matrix<T>& x, std::span<const std::size_t> ids,
                             ModelCache<T>& c, Rng* rng) const {
  const std::size_t d = cfg_.d;
  c.r.assign(d, T(0));
  nn::Stochastic st{rng, 0.0, 0.0};
  if (cfg_.has_st()) {
    c.r_st.resize(d);
    st_.forward(x, ids, c.st, st, c.r_st.data());
    simd::axpy(T(1), c.r_st.data(), c.r.data(), d);
  }
  if (cfg_.has_sp()) {
    c.r_sp.resize(d);
    sp_.forward(x, ids, c.sp, st, c.r_sp.data());
    simd::axpy(T(1), c.r_sp.data(), c.r.data(), d);
  }
  c.g.resize(d);
  simd::gelu(c.r.data(), c.g.data(), d);
  T y;
  head_.forward(c.g.data(), 1, &y);
  return y;
}

template <typename T>
void NeuroBoltModel<T>::backward(ModelCache<T>& c, T dy) {
  const std::size_t d = cfg_.d;
  c.dg.resize(d);
  c.dr.resize(d);
  head_.backward(c.g.data(), &dy, 1, c.dg.data());
  simd::gelu_backward(c.r.data(), c.dg.data(), c.dr.data(), d);
  if (cfg_.has_st()) st_.backward(c.dr.data(), input_ids_, c.st);
  if (cfg_.has_sp()) sp_.backward(c.dr.data(), input_ids_, c.sp);
}

template <typename T>
T NeuroBoltModel<T>::head_output(std::span<const T> r) const {
  std::vector<T> g(r.size());
  simd::gelu(r.data(), g.data(), r.size());
  T y;
  head_.forward(g.data(), 1, &y);
  return y;
}

template <typename T>
T NeuroBoltModel<T>::predict(const Matrix<float>& x) const {
  const std::size_t t = cfg_.window_samples();
  if (x.rows() != input_ids_.size() || x.cols() != t) {
    throw InvalidArgument("predict: window is " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()) + ", expected " +
                          std::to_string(input_ids_.size()) + "x" + std::to_string(t));
  }
  for (float v : x.flat()) {
    if (!std::isfinite(v)) throw InvalidArgument("predict: non-finite input value");
  }
  ModelCache<T> cache;
  if constexpr (std::is_same_v<T, float>) {
    return forward(x, cache, nullptr);
  } else {
    return forward(x.template cast<T>(), cache, nullptr);
  }
}

template <typename T>
std::vector<T> NeuroBoltModel<T>::predict_batch(std::span<const Matrix<float>> xs) const {
  std::vector<T> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

template <typename T>
std::vector<T> NeuroBoltModel<T>::predict_batch(std::span<const WindowSample> windows) const {
  std::vector<T> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(predict(w.x()));
  return out;
}

template <typename T>
nn::ParamList<T> NeuroBoltModel<T>::params() {
  nn::ParamList<T> list;
  if (cfg_.has_st()) st_.collect(list);
  if (cfg_.has_sp()) sp_.collect(list);
  head_.collect(list, "head", nn::ParamKind::kWeight, 1, 1);
  return list;
}

template <typename T>
void NeuroBoltModel<T>::zero_grad() {
  for (auto& p : params()) p.param->grad.set_zero();
}

template <typename T>
std::size_t NeuroBoltModel<T>::parameter_count() {
  std::size_t n = 0;
  for (auto& p : params()) n += p.param->value.size();
  return n;
}

template class NeuroBoltModel<float>;
template class NeuroBoltModel<double>;

}  // namespace neurobolt
