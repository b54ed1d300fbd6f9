// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// The full predictor: y = Linear(GELU(r_st + r_sp)). A disabled branch
// contributes a zero representation and owns no parameters.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neurobolt/signal_core.hpp"
#include "neurobolt/spec_encoder.hpp"
#include "neurobolt/st_encoder.hpp"

namespace neurobolt {

enum class Branches { kBoth, kSTOnly, kSpecOnly };

std::string to_string(Branches b);
Branches branches_from_string(const std::string& s);

/// The 26 scalp channels used by the synthetic generator, in order.
std::vector<std::string> standard_channels();

struct NeuroBoltConfig {
  std::vector<std::string> channel_vocab;  // SE rows; defaults to standard_channels()
  std::vector<std::string> channels;       // input rows; defaults to channel_vocab
  double fs = 200.0;
  double window_sec = 16.0;
  std::size_t d = 16;
  STConfig st;
  SpecConfig sp;
  Branches branches = Branches::kBoth;
  std::string target_roi;
  std::uint64_t seed = 0;

  /// Desk geometry sized for one CPU core: d 16, depth 1 and heads 2 in both
  /// branches, 4 convolution channels, n 32, rank 64, L 3.
  NeuroBoltConfig();

  std::size_t window_samples() const;
  bool has_st() const { return branches != Branches::kSpecOnly; }
  bool has_sp() const { return branches != Branches::kSTOnly; }
  /// Throws InvalidArgument on inconsistent geometry.
  void validate() const;

  /// d 200, depth 4 and heads 8 in both branches, n 32, rank 64.
  static NeuroBoltConfig reference();
  /// Tiny geometry for gradient checks: C 2, T 400, w 200, w_b 100, L 1,
  /// d 8, depth 1, heads 2, rank 4.
  static NeuroBoltConfig tiny();
};

template <typename T>
struct ModelCache {
  Matrix<T> x;
  STCache<T> st;
  SpecCache<T> sp;
  std::vector<T> r_st, r_sp, r, g, dg, dr;
};

template <typename T>
class NeuroBoltModel {
 public:
  NeuroBoltModel() = default;
  /// Parameters initialized from cfg.seed (truncated normal, sd 0.02).
  explicit NeuroBoltModel(const NeuroBoltConfig& cfg);

  const NeuroBoltConfig& config() const { return cfg_; }

  /// Channel labels -> SE rows. Throws InvalidArgument for unknown labels.
  std::vector<std::size_t> resolve_channels(const std::vector<std::string>& labels) const;

  /// Forward pass for one window. `rng` selects training mode (drop path,
  /// dropout); pass nullptr for deterministic evaluation.
  T forward(const Matrix<T>& x, ModelCache<T>& cache, Rng* rng) const;
  T forward(const Matrix<T>& x, std::span<const std::size_t> channel_ids, ModelCache<T>& cache,
            Rng* rng) const;
  /// Accumulates dL/dparams given dL/dy for the window last run through `cache`.
  void backward(ModelCache<T>& cache, T dy);

  T predict(const Matrix<float>& x) const;
  std::vector<T> predict_batch(std::span<const Matrix<float>> xs) const;
  std::vector<T> predict_batch(std::span<const WindowSample> windows) const;

  nn::ParamList<T> params();
  void zero_grad();
  std::size_t parameter_count();

  STEncoder<T>& st() { return st_; }
  SpecEncoder<T>& sp() { return sp_; }
  const STEncoder<T>& st() const { return st_; }
  const SpecEncoder<T>& sp() const { return sp_; }
  nn::Linear<T>& head() { return head_; }

  /// Head applied to a given fused representation (d values).
  T head_output(std::span<const T> r) const;

 private:
  NeuroBoltConfig cfg_;
  std::vector<std::size_t> input_ids_;
  STEncoder<T> st_;
  SpecEncoder<T> sp_;
  nn::Linear<T> head_;
};

}  // namespace neurobolt
