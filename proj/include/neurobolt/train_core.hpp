// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Optimization: learning-rate schedule, AdamW with per-tensor groups,
// checkpoints, finite-difference gradient verification and the epoch loop.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "neurobolt/model.hpp"
#include "neurobolt/signal_core.hpp"

namespace neurobolt {

struct TrainConfig {
  std::size_t batch_size = 16;
  double peak_lr = 3e-4;
  double min_lr = 1e-6;
  std::size_t epochs = 30;
  std::size_t warmup_epochs = 5;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
  double drop_path = 0.1;
  double layer_decay = 0.65;
  std::uint64_t seed = 0;
  int precision = 32;  // 32 or 64

  void validate() const;
  /// Batch 64 for inter-subject runs, 16 otherwise.
  static TrainConfig for_split(SplitKind kind);
};

/// Learning rate of a tensor at optimizer step `step` (0-based): linear
/// warmup from 0 to peak over warmup_epochs * steps_per_epoch steps, cosine
/// decay reaching min_lr at the final step epochs * steps_per_epoch - 1,
/// times layer_decay^(n_layers - layer).
double lr_at(std::size_t step, const TrainConfig& cfg, std::size_t steps_per_epoch, int layer,
             int n_layers);

/// True for tensors subject to weight decay. Biases, normalization gains and
/// offsets, and embedding tables (temporal, spatial, frequency, class token)
/// are excluded.
template <typename T>
bool decays(const nn::ParamRef<T>& p) {
  return p.kind == nn::ParamKind::kWeight;
}

template <typename T>
class AdamW {
 public:
  AdamW(nn::ParamList<T> params, const TrainConfig& cfg);
  /// One update; lr_of(i) gives the rate for tensor i.
  void step(const std::function<double(std::size_t)>& lr_of);
  std::size_t steps() const { return t_; }
  const nn::ParamList<T>& params() const { return params_; }

 private:
  nn::ParamList<T> params_;
  std::vector<std::vector<double>> m_, v_;
  TrainConfig cfg_;
  std::size_t t_ = 0;
};

struct TensorRecord {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;
};

struct Checkpoint {
  NeuroBoltConfig model;
  TrainConfig train;
  std::size_t epoch = 0;  // epoch (1-based) whose parameters are stored
  double best_val_r = 0.0;
  double best_val_mse = 0.0;
  std::vector<TensorRecord> tensors;
};

/// Snapshot of every model tensor in params() order, narrowed to float32.
template <typename T>
std::vector<TensorRecord> snapshot(NeuroBoltModel<T>& model);

/// Copies tensors into a model of matching configuration. Throws DataError on
/// a missing, extra or misshapen tensor.
template <typename T>
void restore(NeuroBoltModel<T>& model, const std::vector<TensorRecord>& tensors);

/// Writes manifest.json and params.bin (little-endian float32) into `dir`.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);
/// Model rebuilt from the checkpoint's configuration and tensors.
NeuroBoltModel<float> model_from_checkpoint(const Checkpoint& ckpt);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_r = 0.0;
  bool val_r_defined = true;
  double val_mse = 0.0;
  double lr = 0.0;  // top-layer rate at the epoch's last step
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> curve;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Runs `cfg.epochs` epochs of mini-batch AdamW on MSE, shuffling the
/// training windows with a per-epoch seed and evaluating Pearson R and MSE on
/// `val` after every epoch. Returns the parameters of the epoch with the
/// highest validation R. Throws InvalidArgument for empty splits and
/// NumericError when the loss becomes non-finite.
TrainResult train(const std::vector<WindowSample>& train_set, const std::vector<WindowSample>& val,
                  const NeuroBoltConfig& model_cfg, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Same loop starting from an existing model (updated in place to the best
/// epoch's parameters).
template <typename T>
TrainResult train_model(NeuroBoltModel<T>& model, const std::vector<WindowSample>& train_set,
                        const std::vector<WindowSample>& val, const TrainConfig& cfg,
                        const EpochCallback& on_epoch = {});

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  bool finite = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool all_finite = true;
  bool passed(double tolerance) const { return all_finite && max_rel_error < tolerance; }
};

struct GradCheckOptions {
  std::size_t batch = 4;
  std::size_t coords_per_tensor = 10;
  double step = 1e-5;
  /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double rel_floor = 1e-6;
  double input_scale = 0.5;
  bool zero_input = false;
  /// Only tensors whose name starts with one of these prefixes (all when empty).
  std::vector<std::string> prefixes;
  std::uint64_t seed = 0;
};

/// Compares analytic gradients of the batch MSE with central finite
/// differences in double precision, with dropout and drop path disabled.
GradCheckReport grad_check(const NeuroBoltConfig& model_cfg, const GradCheckOptions& opt = {});

}  // namespace neurobolt
