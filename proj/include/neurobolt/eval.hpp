// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Scan-level evaluation, reference baselines (mean predictor, ridge on log
// band power), the branch/scale ablation grid and report files.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurobolt/config.hpp"
#include "neurobolt/model.hpp"
#include "neurobolt/signal_core.hpp"
#include "neurobolt/synth.hpp"
#include "neurobolt/train_core.hpp"

namespace neurobolt::eval {

using synth::Band;

/// Maps a batch of windows to one prediction each.
using Predictor = std::function<std::vector<double>(std::span<const WindowSample>)>;

Predictor model_predictor(const NeuroBoltModel<float>& model);

struct ScanResult {
  std::string model;
  std::string subject_id;
  std::string scan_id;
  std::string roi;
  double pearson_r = 0.0;
  bool r_defined = true;  // false: constant prediction or target, r reported as 0
  double mse = 0.0;
  std::size_t n_windows = 0;
  std::vector<int> frames;
  std::vector<double> truth, pred;
};

/// Predicts every alignable frame of `scan` for one ROI and scores it
/// against the (already normalized) ROI series. Throws InvalidArgument when
/// the scan yields fewer than two windows.
ScanResult evaluate_scan(const Predictor& predict, const ScanPtr& scan, int roi_index,
                         double window_sec, const std::string& model_name = "model");

/// Scores pre-aligned windows, one result per scan, in first-appearance order.
std::vector<ScanResult> evaluate_windows(const Predictor& predict,
                                         const std::vector<WindowSample>& windows,
                                         const std::string& model_name);

struct Aggregate {
  std::string model;
  std::string roi;
  std::size_t n_scans = 0;
  double mean_r = 0.0, std_r = 0.0;
  double mean_mse = 0.0, std_mse = 0.0;
};

/// Per (model, ROI) mean and sample standard deviation across scans.
std::vector<Aggregate> aggregate(const std::vector<ScanResult>& rows);

struct EvalReport {
  std::string split;  // descriptor, for example "inter test: sub-03_scan-1,sub-07_scan-1"
  Json config;        // resolved configuration of the evaluated run
  std::vector<ScanResult> rows;
  std::vector<Aggregate> aggregates;
};

Json to_json(const EvalReport& r);
EvalReport report_from_json(const Json& j);
void write_report(const EvalReport& r, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path);
/// Per-frame predicted and true values: model,scan_id,roi,frame,time_sec,truth,pred.
void write_plot_data(const std::vector<ScanResult>& rows, double tr,
                     const std::filesystem::path& csv_path);

/// One row per (scan, ROI) and one R column per model, in the order given.
/// Missing cells are left empty.
struct MergedTable {
  std::vector<std::string> models;
  struct Row {
    std::string scan_id, roi;
    std::vector<std::optional<double>> r;
  };
  std::vector<Row> rows;
};
MergedTable merge_reports(const std::vector<EvalReport>& reports,
                          const std::vector<std::string>& model_names);
void write_merged(const MergedTable& t, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path);

// ---------------------------------------------------------------------------
// Baselines.

struct MeanBaseline {
  double mean = 0.0;
  /// Throws InvalidArgument for an empty target list.
  static MeanBaseline fit(std::span<const double> targets);
  double predict() const { return mean; }
  Predictor predictor() const;
};

/// delta 1-4, theta 4-8, alpha 8-12, beta 12-30, gamma 30-70 Hz.
std::vector<Band> default_bands();

/// Per-channel, per-band log power of one window: non-overlapping
/// `stft_window`-sample segments, |X_k|^2 summed over bins with
/// lo <= f_k < hi, averaged over segments, then log(p + 1e-8). Layout
/// c * B + b.
std::vector<double> band_power_features(const Matrix<float>& x, double fs,
                                        const std::vector<Band>& bands,
                                        std::size_t stft_window = 200);

/// Linear model on standardized features with an unpenalized intercept.
struct RidgeModel {
  std::vector<double> mean, scale, beta;
  double intercept = 0.0;
  double lambda = 0.0;

  double predict(std::span<const double> features) const;
};

/// Minimizes sum (y - b0 - z.beta)^2 + lambda |beta|^2 over standardized
/// features z. Throws InvalidArgument for lambda <= 0 or an empty design.
RidgeModel fit_ridge(const Matrix<double>& features, std::span<const double> y, double lambda);

/// {1e-3, 1e-2, ..., 1e3}.
std::vector<double> default_lambda_grid();

struct RidgeBaseline {
  std::vector<Band> bands;
  double fs = 200.0;
  std::size_t stft_window = 200;
  RidgeModel model;
  double val_r = 0.0;  // validation R of the chosen lambda

  double predict(const WindowSample& w) const;
  Predictor predictor() const;
};

/// Fits on `train` for every lambda of the grid and keeps the one with the
/// highest validation R (ties and undefined R fall back to lower MSE).
RidgeBaseline baseline_ridge(const std::vector<WindowSample>& train,
                             const std::vector<WindowSample>& val, std::vector<Band> bands,
                             double fs, const std::vector<double>& lambdas = default_lambda_grid());

// ---------------------------------------------------------------------------
// Paired comparison across scans.

struct PairedTTest {
  std::size_t n = 0;
  double mean_diff = 0.0;  // mean of a - b
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Throws InvalidArgument for fewer than two pairs or unequal lengths. A zero
/// variance of the differences gives t = +/-inf (p = 0) or t = 0 (p = 1).
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Ablation grid.

struct RoiSplit {
  std::string roi;
  std::vector<WindowSample> train, val, test;
};

struct AblationSetting {
  std::string name;
  Branches branches = Branches::kBoth;
  std::size_t level = 3;
};

/// T only; MS only (l3); T+MS at l0..l4.
std::vector<AblationSetting> default_ablation_grid();

struct AblationRow {
  std::string name;
  std::vector<double> roi_r, roi_mse;  // per ROI, mean over test scans
  double avg_r = 0.0, avg_mse = 0.0;
};

struct AblationTable {
  std::vector<std::string> rois;
  std::vector<AblationRow> rows;
};

/// Trains and evaluates every setting on every ROI with the same seeds.
/// `progress`, when set, receives one line per finished (setting, ROI).
AblationTable ablation_run(const std::vector<RoiSplit>& data, const NeuroBoltConfig& base,
                           const TrainConfig& train_cfg,
                           const std::vector<AblationSetting>& settings,
                           const std::function<void(const std::string&)>& progress = {});

Json to_json(const AblationTable& t);
void write_ablation_csv(const AblationTable& t, const std::filesystem::path& csv_path);

}  // namespace neurobolt::eval
