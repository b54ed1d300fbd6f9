// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Co-registered EEG / ROI-BOLD scans, their preprocessing, and the
// sequence-to-one windowing that pairs each BOLD frame with the EEG that
// precedes it.
//
// Time convention: EEG sample n is at n / fs seconds; BOLD frame k is
// timestamped at k * tr (acquisition start). The window for frame k is the
// half-open interval [k*tr - window_sec, k*tr).

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "neurobolt/tensor.hpp"

namespace neurobolt {

struct EEGRecording {
  std::vector<std::string> channel_labels;
  double fs = 0.0;
  Matrix<float> data;  // C x N; microvolts, or unitless once normalized
  bool normalized = false;

  std::size_t channels() const { return data.rows(); }
  std::size_t samples() const { return data.cols(); }
  double duration_sec() const { return static_cast<double>(samples()) / fs; }

  /// Throws InvalidArgument when an invariant does not hold.
  void validate() const;
};

struct ROITimeSeries {
  std::vector<std::string> roi_labels;
  double tr = 0.0;
  Matrix<double> data;  // P x K

  std::size_t rois() const { return data.rows(); }
  std::size_t frames() const { return data.cols(); }
  double duration_sec() const { return static_cast<double>(frames()) * tr; }

  /// Index of `label`, or nullopt.
  std::optional<std::size_t> find(const std::string& label) const;
  void validate() const;
};

struct ScanPair {
  std::string subject_id;
  std::string scan_id;
  std::string condition = "rest";
  EEGRecording eeg;
  ROITimeSeries roi;

  /// Checks both recordings and that the EEG covers the BOLD frames.
  void validate() const;
};

using ScanPtr = std::shared_ptr<const ScanPair>;

/// One (EEG window, scalar BOLD target) pair. The window is a view into the
/// owning scan's EEG; x() materializes it as a C x T matrix.
struct WindowSample {
  ScanPtr scan;
  std::size_t start = 0;   // first EEG sample of the window
  std::size_t length = 0;  // T
  double y = 0.0;
  int roi_index = 0;
  int frame_index = 0;

  const std::string& scan_id() const { return scan->scan_id; }
  std::size_t channels() const { return scan->eeg.channels(); }
  Matrix<float> x() const;
  /// Writes the C x T window into `out` (row-major, C*T values).
  void copy_x(float* out) const;
};

enum class SplitKind { kIntraScan, kInterSubject };

struct SplitSpec {
  SplitKind kind = SplitKind::kIntraScan;
  // Intra-scan: frame indices. Inter-subject: unused.
  std::vector<int> train_frames, val_frames, test_frames;
  // Inter-subject: scan ids. Intra-scan: the single scan id in train_scans.
  std::vector<std::string> train_scans, val_scans, test_scans;
  double gap_sec = 0.0;
  int gap_frames = 0;
  std::uint64_t seed = 0;
};

/// Band-limited resampling in the frequency domain (zero-padding or
/// truncating the one-sided spectrum). Output length is
/// round(N * target_fs / fs). Equal rates return an exact copy.
EEGRecording resample(const EEGRecording& eeg, double target_fs);

/// Divides every value by 100 (microvolts to roughly [-1, 1]).
EEGRecording normalize_amplitude(const EEGRecording& eeg);

/// Per row: demean, optionally low-pass below `lowpass_hz` (ideal zero-phase
/// filter on the one-sided spectrum), then divide by the 95th percentile of
/// the absolute amplitude. Throws InvalidArgument naming the ROI for a
/// constant row.
ROITimeSeries normalize_roi(const ROITimeSeries& roi, std::optional<double> lowpass_hz = 0.15);

/// Percentile of `values` (q in [0, 1]) with linear interpolation between
/// order statistics: h = (n - 1) q, result = v[floor h] + frac(h) (v[floor h + 1] - v[floor h]).
double percentile(std::vector<double> values, double q);

/// One sample per BOLD frame k with k*tr >= window_sec whose window lies
/// inside the EEG. Returns an empty list (and logs a warning) when the scan
/// is shorter than one window.
std::vector<WindowSample> align_windows(const ScanPtr& scan, double window_sec, int roi_index);

/// Number of frames align_windows would emit for a scan with K frames, ignoring EEG length.
std::size_t alignable_frame_count(std::size_t frames, double tr, double window_sec);

/// Chronological split of one scan's samples: the first r0/(r0+r1+r2) go to
/// train, the next block to val, the rest to test; the first
/// ceil(gap_sec/tr) frames of the val and test blocks are dropped.
SplitSpec split_intra(const std::vector<WindowSample>& samples, std::array<int, 3> ratios = {8, 1, 1},
                      double gap_sec = 20.0, double tr = 2.1);

/// Subject-grouped random split of scans. Subjects are shuffled with `seed`
/// and assigned greedily to the set whose scan count is furthest below its
/// ratio target, after each set has received one subject.
SplitSpec split_inter(const std::vector<ScanPtr>& scans, std::array<int, 3> ratios = {3, 1, 1},
                      std::uint64_t seed = 0);

/// Samples whose frame (intra) or scan (inter) is in the given membership.
std::vector<WindowSample> select(const std::vector<WindowSample>& samples,
                                 const std::vector<int>& frames);
std::vector<WindowSample> select(const std::vector<WindowSample>& samples,
                                 const std::vector<std::string>& scan_ids);

}  // namespace neurobolt
