// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Glue between stored scans and training: preprocessing, dataset splits in a
// serializable per-scan form, and per-ROI window sets.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "neurobolt/config.hpp"
#include "neurobolt/eval.hpp"
#include "neurobolt/signal_core.hpp"

namespace neurobolt {

/// Resamples EEG to target_fs, scales amplitude unless the recording is
/// already normalized, and optionally normalizes the ROI series.
ScanPair preprocess(ScanPair scan, const PreprocessConfig& cfg);
std::vector<ScanPtr> preprocess_all(std::vector<ScanPair> scans, const PreprocessConfig& cfg);

/// Frame membership per scan. Inter-subject splits put every alignable frame
/// of a scan into one set; intra-scan splits cut each scan chronologically.
struct DataSplit {
  SplitKind kind = SplitKind::kIntraScan;
  double gap_sec = 0.0;
  std::uint64_t seed = 0;
  struct Frames {
    std::vector<int> train, val, test;
  };
  std::map<std::string, Frames> scans;  // keyed by scan_id

  std::vector<std::string> scan_ids(int set) const;  // 0 train, 1 val, 2 test
};

DataSplit make_split(const std::vector<ScanPtr>& scans, const SplitConfig& cfg, double window_sec);

Json to_json(const DataSplit& s);
DataSplit split_from_json(const Json& j);

/// Index of `roi` in every scan. Throws InvalidArgument listing the
/// available labels when a scan lacks it.
int roi_index_of(const std::vector<ScanPtr>& scans, const std::string& roi);

/// Windows of one ROI partitioned by `split`. Scans absent from the split
/// are ignored.
eval::RoiSplit apply_split(const std::vector<ScanPtr>& scans, const DataSplit& split,
                           const std::string& roi, double window_sec);

}  // namespace neurobolt
