// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Scan bundle directory format:
//
//   meta.json  {"subject_id", "scan_id", "condition", "fs", "tr",
//               "channel_labels": [...], "roi_labels": [...],
//               "n_samples", "n_frames", "eeg_normalized",
//               "dtype": "float32", "endianness": "little"}
//   eeg.bin    C x n_samples, row-major little-endian float32
//   roi.bin    P x n_frames, row-major little-endian float32
//
// A dataset directory holds one bundle per subdirectory plus dataset.json:
//   {"scans": [{"dir", "subject_id", "scan_id", "condition"}, ...]}

#include <filesystem>
#include <span>
#include <vector>

#include "neurobolt/signal_core.hpp"

namespace neurobolt::bundle {

void write_scan(const std::filesystem::path& dir, const ScanPair& scan);

/// Throws DataError on a missing file, a manifest/shape mismatch, or an
/// unsupported dtype/endianness.
ScanPair read_scan(const std::filesystem::path& dir);

/// Writes every scan to `root/<scan_id>/` and the dataset manifest.
void write_dataset(const std::filesystem::path& root, const std::vector<ScanPair>& scans);

std::vector<ScanPtr> read_dataset(const std::filesystem::path& root);

void write_f32_le(const std::filesystem::path& path, std::span<const float> values);
std::vector<float> read_f32_le(const std::filesystem::path& path);

}  // namespace neurobolt::bundle
