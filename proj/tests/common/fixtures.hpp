// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Shared test data: small synthetic scans and scratch directories.

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "neurobolt/model.hpp"
#include "neurobolt/signal_core.hpp"
#include "neurobolt/synth.hpp"

namespace neurobolt::testing {

/// Removed with its contents on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "nb") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(std::random_device{}()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

/// Scan with `channels` EEG rows of `samples` random values at `fs` and
/// `rois` ROI rows of `frames` random values at `tr`.
inline ScanPtr random_scan(std::size_t channels, double fs, std::size_t samples, std::size_t rois,
                           double tr, std::size_t frames, std::uint64_t seed = 3,
                           const std::string& subject = "sub-00", const std::string& scan_id = "sub-00_scan-0") {
  Rng rng(seed);
  ScanPair s;
  s.subject_id = subject;
  s.scan_id = scan_id;
  const auto labels = standard_channels();
  for (std::size_t c = 0; c < channels; ++c) s.eeg.channel_labels.push_back(labels[c % labels.size()]);
  s.eeg.fs = fs;
  s.eeg.data = Matrix<float>(channels, samples);
  for (auto& v : s.eeg.data.flat()) v = static_cast<float>(rng.normal());
  s.eeg.normalized = true;
  for (std::size_t p = 0; p < rois; ++p) s.roi.roi_labels.push_back("roi" + std::to_string(p));
  s.roi.tr = tr;
  s.roi.data = Matrix<double>(rois, frames);
  for (auto& v : s.roi.data.flat()) v = rng.normal();
  return std::make_shared<const ScanPair>(std::move(s));
}

/// A 200 s two-channel scan (C3, C4) whose every ROI mixes all band
/// envelopes equally; EEG is amplitude-normalized.
inline ScanPtr two_channel_scan(std::uint64_t seed = 1, double duration_sec = 200.0) {
  auto sc = synth::SynthConfig::defaults(seed);
  sc.channel_labels = {"C3", "C4"};
  sc.channel_band_gains = Matrix<double>(2, sc.band_count(), 1.0);
  sc.roi_mixing = Matrix<double>(sc.rois(), 2 * sc.band_count(), 0.3);
  sc.duration_sec = duration_sec;
  ScanPair scan = synth::gen_scan(sc);
  scan.eeg = normalize_amplitude(scan.eeg);
  return std::make_shared<const ScanPair>(std::move(scan));
}

/// The first `count` windows of two_channel_scan() at the tiny model's window length.
inline std::vector<WindowSample> tiny_windows(std::size_t count = 64, std::uint64_t seed = 1) {
  auto w = align_windows(two_channel_scan(seed), NeuroBoltConfig::tiny().window_sec, 0);
  if (w.size() > count) w.resize(count);
  return w;
}

}  // namespace neurobolt::testing
