// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/signal_core.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "neurobolt/error.hpp"
#include "neurobolt/fft.hpp"
#include "neurobolt/log.hpp"
#include "neurobolt/rng.hpp"

namespace neurobolt {
namespace {

constexpr double kTimeEps = 1e-9;

bool all_finite(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace

void EEGRecording::validate() const {
  if (fs <= 0.0 || !std::isfinite(fs)) throw InvalidArgument("EEG sampling rate must be positive");
  if (data.rows() != channel_labels.size()) {
    throw InvalidArgument("EEG has " + std::to_string(data.rows()) + " rows but " +
                          std::to_string(channel_labels.size()) + " channel labels");
  }
  if (data.cols() == 0) throw InvalidArgument("EEG recording is empty");
  if (!all_finite(data.flat())) throw InvalidArgument("EEG contains non-finite values");
}

std::optional<std::size_t> ROITimeSeries::find(const std::string& label) const {
  const auto it = std::find(roi_labels.begin(), roi_labels.end(), label);
  if (it == roi_labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - roi_labels.begin());
}

void ROITimeSeries::validate() const {
  if (tr <= 0.0 || !std::isfinite(tr)) throw InvalidArgument("ROI repetition time must be positive");
  if (data.rows() != roi_labels.size()) {
    throw InvalidArgument("ROI series has " + std::to_string(data.rows()) + " rows but " +
                          std::to_string(roi_labels.size()) + " labels");
  }
  if (data.cols() == 0) throw InvalidArgument("ROI series is empty");
}

void ScanPair::validate() const {
  eeg.validate();
  roi.validate();
  if (eeg.duration_sec() + kTimeEps < roi.duration_sec() - roi.tr) {
    throw InvalidArgument("scan " + scan_id + ": EEG (" + std::to_string(eeg.duration_sec()) +
                          " s) does not cover the BOLD frames (" +
                          std::to_string(roi.duration_sec()) + " s)");
  }
}

Matrix<float> WindowSample::x() const {
  Matrix<float> out(channels(), length);
  copy_x(out.data());
  return out;
}

void WindowSample::copy_x(float* out) const {
  const auto& eeg = scan->eeg.data;
  for (std::size_t c = 0; c < eeg.rows(); ++c) {
    const float* src = eeg.data() + c * eeg.cols() + start;
    std::copy(src, src + length, out + c * length);
  }
}

EEGRecording resample(const EEGRecording& eeg, double target_fs) {
  if (!(target_fs > 0.0)) throw InvalidArgument("resample: target rate must be positive");
  if (eeg.samples() == 0) throw InvalidArgument("resample: empty recording");
  if (target_fs == eeg.fs) return eeg;

  const std::size_t n_in = eeg.samples();
  const auto n_out =
      static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * target_fs / eeg.fs));
  if (n_out == 0) throw InvalidArgument("resample: output would be empty");

  EEGRecording out;
  out.channel_labels = eeg.channel_labels;
  out.fs = target_fs;
  out.normalized = eeg.normalized;
  out.data = Matrix<float>(eeg.channels(), n_out);

  std::vector<double> x(n_in), y(n_out);
  std::vector<std::complex<double>> spec_in(n_in / 2 + 1), spec_out(n_out / 2 + 1);
  const std::size_t n_min = std::min(n_in, n_out);
  const double scale = static_cast<double>(n_out) / static_cast<double>(n_in);

  for (std::size_t c = 0; c < eeg.channels(); ++c) {
    const auto row = eeg.data.row(c);
    std::copy(row.begin(), row.end(), x.begin());
    fft::rfft(x, spec_in);
    std::fill(spec_out.begin(), spec_out.end(), std::complex<double>{});
    const std::size_t keep = n_min / 2 + 1;
    std::copy(spec_in.begin(), spec_in.begin() + keep, spec_out.begin());
    // The shared Nyquist bin of an even-length spectrum folds the +/- halves.
    if (n_min % 2 == 0) {
      if (n_out < n_in) spec_out[n_min / 2] *= 2.0;
      else if (n_out > n_in) spec_out[n_min / 2] *= 0.5;
    }
    fft::irfft(spec_out, y);
    auto dst = out.data.row(c);
    for (std::size_t t = 0; t < n_out; ++t) dst[t] = static_cast<float>(y[t] * scale);
  }
  return out;
}

EEGRecording normalize_amplitude(const EEGRecording& eeg) {
  if (eeg.normalized) throw InvalidArgument("EEG amplitude is already normalized");
  EEGRecording out = eeg;
  for (auto& v : out.data.flat()) v = static_cast<float>(static_cast<double>(v) / 100.0);
  out.normalized = true;
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sequence");
  if (q < 0.0 || q > 1.0) throw InvalidArgument("percentile: q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

ROITimeSeries normalize_roi(const ROITimeSeries& roi, std::optional<double> lowpass_hz) {
  roi.validate();
  if (lowpass_hz && !(*lowpass_hz > 0.0)) throw InvalidArgument("low-pass cutoff must be positive");
  ROITimeSeries out = roi;
  const std::size_t k = roi.frames();
  std::vector<double> row(k), mag(k);
  std::vector<std::complex<double>> spec(k / 2 + 1);

  for (std::size_t p = 0; p < roi.rois(); ++p) {
    const auto src = roi.data.row(p);
    std::copy(src.begin(), src.end(), row.begin());
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(k);
    double var = 0.0;
    for (double& v : row) {
      v -= mean;
      var += v * v;
    }
    if (!(var > 0.0)) {
      throw InvalidArgument("ROI '" + roi.roi_labels[p] + "' has zero variance; cannot normalize");
    }
    if (lowpass_hz && k > 1) {
      fft::rfft(row, spec);
      const double df = 1.0 / (static_cast<double>(k) * roi.tr);
      for (std::size_t j = 0; j < spec.size(); ++j) {
        if (static_cast<double>(j) * df > *lowpass_hz) spec[j] = 0.0;
      }
      fft::irfft(spec, row);
    }
    for (std::size_t t = 0; t < k; ++t) mag[t] = std::abs(row[t]);
    const double p95 = percentile(mag, 0.95);
    if (!(p95 > 0.0)) {
      throw InvalidArgument("ROI '" + roi.roi_labels[p] +
                            "' has a zero 95th-percentile amplitude; cannot normalize");
    }
    auto dst = out.data.row(p);
    for (std::size_t t = 0; t < k; ++t) dst[t] = row[t] / p95;
  }
  return out;
}

std::size_t alignable_frame_count(std::size_t frames, double tr, double window_sec) {
  const auto first = static_cast<std::size_t>(std::ceil(window_sec / tr - kTimeEps));
  return frames > first ? frames - first : 0;
}

std::vector<WindowSample> align_windows(const ScanPtr& scan, double window_sec, int roi_index) {
  if (!scan) throw InvalidArgument("align_windows: null scan");
  const auto& eeg = scan->eeg;
  const auto& roi = scan->roi;
  if (!(window_sec > 0.0)) throw InvalidArgument("window length must be positive");
  if (roi_index < 0 || static_cast<std::size_t>(roi_index) >= roi.rois()) {
    throw InvalidArgument("ROI index " + std::to_string(roi_index) + " out of range (scan has " +
                          std::to_string(roi.rois()) + " ROIs)");
  }
  const auto length = static_cast<std::size_t>(std::llround(window_sec * eeg.fs));
  if (length == 0 || length > eeg.samples()) {
    throw InvalidArgument("window of " + std::to_string(window_sec) + " s is longer than scan " +
                          scan->scan_id + " (" + std::to_string(eeg.duration_sec()) + " s of EEG)");
  }

  std::vector<WindowSample> out;
  if (roi.duration_sec() + kTimeEps < window_sec) {
    log::warning("scan " + scan->scan_id + ": BOLD series shorter than one " +
                 std::to_string(window_sec) + " s window; no samples emitted");
    return out;
  }
  const auto first = static_cast<std::size_t>(std::ceil(window_sec / roi.tr - kTimeEps));
  for (std::size_t k = first; k < roi.frames(); ++k) {
    const auto end = static_cast<std::size_t>(std::llround(static_cast<double>(k) * roi.tr * eeg.fs));
    if (end > eeg.samples() || end < length) continue;
    WindowSample s;
    s.scan = scan;
    s.start = end - length;
    s.length = length;
    s.y = roi.data(static_cast<std::size_t>(roi_index), k);
    s.roi_index = roi_index;
    s.frame_index = static_cast<int>(k);
    out.push_back(std::move(s));
  }
  return out;
}

SplitSpec split_intra(const std::vector<WindowSample>& samples, std::array<int, 3> ratios,
                      double gap_sec, double tr) {
  if (std::any_of(ratios.begin(), ratios.end(), [](int r) { return r <= 0; })) {
    throw InvalidArgument("split ratios must be positive");
  }
  if (!(tr > 0.0) || gap_sec < 0.0) throw InvalidArgument("split_intra: bad tr or gap");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].frame_index <= samples[i - 1].frame_index) {
      throw InvalidArgument("split_intra: samples must be ordered by frame index");
    }
  }
  const std::size_t n = samples.size();
  const int total = ratios[0] + ratios[1] + ratios[2];
  const std::size_t n_train = n * static_cast<std::size_t>(ratios[0]) / static_cast<std::size_t>(total);
  const std::size_t n_val_block = n * static_cast<std::size_t>(ratios[1]) / static_cast<std::size_t>(total);
  const auto gap = static_cast<std::size_t>(std::ceil(gap_sec / tr - kTimeEps));

  SplitSpec spec;
  spec.kind = SplitKind::kIntraScan;
  spec.gap_sec = gap_sec;
  spec.gap_frames = static_cast<int>(gap);
  if (!samples.empty()) spec.train_scans.push_back(samples.front().scan_id());

  const std::size_t val_begin = n_train + gap;
  const std::size_t val_end = n_train + n_val_block;
  const std::size_t test_begin = val_end + gap;
  if (n_train == 0 || val_begin >= val_end || test_begin >= n) {
    throw InvalidArgument("split_intra: " + std::to_string(n) +
                          " samples are too few for nonempty train/val/test sets after " +
                          std::to_string(gap) + "-frame gaps");
  }
  for (std::size_t i = 0; i < n_train; ++i) spec.train_frames.push_back(samples[i].frame_index);
  for (std::size_t i = val_begin; i < val_end; ++i) spec.val_frames.push_back(samples[i].frame_index);
  for (std::size_t i = test_begin; i < n; ++i) spec.test_frames.push_back(samples[i].frame_index);
  return spec;
}

SplitSpec split_inter(const std::vector<ScanPtr>& scans, std::array<int, 3> ratios,
                      std::uint64_t seed) {
  if (std::any_of(ratios.begin(), ratios.end(), [](int r) { return r <= 0; })) {
    throw InvalidArgument("split ratios must be positive");
  }
  std::vector<std::string> subjects;
  std::map<std::string, std::vector<std::string>> scans_of;
  std::set<std::string> seen_scans;
  for (const auto& s : scans) {
    if (!seen_scans.insert(s->scan_id).second) {
      throw InvalidArgument("split_inter: duplicate scan id " + s->scan_id);
    }
    auto& list = scans_of[s->subject_id];
    if (list.empty()) subjects.push_back(s->subject_id);
    list.push_back(s->scan_id);
  }
  if (subjects.size() < 3) {
    throw InvalidArgument("split_inter: need at least 3 subjects, got " +
                          std::to_string(subjects.size()));
  }

  Rng rng(seed);
  rng.shuffle(std::span<std::string>(subjects));

  const int total = ratios[0] + ratios[1] + ratios[2];
  std::array<double, 3> target{};
  for (int i = 0; i < 3; ++i) {
    target[i] = static_cast<double>(scans.size()) * ratios[i] / static_cast<double>(total);
  }
  std::array<std::size_t, 3> count{};
  std::array<std::vector<std::string>, 3> members;

  for (std::size_t s = 0; s < subjects.size(); ++s) {
    const auto& subject_scans = scans_of[subjects[s]];
    int pick = -1;
    // Each set gets one subject before any set gets a second.
    if (s < 3) {
      pick = static_cast<int>(2 - s);  // test, val, train
    } else {
      double best = -1e300;
      for (int i = 0; i < 3; ++i) {
        const double deficit = target[i] - static_cast<double>(count[i]);
        if (deficit > best + 1e-12) {
          best = deficit;
          pick = i;
        }
      }
    }
    count[pick] += subject_scans.size();
    members[pick].insert(members[pick].end(), subject_scans.begin(), subject_scans.end());
  }

  SplitSpec spec;
  spec.kind = SplitKind::kInterSubject;
  spec.seed = seed;
  spec.train_scans = std::move(members[0]);
  spec.val_scans = std::move(members[1]);
  spec.test_scans = std::move(members[2]);
  return spec;
}

std::vector<WindowSample> select(const std::vector<WindowSample>& samples,
                                 const std::vector<int>& frames) {
  const std::set<int> keep(frames.begin(), frames.end());
  std::vector<WindowSample> out;
  for (const auto& s : samples) {
    if (keep.count(s.frame_index)) out.push_back(s);
  }
  return out;
}

std::vector<WindowSample> select(const std::vector<WindowSample>& samples,
                                 const std::vector<std::string>& scan_ids) {
  const std::set<std::string> keep(scan_ids.begin(), scan_ids.end());
  std::vector<WindowSample> out;
  for (const auto& s : samples) {
    if (keep.count(s.scan_id())) out.push_back(s);
  }
  return out;
}

}  // namespace neurobolt
