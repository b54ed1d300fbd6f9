// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/pipeline.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include "neurobolt/error.hpp"

namespace neurobolt {

ScanPair preprocess(ScanPair scan, const PreprocessConfig& cfg) {
  if (scan.eeg.fs != cfg.target_fs) scan.eeg = resample(scan.eeg, cfg.target_fs);
  if (cfg.normalize_eeg && !scan.eeg.normalized) scan.eeg = normalize_amplitude(scan.eeg);
  if (cfg.normalize_roi) scan.roi = normalize_roi(scan.roi, cfg.roi_lowpass_hz);
  scan.validate();
  return scan;
}

std::vector<ScanPtr> preprocess_all(std::vector<ScanPair> scans, const PreprocessConfig& cfg) {
  std::vector<ScanPtr> out;
  out.reserve(scans.size());
  for (auto& s : scans) out.push_back(std::make_shared<const ScanPair>(preprocess(std::move(s), cfg)));
  return out;
}

std::vector<std::string> DataSplit::scan_ids(int set) const {
  std::vector<std::string> ids;
  for (const auto& [id, f] : scans) {
    const auto& frames = set == 0 ? f.train : set == 1 ? f.val : f.test;
    if (!frames.empty()) ids.push_back(id);
  }
  return ids;
}

namespace {

std::vector<int> frame_indices(const std::vector<WindowSample>& ws) {
  std::vector<int> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(w.frame_index);
  return out;
}

}  // namespace

DataSplit make_split(const std::vector<ScanPtr>& scans, const SplitConfig& cfg, double window_sec) {
  if (scans.empty()) throw InvalidArgument("split: no scans");
  std::set<std::string> seen;
  for (const auto& s : scans) {
    if (!seen.insert(s->scan_id).second) throw InvalidArgument("split: duplicate scan id '" + s->scan_id + "'");
  }
  DataSplit out;
  out.kind = cfg.kind;
  out.gap_sec = cfg.gap_sec;
  out.seed = cfg.seed;
  if (cfg.kind == SplitKind::kIntraScan) {
    for (const auto& s : scans) {
      const SplitSpec spec = split_intra(align_windows(s, window_sec, 0), cfg.ratios, cfg.gap_sec, s->roi.tr);
      out.scans[s->scan_id] = {spec.train_frames, spec.val_frames, spec.test_frames};
    }
    return out;
  }
  const SplitSpec spec = split_inter(scans, cfg.ratios, cfg.seed);
  const auto in = [](const std::vector<std::string>& ids, const std::string& id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
  };
  for (const auto& s : scans) {
    auto frames = frame_indices(align_windows(s, window_sec, 0));
    auto& f = out.scans[s->scan_id];
    if (in(spec.train_scans, s->scan_id)) f.train = std::move(frames);
    else if (in(spec.val_scans, s->scan_id)) f.val = std::move(frames);
    else f.test = std::move(frames);
  }
  return out;
}

Json to_json(const DataSplit& s) {
  Json scans = Json::object();
  for (const auto& [id, f] : s.scans) scans[id] = {{"train", f.train}, {"val", f.val}, {"test", f.test}};
  return {{"kind", to_string(s.kind)}, {"gap_sec", s.gap_sec}, {"seed", s.seed}, {"scans", scans}};
}

DataSplit split_from_json(const Json& j) {
  try {
    DataSplit s;
    s.kind = split_kind_from_string(j.at("kind").get<std::string>());
    s.gap_sec = j.at("gap_sec").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [id, f] : j.at("scans").items()) {
      s.scans[id] = {f.at("train").get<std::vector<int>>(), f.at("val").get<std::vector<int>>(),
                     f.at("test").get<std::vector<int>>()};
    }
    return s;
  } catch (const Json::exception& e) {
    throw DataError(std::string("split file: ") + e.what());
  }
}

int roi_index_of(const std::vector<ScanPtr>& scans, const std::string& roi) {
  if (scans.empty()) throw InvalidArgument("no scans loaded");
  int index = -1;
  for (const auto& s : scans) {
    const auto i = s->roi.find(roi);
    if (!i) {
      std::string labels;
      for (const auto& l : s->roi.roi_labels) labels += (labels.empty() ? "" : ", ") + l;
      throw InvalidArgument("unknown ROI '" + roi + "' in scan " + s->scan_id +
                            "; available: " + labels);
    }
    if (index >= 0 && static_cast<int>(*i) != index) {
      throw InvalidArgument("ROI '" + roi + "' has a different row in scan " + s->scan_id);
    }
    index = static_cast<int>(*i);
  }
  return index;
}

eval::RoiSplit apply_split(const std::vector<ScanPtr>& scans, const DataSplit& split,
                           const std::string& roi, double window_sec) {
  const int index = roi_index_of(scans, roi);
  eval::RoiSplit out;
  out.roi = roi;
  for (const auto& s : scans) {
    const auto it = split.scans.find(s->scan_id);
    if (it == split.scans.end()) continue;
    const auto windows = align_windows(s, window_sec, index);
    const auto add = [&](const std::vector<int>& frames, std::vector<WindowSample>& to) {
      const auto picked = select(windows, frames);
      to.insert(to.end(), picked.begin(), picked.end());
    };
    add(it->second.train, out.train);
    add(it->second.val, out.val);
    add(it->second.test, out.test);
  }
  return out;
}

}  // namespace neurobolt
