// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON forms of every configuration type. Readers are strict: an unknown
// key, a wrong type or an out-of-range value throws ConfigError naming the
// offending path (for example "model.st.depth").

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurobolt/error.hpp"
#include "neurobolt/model.hpp"
#include "neurobolt/synth.hpp"
#include "neurobolt/train_core.hpp"

namespace neurobolt {

using Json = nlohmann::json;

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct SplitConfig {
  SplitKind kind = SplitKind::kIntraScan;
  std::array<int, 3> ratios = {8, 1, 1};
  double gap_sec = 20.0;
  std::uint64_t seed = 0;
};

struct PreprocessConfig {
  double target_fs = 200.0;
  bool normalize_eeg = true;  // skipped for bundles already marked normalized
  /// Scan bundles written by `simulate` already hold normalized ROI series;
  /// raw parcellated series need this set.
  bool normalize_roi = false;
  std::optional<double> roi_lowpass_hz = 0.15;
};

struct DatasetConfig {
  int n_subjects = 8;
  int scans_per_subject = 1;
};

struct RunConfig {
  std::uint64_t seed = 0;
  synth::SynthConfig synth = synth::SynthConfig::defaults();
  DatasetConfig dataset;
  PreprocessConfig preprocess;
  NeuroBoltConfig model;
  TrainConfig train;
  SplitConfig split;
  std::vector<std::string> rois;  // empty = every ROI in the data
  std::string output_dir = "runs";

  /// Sets the run seed and every seed derived from it (synth, model, train,
  /// split). The synthetic gains are redrawn from the new seed.
  void set_seed(std::uint64_t s);
  void validate() const;
};

std::string to_string(SplitKind k);
SplitKind split_kind_from_string(const std::string& s);

Json to_json(const STConfig& c);
Json to_json(const SpecConfig& c);
Json to_json(const NeuroBoltConfig& c);
Json to_json(const TrainConfig& c);
Json to_json(const synth::SynthConfig& c);
Json to_json(const SplitConfig& c);
Json to_json(const PreprocessConfig& c);
Json to_json(const DatasetConfig& c);
Json to_json(const RunConfig& c);

// Readers start from the defaults and override the keys present.
NeuroBoltConfig model_config_from_json(const Json& j, const std::string& path = "model");
TrainConfig train_config_from_json(const Json& j, const std::string& path = "train");
/// Scalar generator settings over SynthConfig::defaults(seed); channel and
/// ROI layouts, bands and mixing tables always come from the defaults.
synth::SynthConfig synth_config_from_json(const Json& j, const std::string& path = "synth");
SplitConfig split_config_from_json(const Json& j, const std::string& path = "split");
RunConfig run_config_from_json(const Json& j);

/// Parses JSON text; syntax errors become ConfigError("<source>:<line>:<col>: ...").
Json parse_json_text(const std::string& text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace neurobolt
