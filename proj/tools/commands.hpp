// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// Subcommands of the neurobolt command-line tool. Each returns the process
// exit code; usage errors are reported by throwing UsageError.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "neurobolt/error.hpp"

namespace neurobolt::cli {

namespace fs = std::filesystem;

/// Bad flags, bad configuration or unknown names: exit code 2.
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Seed given on the command line; falls back to NEUROBOLT_SEED.
std::optional<std::uint64_t> resolve_seed(std::optional<std::uint64_t> flag);

struct SimulateArgs {
  fs::path config;  // empty: built-in defaults
  fs::path out_dir;
  std::optional<std::uint64_t> seed;
};
int cmd_simulate(const SimulateArgs& a);

struct TrainArgs {
  fs::path config;
  fs::path data_dir;
  fs::path run_dir;  // empty: <output_dir>/<roi>-<split>-seed<seed>
  std::string split;  // "intra" or "inter"; empty: from config
  std::string roi;    // empty: first configured ROI, else the first ROI in the data
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
};
int cmd_train(const TrainArgs& a);

struct EvalArgs {
  fs::path checkpoint;  // run directory or its checkpoint/ subdirectory
  fs::path data_dir;
  fs::path split_file;  // empty: every alignable frame of every scan
  std::string set = "test";
  std::string roi;      // empty: the checkpoint's target ROI
  fs::path out_dir;     // empty: <checkpoint run dir>/eval
  bool plot_data = false;
};
int cmd_eval(const EvalArgs& a);

struct GradCheckArgs {
  bool tiny = false;
  fs::path config;  // model geometry when not --tiny
  double tolerance = 1e-4;
  std::optional<std::uint64_t> seed;
};
int cmd_gradcheck(const GradCheckArgs& a);

struct AblateArgs {
  fs::path config;
  fs::path data_dir;
  fs::path out_dir;
  std::vector<std::size_t> levels;  // empty: the default grid
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
};
int cmd_ablate(const AblateArgs& a);

struct ReportArgs {
  std::vector<fs::path> run_dirs;
  fs::path out_dir;
  std::vector<std::string> names;  // empty: run directory names
};
int cmd_report(const ReportArgs& a);

}  // namespace neurobolt::cli
