// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "neurobolt/bundle.hpp"
#include "neurobolt/config.hpp"
#include "neurobolt/eval.hpp"
#include "neurobolt/log.hpp"
#include "neurobolt/pipeline.hpp"
#include "neurobolt/synth.hpp"
#include "neurobolt/train_core.hpp"

namespace neurobolt::cli {
namespace {

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
  if (!out) throw Error("cannot write " + path.string());
}

/// Exclusive ownership of an output directory for the life of one command.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      if (errno == EEXIST) {
        throw Error(dir.string() + " is in use by another command (remove " + path_.string() +
                    " if no command is running)");
      }
      throw Error("cannot create " + path_.string() + ": " + std::strerror(errno));
    }
    std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

struct LoadedConfig {
  RunConfig run;
  Json raw = Json::object();  // the file as written, for presence checks
};

LoadedConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_flag) {
  LoadedConfig c;
  if (!path.empty()) {
    c.raw = read_json_file(path);
    c.run = run_config_from_json(c.raw);
  }
  if (const auto seed = resolve_seed(seed_flag)) c.run.set_seed(*seed);
  return c;
}

bool has_key(const Json& j, const char* section, const char* key) {
  return j.contains(section) && j[section].is_object() && j[section].contains(key);
}

std::vector<ScanPtr> load_scans(const fs::path& dir, const PreprocessConfig& pre) {
  if (dir.empty()) throw UsageError("--data is required");
  if (!fs::exists(dir / "dataset.json")) throw UsageError(dir.string() + " is not a dataset (no dataset.json)");
  std::vector<ScanPair> raw;
  for (const auto& s : bundle::read_dataset(dir)) raw.push_back(*s);
  if (raw.empty()) throw DataError(dir.string() + " holds no scans");
  return preprocess_all(std::move(raw), pre);
}

/// Points the model's input rows at the channels present in the data.
void match_channels(NeuroBoltConfig& model, const std::vector<ScanPtr>& scans) {
  const auto& labels = scans.front()->eeg.channel_labels;
  for (const auto& s : scans) {
    if (s->eeg.channel_labels != labels) {
      throw DataError("scan " + s->scan_id + " has a different channel layout than " +
                      scans.front()->scan_id);
    }
  }
  model.channels = labels;
  for (const auto& l : labels) {
    if (std::find(model.channel_vocab.begin(), model.channel_vocab.end(), l) == model.channel_vocab.end()) {
      model.channel_vocab.push_back(l);
    }
  }
  if (model.fs != scans.front()->eeg.fs) {
    throw UsageError("model.fs " + std::to_string(model.fs) + " differs from the preprocessed EEG rate " +
                     std::to_string(scans.front()->eeg.fs));
  }
  model.validate();
}

std::string pick_roi(const std::string& flag, const RunConfig& cfg, const std::vector<ScanPtr>& scans) {
  std::string roi = flag;
  if (roi.empty()) roi = cfg.rois.empty() ? scans.front()->roi.roi_labels.at(0) : cfg.rois.front();
  roi_index_of(scans, roi);  // throws with the available labels
  return roi;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string split_descriptor(const DataSplit& split, int set) {
  static const char* kNames[] = {"train", "val", "test"};
  return to_string(split.kind) + " " + kNames[set] + ": " + join(split.scan_ids(set), ",");
}

Json epoch_json(const EpochRecord& e) {
  return {{"epoch", e.epoch},
          {"train_loss", e.train_loss},
          {"val_R", e.val_r},
          {"val_R_defined", e.val_r_defined},
          {"val_MSE", e.val_mse},
          {"lr", e.lr}};
}

fs::path checkpoint_dir(const fs::path& p) {
  if (fs::exists(p / "manifest.json")) return p;
  if (fs::exists(p / "checkpoint" / "manifest.json")) return p / "checkpoint";
  throw UsageError("no checkpoint (manifest.json) under " + p.string());
}

}  // namespace

std::optional<std::uint64_t> resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("NEUROBOLT_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || *env == '-') {
      throw UsageError(std::string("NEUROBOLT_SEED must be a nonnegative integer, got '") + env + "'");
    }
    return static_cast<std::uint64_t>(v);
  }
  return std::nullopt;
}

int cmd_simulate(const SimulateArgs& a) {
  const auto cfg = load_config(a.config, a.seed).run;
  DirLock lock(a.out_dir);
  const auto scans = synth::gen_dataset(cfg.synth, cfg.dataset.n_subjects, cfg.dataset.scans_per_subject);
  bundle::write_dataset(a.out_dir, scans);

  // Diagnostics only: training never reads these files.
  const auto rows = [](const Matrix<double>& m) {
    Json out = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      out.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    }
    return out;
  };
  Json bands = Json::array();
  for (std::size_t b = 0; b < cfg.synth.band_count(); ++b) {
    bands.push_back({{"name", cfg.synth.bands[b].name},
                     {"f_lo", cfg.synth.bands[b].f_lo},
                     {"f_hi", cfg.synth.bands[b].f_hi},
                     {"envelope_timescale_sec", cfg.synth.envelope_timescale_sec[b]}});
  }
  const auto hrf = synth::canonical_hrf(1.0 / cfg.synth.fs, cfg.synth.hrf_duration_sec);
  std::size_t k = 0;
  for (int s = 0; s < cfg.dataset.n_subjects; ++s) {
    for (int j = 0; j < cfg.dataset.scans_per_subject; ++j, ++k) {
      const auto sc = synth::subject_config(cfg.synth, s, j);
      const Json truth = {{"scan_id", scans[k].scan_id},
                          {"subject_id", scans[k].subject_id},
                          {"scan_seed", sc.seed},
                          {"channel_labels", sc.channel_labels},
                          {"roi_labels", sc.roi_labels},
                          {"bands", bands},
                          {"channel_band_gains", rows(sc.channel_band_gains)},
                          {"roi_mixing", rows(sc.roi_mixing)},
                          {"hrf", {{"dt", hrf.dt},
                                   {"peak_time_sec", hrf.peak_time_sec},
                                   {"duration_sec", sc.hrf_duration_sec}}}};
      write_json(a.out_dir / scans[k].scan_id / "synth_truth.json", truth);
    }
  }
  write_json(a.out_dir / "config.json", to_json(cfg));
  std::cout << "wrote " << scans.size() << " scans to " << a.out_dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const TrainArgs& a) {
  auto loaded = load_config(a.config, a.seed);
  RunConfig& cfg = loaded.run;
  if (!a.split.empty()) cfg.split.kind = split_kind_from_string(a.split);
  if (!has_key(loaded.raw, "train", "batch_size")) {
    cfg.train.batch_size = TrainConfig::for_split(cfg.split.kind).batch_size;
  }
  if (a.epochs) {
    cfg.train.epochs = *a.epochs;
    cfg.train.warmup_epochs = std::min(cfg.train.warmup_epochs, *a.epochs - 1);
  }
  cfg.validate();

  const auto scans = load_scans(a.data_dir, cfg.preprocess);
  const std::string roi = pick_roi(a.roi, cfg, scans);
  match_channels(cfg.model, scans);
  cfg.model.target_roi = roi;
  cfg.rois = {roi};

  const fs::path run = !a.run_dir.empty()
                           ? a.run_dir
                           : fs::path(cfg.output_dir) /
                                 (roi + "-" + to_string(cfg.split.kind) + "-seed" + std::to_string(cfg.seed));
  DirLock lock(run);
  write_json(run / "config.json", to_json(cfg));

  const auto split = make_split(scans, cfg.split, cfg.model.window_sec);
  write_json(run / "split.json", to_json(split));
  const auto data = apply_split(scans, split, roi, cfg.model.window_sec);
  log::info("train: " + roi + ", " + std::to_string(data.train.size()) + "/" +
            std::to_string(data.val.size()) + "/" + std::to_string(data.test.size()) +
            " windows, " + std::to_string(cfg.train.epochs) + " epochs");

  std::ofstream train_log(run / "train_log.jsonl", std::ios::binary);
  const auto result = train(data.train, data.val, cfg.model, cfg.train, [&](const EpochRecord& e) {
    train_log << epoch_json(e).dump() << "\n" << std::flush;
    std::ostringstream msg;
    msg << "epoch " << e.epoch << "/" << cfg.train.epochs << " loss " << e.train_loss << " val R "
        << e.val_r << " val MSE " << e.val_mse;
    log::info(msg.str());
  });
  save_checkpoint(result.checkpoint, run / "checkpoint");

  if (data.test.empty()) {
    log::warning("train: the split has no test windows; no report written");
    return kExitOk;
  }
  const auto model = model_from_checkpoint(result.checkpoint);
  eval::EvalReport report;
  report.split = split_descriptor(split, 2);
  report.config = to_json(cfg);
  report.rows = eval::evaluate_windows(eval::model_predictor(model), data.test, run.filename().string());
  report.aggregates = eval::aggregate(report.rows);
  eval::write_report(report, run / "report.json", run / "report.csv");
  for (const auto& g : report.aggregates) {
    std::cout << g.roi << ": test R " << g.mean_r << " (sd " << g.std_r << ", " << g.n_scans
              << " scans), MSE " << g.mean_mse << "\n";
  }
  std::cout << "run directory: " << run.string() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a) {
  const fs::path ckpt_dir = checkpoint_dir(a.checkpoint);
  const fs::path run = ckpt_dir.filename() == "checkpoint" ? ckpt_dir.parent_path() : ckpt_dir;
  const auto ckpt = load_checkpoint(ckpt_dir);
  const auto model = model_from_checkpoint(ckpt);

  RunConfig cfg;
  if (fs::exists(run / "config.json")) cfg = load_run_config(run / "config.json");
  const auto scans = load_scans(a.data_dir, cfg.preprocess);
  const std::string roi = a.roi.empty() ? ckpt.model.target_roi : a.roi;
  if (roi.empty()) throw UsageError("the checkpoint names no target ROI; pass --roi");
  const int roi_index = roi_index_of(scans, roi);
  const double window = ckpt.model.window_sec;
  const std::string name = run.filename().string();
  const auto predictor = eval::model_predictor(model);

  eval::EvalReport report;
  report.config = to_json(cfg);
  if (!a.split_file.empty()) {
    const auto split = split_from_json(read_json_file(a.split_file));
    const auto data = apply_split(scans, split, roi, window);
    int set = 0;
    const std::vector<WindowSample>* windows = nullptr;
    if (a.set == "train") {
      windows = &data.train;
    } else if (a.set == "val") {
      windows = &data.val;
      set = 1;
    } else if (a.set == "test") {
      windows = &data.test;
      set = 2;
    } else {
      throw UsageError("--set must be train, val or test");
    }
    if (windows->empty()) throw UsageError("the " + a.set + " set of " + a.split_file.string() + " is empty");
    report.split = split_descriptor(split, set);
    report.rows = eval::evaluate_windows(predictor, *windows, name);
  } else {
    std::vector<std::string> ids;
    for (const auto& s : scans) {
      report.rows.push_back(eval::evaluate_scan(predictor, s, roi_index, window, name));
      ids.push_back(s->scan_id);
    }
    report.split = "all frames: " + join(ids, ",");
  }
  report.aggregates = eval::aggregate(report.rows);

  const fs::path out = a.out_dir.empty() ? run / "eval" : a.out_dir;
  DirLock lock(out);
  eval::write_report(report, out / "report.json", out / "report.csv");
  if (a.plot_data) eval::write_plot_data(report.rows, scans.front()->roi.tr, out / "plot_data.csv");
  for (const auto& r : report.rows) {
    std::cout << r.scan_id << " " << r.roi << ": R " << r.pearson_r << (r.r_defined ? "" : " (undefined)")
              << ", MSE " << r.mse << ", " << r.n_windows << " windows\n";
  }
  for (const auto& g : report.aggregates) {
    std::cout << "mean R " << g.mean_r << " (sd " << g.std_r << "), mean MSE " << g.mean_mse << "\n";
  }
  return kExitOk;
}

int cmd_gradcheck(const GradCheckArgs& a) {
  if (!a.tiny && a.config.empty()) throw UsageError("gradcheck needs --tiny or --config");
  NeuroBoltConfig model = a.tiny ? NeuroBoltConfig::tiny() : load_config(a.config, std::nullopt).run.model;
  GradCheckOptions opt;
  if (const auto seed = resolve_seed(a.seed)) opt.seed = *seed;
  const auto rep = grad_check(model, opt);
  std::cout << std::left << std::setw(40) << "tensor" << std::right << std::setw(14) << "max_rel"
            << std::setw(14) << "max_abs" << std::setw(9) << "coords" << "\n";
  for (const auto& e : rep.entries) {
    std::cout << std::left << std::setw(40) << e.name << std::right << std::scientific
              << std::setprecision(3) << std::setw(14) << e.max_rel_error << std::setw(14)
              << e.max_abs_error << std::defaultfloat << std::setw(9) << e.checked
              << (e.finite ? "" : "  non-finite") << "\n";
  }
  const bool ok = rep.passed(a.tolerance);
  std::cout << "max relative error " << std::scientific << rep.max_rel_error << " (tolerance "
            << a.tolerance << "): " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitFailure;
}

int cmd_ablate(const AblateArgs& a) {
  auto loaded = load_config(a.config, a.seed);
  RunConfig& cfg = loaded.run;
  if (!has_key(loaded.raw, "train", "batch_size")) {
    cfg.train.batch_size = TrainConfig::for_split(cfg.split.kind).batch_size;
  }
  if (a.epochs) {
    cfg.train.epochs = *a.epochs;
    cfg.train.warmup_epochs = std::min(cfg.train.warmup_epochs, *a.epochs - 1);
  }
  cfg.validate();
  const auto scans = load_scans(a.data_dir, cfg.preprocess);
  match_channels(cfg.model, scans);
  std::vector<std::string> rois = cfg.rois.empty() ? scans.front()->roi.roi_labels : cfg.rois;

  std::vector<eval::AblationSetting> settings;
  if (a.levels.empty()) {
    settings = eval::default_ablation_grid();
  } else {
    const std::size_t top = a.levels.back();
    settings.push_back({"T", Branches::kSTOnly, top});
    settings.push_back({"MS_l" + std::to_string(top), Branches::kSpecOnly, top});
    for (std::size_t l : a.levels) settings.push_back({"T+MS_l" + std::to_string(l), Branches::kBoth, l});
  }

  DirLock lock(a.out_dir);
  write_json(a.out_dir / "config.json", to_json(cfg));
  const auto split = make_split(scans, cfg.split, cfg.model.window_sec);
  write_json(a.out_dir / "split.json", to_json(split));
  std::vector<eval::RoiSplit> data;
  for (const auto& roi : rois) data.push_back(apply_split(scans, split, roi, cfg.model.window_sec));
  const auto table = eval::ablation_run(data, cfg.model, cfg.train, settings,
                                        [](const std::string& line) { log::info(line); });
  write_json(a.out_dir / "ablation.json", eval::to_json(table));
  eval::write_ablation_csv(table, a.out_dir / "ablation.csv");
  for (const auto& r : table.rows) {
    std::cout << std::left << std::setw(12) << r.name << " avg R " << r.avg_r << ", avg MSE " << r.avg_mse << "\n";
  }
  return kExitOk;
}

int cmd_report(const ReportArgs& a) {
  if (a.run_dirs.empty()) throw UsageError("report needs at least one run directory");
  if (!a.names.empty() && a.names.size() != a.run_dirs.size()) {
    throw UsageError("--name must be given once per run directory");
  }
  std::vector<eval::EvalReport> reports;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < a.run_dirs.size(); ++i) {
    const fs::path& dir = a.run_dirs[i];
    fs::path file = dir / "report.json";
    if (!fs::exists(file)) file = dir / "eval" / "report.json";
    if (!fs::exists(file)) throw UsageError("no report.json in " + dir.string());
    auto rep = eval::report_from_json(read_json_file(file));
    const std::string name = a.names.empty() ? fs::absolute(dir).lexically_normal().filename().string() : a.names[i];
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw UsageError("duplicate model name '" + name + "'; pass --name");
    }
    for (auto& row : rep.rows) row.model = name;
    names.push_back(name);
    reports.push_back(std::move(rep));
  }
  const auto table = eval::merge_reports(reports, names);
  fs::create_directories(a.out_dir);
  eval::write_merged(table, a.out_dir / "summary.csv", a.out_dir / "summary.json");
  std::cout << "merged " << names.size() << " runs, " << table.rows.size() << " rows into "
            << (a.out_dir / "summary.csv").string() << "\n";
  return kExitOk;
}

}  // namespace neurobolt::cli
