// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner. Prints one PASS/FAIL line per selected criterion and
// exits nonzero when any selected criterion fails.
//
//   neurobolt_acceptance                 all criteria
//   neurobolt_acceptance -c 5 -c 6       a subset (5 and 6 share trained models)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../common/fixtures.hpp"
#include "neurobolt/eval.hpp"
#include "neurobolt/log.hpp"
#include "neurobolt/metrics.hpp"
#include "neurobolt/model.hpp"
#include "neurobolt/pipeline.hpp"
#include "neurobolt/spec_encoder.hpp"
#include "neurobolt/synth.hpp"
#include "neurobolt/train_core.hpp"

namespace nb = neurobolt;
using nb::Matrix;

namespace {

// Pinned thresholds.
constexpr std::size_t kStTokens = 416;
constexpr std::size_t kSpTokens = 832;
constexpr std::size_t kSpTokensCls = 833;
constexpr int kAttentionCases = 100;
constexpr double kAttentionTol = 1e-6;
constexpr double kGradTol = 1e-4;
constexpr double kMemorizeRatio = 0.1;
constexpr std::size_t kMemorizeSteps = 200;
constexpr double kRecoveryR = 0.8;
constexpr double kRidgeMargin = 0.1;
constexpr double kMeanRTol = 1e-12;
constexpr int kSplitSeeds = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void progress(const std::string& m) {
  std::fprintf(stderr, "  .. %s\n", m.c_str());
  std::fflush(stderr);
}

// ---------------------------------------------------------------------------

Outcome structural_fidelity() {
  auto cfg = nb::NeuroBoltConfig::reference();
  const std::size_t c = cfg.channels.size();
  const std::size_t t = cfg.window_samples();
  const std::size_t st_formula = c * nb::patch_count(t, cfg.st.patch, cfg.st.stride);

  nb::Rng rng(11);
  Matrix<float> x(c, t);
  for (auto& v : x.flat()) v = static_cast<float>(rng.normal());

  nb::NeuroBoltModel<float> model(cfg);
  nb::ModelCache<float> cache;
  model.forward(x.cast<float>(), cache, nullptr);
  const std::size_t st_run = cache.st.x.rows();
  const std::size_t sp_run = cache.sp.x.rows();

  cfg.sp.cls_token = true;
  cfg.branches = nb::Branches::kSpecOnly;
  nb::NeuroBoltModel<float> with_cls(cfg);
  nb::ModelCache<float> cache_cls;
  with_cls.forward(x, cache_cls, nullptr);
  const std::size_t sp_cls_run = cache_cls.sp.x.rows();

  const bool pass = c == 26 && t == 3200 && st_formula == kStTokens && st_run == kStTokens &&
                    sp_run == kSpTokens && sp_cls_run == kSpTokensCls &&
                    with_cls.sp().tokens(c) == kSpTokensCls;
  std::ostringstream d;
  d << "C " << c << ", T " << t << ": st tokens " << st_run << " (formula " << st_formula
    << "), spectral tokens " << sp_run << ", with class token " << sp_cls_run;
  return {pass, d.str()};
}

// ---------------------------------------------------------------------------

Outcome attention_equivalence() {
  nb::Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < kAttentionCases; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    const std::size_t d = 1 + rng.index(8);
    std::vector<std::size_t> head_options;
    for (std::size_t h = 1; h <= d; ++h) {
      if (d % h == 0) head_options.push_back(h);
    }
    const std::size_t heads = head_options[rng.index(head_options.size())];

    nb::nn::Attention<double> attn;
    attn.init_low_rank(d, heads, n, n, rng);
    for (auto* m : {&attn.qkv.weight.value, &attn.qkv.bias.value, &attn.proj.weight.value,
                    &attn.proj.bias.value}) {
      for (auto& v : m->flat()) v = rng.normal(0.0, 0.5);
    }
    attn.e.value.set_zero();
    attn.f.value.set_zero();
    for (std::size_t i = 0; i < n; ++i) attn.e.value(i, i) = attn.f.value(i, i) = 1.0;

    Matrix<double> x(n, d);
    for (auto& v : x.flat()) v = rng.normal();
    const Matrix<double> low_rank = nb::linear_attention(x, attn);

    // Dense reference: explicit projections, full softmax attention, output projection.
    Matrix<double> q(n, d), k(n, d), v(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 3 * d; ++j) {
        double s = attn.qkv.bias.value(0, j);
        for (std::size_t p = 0; p < d; ++p) s += x(i, p) * attn.qkv.weight.value(p, j);
        (j < d ? q(i, j) : j < 2 * d ? k(i, j - d) : v(i, j - 2 * d)) = s;
      }
    }
    const Matrix<double> o = nb::nn::dense_attention_reference(q, k, v, heads);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double s = attn.proj.bias.value(0, j);
        for (std::size_t p = 0; p < d; ++p) s += o(i, p) * attn.proj.weight.value(p, j);
        worst = std::max(worst, std::abs(s - low_rank(i, j)));
      }
    }
  }
  return {worst < kAttentionTol,
          std::to_string(kAttentionCases) + " cases, max abs diff " + fmt("%.3e", worst)};
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto report = nb::grad_check(nb::NeuroBoltConfig::tiny());
  std::string worst_name;
  double worst = -1.0;
  for (const auto& e : report.entries) {
    if (e.max_rel_error > worst) {
      worst = e.max_rel_error;
      worst_name = e.name;
    }
  }
  return {report.passed(kGradTol), std::to_string(report.entries.size()) +
                                       " tensors, max rel error " +
                                       fmt("%.3e", report.max_rel_error) + " (" + worst_name + ")"};
}

// ---------------------------------------------------------------------------

double mse_of(const nb::NeuroBoltModel<float>& model, const std::vector<nb::WindowSample>& ws) {
  const auto p = model.predict_batch(std::span<const nb::WindowSample>(ws));
  std::vector<double> pred(p.begin(), p.end()), y;
  for (const auto& w : ws) y.push_back(w.y);
  return nb::mse_loss(pred, y);
}

Outcome memorization() {
  const auto windows = nb::testing::tiny_windows(64);
  nb::NeuroBoltModel<float> model(nb::NeuroBoltConfig::tiny());
  const double initial = mse_of(model, windows);

  nb::TrainConfig tc;
  tc.batch_size = 16;
  tc.epochs = kMemorizeSteps * tc.batch_size / windows.size();  // 50 epochs of 4 steps
  tc.warmup_epochs = 5;
  tc.peak_lr = 1e-2;
  tc.min_lr = 1e-5;
  tc.weight_decay = 0.0;
  tc.drop_path = 0.0;
  tc.seed = 1;
  nb::train_model(model, windows, windows, tc);
  const double final_mse = mse_of(model, windows);
  const std::size_t steps = tc.epochs * ((windows.size() + tc.batch_size - 1) / tc.batch_size);
  return {windows.size() == 64 && steps <= kMemorizeSteps && final_mse < kMemorizeRatio * initial,
          std::to_string(windows.size()) + " windows, " + std::to_string(steps) +
              " steps: MSE " + fmt("%.4f", initial) + " -> " + fmt("%.4f", final_mse) +
              " (ratio " + fmt("%.4f", final_mse / initial) + ")"};
}

// ---------------------------------------------------------------------------
// Criteria 5 and 6 share one synthetic dataset and the T+MS l3 models.

// Even-indexed ROIs of the seven generator ROIs: fits criterion 5 and the
// two-configuration directional check of criterion 6 into their runtime
// budgets on one CPU core.
const std::vector<std::string> kRecoveryRois = {"cuneus", "precuneus_ant", "putamen", "global"};
constexpr std::uint64_t kRecoverySeed = 7;

struct RecoveryData {
  std::vector<nb::eval::RoiSplit> rois;
};

const RecoveryData& recovery_data() {
  static const RecoveryData data = [] {
    auto sc = nb::synth::SynthConfig::defaults(kRecoverySeed);
    sc.bold_noise_sigma = 0.0;  // noise-free BOLD
    sc.eeg_noise_sigma = 5.0;   // moderate EEG noise (signal RMS is several times larger)
    nb::PreprocessConfig pre;
    const auto scans = nb::preprocess_all(nb::synth::gen_dataset(sc, 8, 1), pre);
    nb::SplitConfig split;
    split.kind = nb::SplitKind::kInterSubject;
    split.ratios = {5, 1, 2};
    split.seed = kRecoverySeed;
    const nb::NeuroBoltConfig model_cfg;
    const auto ds = nb::make_split(scans, split, model_cfg.window_sec);
    RecoveryData out;
    for (const auto& roi : kRecoveryRois) {
      out.rois.push_back(nb::apply_split(scans, ds, roi, model_cfg.window_sec));
    }
    progress("dataset: " + std::to_string(ds.scan_ids(0).size()) + "/" +
             std::to_string(ds.scan_ids(1).size()) + "/" + std::to_string(ds.scan_ids(2).size()) +
             " scans, " + std::to_string(out.rois.front().train.size()) + " train windows per ROI");
    return out;
  }();
  return data;
}

nb::TrainConfig recovery_train_config() {
  auto tc = nb::TrainConfig::for_split(nb::SplitKind::kInterSubject);
  tc.epochs = 30;
  tc.seed = kRecoverySeed;
  return tc;
}

double mean_r(const std::vector<nb::eval::ScanResult>& rows) {
  double s = 0.0;
  for (const auto& r : rows) s += r.pearson_r;
  return s / static_cast<double>(rows.size());
}

/// Mean test-scan R per ROI for a setting; memoized so criteria 5 and 6 train each model once.
std::vector<double> setting_r(nb::Branches branches, std::size_t level) {
  static std::map<std::pair<int, std::size_t>, std::vector<double>> memo;
  const auto key = std::make_pair(static_cast<int>(branches), level);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::vector<double> out;
  for (const auto& d : recovery_data().rois) {
    nb::NeuroBoltConfig cfg;
    cfg.branches = branches;
    cfg.sp.max_level = level;
    cfg.target_roi = d.roi;
    cfg.seed = kRecoverySeed;
    nb::NeuroBoltModel<float> model(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    nb::train_model(model, d.train, d.val, recovery_train_config());
    out.push_back(mean_r(nb::eval::evaluate_windows(nb::eval::model_predictor(model), d.test, "m")));
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    progress(nb::to_string(branches) + " l" + std::to_string(level) + " / " + d.roi + ": test R " +
             fmt("%.3f", out.back()) + " (" + fmt("%.0f", sec) + " s)");
  }
  memo[key] = out;
  return out;
}

double average(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Outcome synthetic_recovery() {
  const auto& data = recovery_data();
  std::vector<double> ridge_r;
  bool mean_flagged = true;
  double mean_abs_r = 0.0;
  for (const auto& d : data.rois) {
    const auto ridge = nb::eval::baseline_ridge(d.train, d.val, nb::eval::default_bands(), 200.0);
    ridge_r.push_back(mean_r(nb::eval::evaluate_windows(ridge.predictor(), d.test, "ridge")));
    std::vector<double> y;
    for (const auto& w : d.train) y.push_back(w.y);
    const auto mean = nb::eval::MeanBaseline::fit(y);
    for (const auto& r : nb::eval::evaluate_windows(mean.predictor(), d.test, "mean")) {
      mean_flagged = mean_flagged && !r.r_defined;
      mean_abs_r = std::max(mean_abs_r, std::abs(r.pearson_r));
    }
    progress("ridge / " + d.roi + ": test R " + fmt("%.3f", ridge_r.back()) + " (lambda " +
             fmt("%g", ridge.model.lambda) + ")");
  }
  const auto model_r = setting_r(nb::Branches::kBoth, 3);

  const double best = *std::max_element(model_r.begin(), model_r.end());
  const double model_avg = average(model_r);
  const double ridge_avg = average(ridge_r);
  const bool a = best >= kRecoveryR;
  const bool b = model_avg >= ridge_avg - kRidgeMargin;
  const bool c = mean_flagged && mean_abs_r <= kMeanRTol;
  std::ostringstream det;
  det << "(a) best ROI test R " << fmt("%.3f", best) << (a ? " ok" : " LOW") << "; (b) model avg R "
      << fmt("%.3f", model_avg) << " vs ridge " << fmt("%.3f", ridge_avg) << (b ? " ok" : " LOW")
      << "; (c) mean predictor R " << fmt("%.1g", mean_abs_r)
      << (mean_flagged ? " flagged" : " NOT flagged") << "; ROIs";
  for (std::size_t i = 0; i < data.rois.size(); ++i) {
    det << ' ' << data.rois[i].roi << '=' << fmt("%.3f", model_r[i]);
  }
  return {a && b && c, det.str()};
}

Outcome ablation_direction() {
  const double both = average(setting_r(nb::Branches::kBoth, 3));
  const double t_only = average(setting_r(nb::Branches::kSTOnly, 3));
  const double l0 = average(setting_r(nb::Branches::kBoth, 0));
  return {both >= t_only && both >= l0, "avg test R: T+MS l3 " + fmt("%.3f", both) + ", T only " +
                                            fmt("%.3f", t_only) + ", T+MS l0 " + fmt("%.3f", l0)};
}

// ---------------------------------------------------------------------------

Outcome protocol_fidelity() {
  nb::Rng rng(77);
  int intra_bad = 0, inter_bad = 0;
  std::string first_failure;
  const auto fail = [&](int& counter, const std::string& why) {
    if (counter++ == 0 && first_failure.empty()) first_failure = why;
  };

  for (int trial = 0; trial < kSplitSeeds; ++trial) {
    // Intra-scan: oracle block sizes from the ratio arithmetic.
    const double tr = rng.uniform(0.5, 3.0);
    const std::size_t n = 60 + rng.index(1200);
    auto scan = std::make_shared<nb::ScanPair>();
    scan->scan_id = "s";
    std::vector<nb::WindowSample> samples(n);
    const int first = static_cast<int>(rng.index(20));
    for (std::size_t i = 0; i < n; ++i) {
      samples[i].scan = scan;
      samples[i].frame_index = first + static_cast<int>(i);
    }
    const int g = static_cast<int>(std::ceil(20.0 / tr - 1e-9));
    const std::size_t train_n = n * 8 / 10, val_block = n / 10;
    if (val_block <= static_cast<std::size_t>(g) || n - train_n - val_block <= static_cast<std::size_t>(g)) {
      // Too short for nonempty sets after the gaps: must be rejected.
      bool threw = false;
      try {
        nb::split_intra(samples, {8, 1, 1}, 20.0, tr);
      } catch (const nb::InvalidArgument&) {
        threw = true;
      }
      if (!threw) fail(intra_bad, "intra n=" + std::to_string(n) + " accepted despite gaps");
    } else try {
      const auto s = nb::split_intra(samples, {8, 1, 1}, 20.0, tr);
      std::set<int> all;
      for (const auto* set : {&s.train_frames, &s.val_frames, &s.test_frames}) all.insert(set->begin(), set->end());
      const bool sizes = s.train_frames.size() == train_n && s.val_frames.size() == val_block - g &&
                         s.test_frames.size() == n - train_n - val_block - g;
      const bool disjoint = all.size() == s.train_frames.size() + s.val_frames.size() + s.test_frames.size();
      const bool order = s.train_frames.front() == first &&
                         s.val_frames.front() - s.train_frames.back() == g + 1 &&
                         s.test_frames.front() - s.val_frames.back() == g + 1;
      const bool gap_time = g * tr >= 20.0 - 1e-9 && (g - 1) * tr < 20.0;
      if (!(sizes && disjoint && order && gap_time && s.gap_frames == g)) {
        fail(intra_bad, "intra n=" + std::to_string(n) + " tr=" + fmt("%.3f", tr));
      }
    } catch (const std::exception& e) {
      fail(intra_bad, std::string("intra threw: ") + e.what());
    }

    // Inter-subject: random subject/scan layouts, seed = trial.
    const std::size_t subjects = 3 + rng.index(28);
    std::vector<nb::ScanPtr> scans;
    std::map<std::string, std::string> subject_of;
    for (std::size_t s = 0; s < subjects; ++s) {
      const std::size_t k = 1 + rng.index(3);
      for (std::size_t j = 0; j < k; ++j) {
        auto p = std::make_shared<nb::ScanPair>();
        p->subject_id = "sub-" + std::to_string(s);
        p->scan_id = p->subject_id + "_scan-" + std::to_string(j);
        subject_of[p->scan_id] = p->subject_id;
        scans.push_back(p);
      }
    }
    const auto s = nb::split_inter(scans, {3, 1, 1}, static_cast<std::uint64_t>(trial));
    std::map<std::string, int> set_of_subject;
    std::size_t assigned = 0;
    bool ok = !s.train_scans.empty() && !s.val_scans.empty() && !s.test_scans.empty();
    int set_index = 0;
    for (const auto* set : {&s.train_scans, &s.val_scans, &s.test_scans}) {
      for (const auto& id : *set) {
        const auto [it, inserted] = set_of_subject.emplace(subject_of.at(id), set_index);
        ok = ok && (inserted || it->second == set_index);
        ++assigned;
      }
      ++set_index;
    }
    ok = ok && assigned == scans.size();
    const auto again = nb::split_inter(scans, {3, 1, 1}, static_cast<std::uint64_t>(trial));
    ok = ok && again.train_scans == s.train_scans && again.test_scans == s.test_scans;
    if (!ok) fail(inter_bad, "inter seed " + std::to_string(trial));
  }
  return {intra_bad == 0 && inter_bad == 0,
          std::to_string(kSplitSeeds) + " random intra layouts and inter seeds: " +
              std::to_string(intra_bad) + " intra and " + std::to_string(inter_bad) +
              " inter violations" + (first_failure.empty() ? "" : " (first: " + first_failure + ")")};
}

// ---------------------------------------------------------------------------

Outcome determinism_and_serialization() {
  const auto windows = nb::testing::tiny_windows(96);
  const std::vector<nb::WindowSample> train(windows.begin(), windows.begin() + 64);
  const std::vector<nb::WindowSample> val(windows.begin() + 64, windows.end());
  nb::TrainConfig tc;
  tc.epochs = 4;
  tc.warmup_epochs = 1;
  tc.seed = 5;  // drop path stays on (0.1) so its draws are covered

  const auto a = nb::train(train, val, nb::NeuroBoltConfig::tiny(), tc);
  const auto b = nb::train(train, val, nb::NeuroBoltConfig::tiny(), tc);
  bool same_curve = a.curve.size() == b.curve.size();
  for (std::size_t i = 0; same_curve && i < a.curve.size(); ++i) {
    same_curve = a.curve[i].train_loss == b.curve[i].train_loss &&
                 a.curve[i].val_r == b.curve[i].val_r && a.curve[i].val_mse == b.curve[i].val_mse;
  }

  nb::testing::TempDir dir("nb-accept");
  const auto model = nb::model_from_checkpoint(a.checkpoint);
  const auto before = model.predict_batch(std::span<const nb::WindowSample>(windows));
  nb::save_checkpoint(a.checkpoint, dir.path());
  const auto loaded = nb::load_checkpoint(dir.path());
  const auto after = nb::model_from_checkpoint(loaded).predict_batch(
      std::span<const nb::WindowSample>(windows));
  bool tensors_equal = loaded.tensors.size() == a.checkpoint.tensors.size();
  for (std::size_t i = 0; tensors_equal && i < loaded.tensors.size(); ++i) {
    const auto& x = loaded.tensors[i].values;
    const auto& y = a.checkpoint.tensors[i].values;
    tensors_equal = loaded.tensors[i].name == a.checkpoint.tensors[i].name && x.size() == y.size() &&
                    std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) == 0;
  }
  const bool preds_equal = before.size() == after.size() &&
                           std::memcmp(before.data(), after.data(), before.size() * sizeof(float)) == 0;
  return {same_curve && tensors_equal && preds_equal,
          std::string("loss curves ") + (same_curve ? "identical" : "DIFFER") + " over " +
              std::to_string(a.curve.size()) + " epochs; checkpoint tensors " +
              (tensors_equal ? "bit-exact" : "DIFFER") + ", predictions " +
              (preds_equal ? "bit-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neurobolt acceptance criteria"};
  std::vector<int> selected;
  app.add_option("-c,--criterion", selected, "criterion number (repeatable); all when omitted")
      ->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  nb::log::set_min_level(nb::log::Level::kWarning);

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"structural fidelity", structural_fidelity}},
      {2, {"attention equivalence", attention_equivalence}},
      {3, {"gradient correctness", gradient_correctness}},
      {4, {"memorization", memorization}},
      {5, {"synthetic end-to-end recovery", synthetic_recovery}},
      {6, {"ablation direction", ablation_direction}},
      {7, {"protocol fidelity", protocol_fidelity}},
      {8, {"determinism and serialization", determinism_and_serialization}},
  };

  int failures = 0;
  for (int id : selected) {
    const auto& [name, run] = criteria.at(id);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s  %s [%.1f s]\n", id, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), sec);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
