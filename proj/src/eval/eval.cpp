// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "neurobolt/error.hpp"
#include "neurobolt/fft.hpp"
#include "neurobolt/metrics.hpp"

namespace neurobolt::eval {
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(std::numeric_limits<double>::max_digits10);
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw DataError("write failed: " + path.string());
}

const std::string& roi_label(const WindowSample& w) {
  return w.scan->roi.roi_labels.at(static_cast<std::size_t>(w.roi_index));
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

ScanResult score(const std::string& model, const std::vector<WindowSample>& ws,
                 std::vector<double> pred) {
  ScanResult r;
  r.model = model;
  r.subject_id = ws.front().scan->subject_id;
  r.scan_id = ws.front().scan_id();
  r.roi = roi_label(ws.front());
  r.n_windows = ws.size();
  for (const auto& w : ws) {
    r.frames.push_back(w.frame_index);
    r.truth.push_back(w.y);
  }
  r.pred = std::move(pred);
  if (ws.size() >= 2) {
    const Correlation c = pearson_flagged(r.pred, r.truth);
    r.pearson_r = c.r;
    r.r_defined = c.defined;
  } else {
    r.r_defined = false;
  }
  r.mse = mse_loss(r.pred, r.truth);
  return r;
}

}  // namespace

Predictor model_predictor(const NeuroBoltModel<float>& model) {
  return [&model](std::span<const WindowSample> ws) {
    const auto p = model.predict_batch(ws);
    return std::vector<double>(p.begin(), p.end());
  };
}

ScanResult evaluate_scan(const Predictor& predict, const ScanPtr& scan, int roi_index,
                         double window_sec, const std::string& model_name) {
  const auto ws = align_windows(scan, window_sec, roi_index);
  if (ws.size() < 2) {
    throw InvalidArgument("evaluate_scan: scan '" + scan->scan_id + "' yields " +
                          std::to_string(ws.size()) + " windows of " + std::to_string(window_sec) +
                          " s; need at least 2");
  }
  return score(model_name, ws, predict(ws));
}

std::vector<ScanResult> evaluate_windows(const Predictor& predict,
                                         const std::vector<WindowSample>& windows,
                                         const std::string& model_name) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<WindowSample>> groups;
  for (const auto& w : windows) {
    const std::string key = w.scan_id() + "\n" + roi_label(w);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(w);
  }
  std::vector<ScanResult> out;
  for (const auto& key : order) {
    const auto& ws = groups[key];
    out.push_back(score(model_name, ws, predict(ws)));
  }
  return out;
}

std::vector<Aggregate> aggregate(const std::vector<ScanResult>& rows) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const auto& r : rows) {
    auto [it, fresh] = groups.try_emplace({r.model, r.roi});
    if (fresh) order.emplace_back(r.model, r.roi);
    it->second.first.push_back(r.pearson_r);
    it->second.second.push_back(r.mse);
  }
  std::vector<Aggregate> out;
  for (const auto& key : order) {
    const auto& [rs, ms] = groups[key];
    out.push_back({key.first, key.second, rs.size(), mean_of(rs), sample_sd(rs), mean_of(ms),
                   sample_sd(ms)});
  }
  return out;
}

// ---------------------------------------------------------------------------

Json to_json(const EvalReport& r) {
  Json rows = Json::array();
  for (const auto& s : r.rows) {
    rows.push_back({{"model", s.model},
                    {"subject_id", s.subject_id},
                    {"scan_id", s.scan_id},
                    {"roi", s.roi},
                    {"pearson_r", s.pearson_r},
                    {"r_defined", s.r_defined},
                    {"mse", s.mse},
                    {"n_windows", s.n_windows}});
  }
  Json aggs = Json::array();
  for (const auto& a : r.aggregates) {
    aggs.push_back({{"model", a.model},
                    {"roi", a.roi},
                    {"n_scans", a.n_scans},
                    {"mean_r", a.mean_r},
                    {"std_r", a.std_r},
                    {"mean_mse", a.mean_mse},
                    {"std_mse", a.std_mse}});
  }
  return {{"split", r.split}, {"config", r.config}, {"rows", rows}, {"aggregates", aggs}};
}

EvalReport report_from_json(const Json& j) {
  try {
    EvalReport r;
    r.split = j.at("split").get<std::string>();
    r.config = j.value("config", Json::object());
    for (const auto& s : j.at("rows")) {
      ScanResult x;
      x.model = s.at("model").get<std::string>();
      x.subject_id = s.at("subject_id").get<std::string>();
      x.scan_id = s.at("scan_id").get<std::string>();
      x.roi = s.at("roi").get<std::string>();
      x.pearson_r = s.at("pearson_r").get<double>();
      x.r_defined = s.at("r_defined").get<bool>();
      x.mse = s.at("mse").get<double>();
      x.n_windows = s.at("n_windows").get<std::size_t>();
      r.rows.push_back(std::move(x));
    }
    r.aggregates = aggregate(r.rows);
    return r;
  } catch (const Json::exception& e) {
    throw DataError(std::string("eval report: ") + e.what());
  }
}

void write_report(const EvalReport& r, const fs::path& json_path, const fs::path& csv_path) {
  {
    auto out = open_out(json_path);
    out << to_json(r).dump(2) << "\n";
    close_out(out, json_path);
  }
  auto out = open_out(csv_path);
  out << "model,subject_id,scan_id,roi,pearson_r,r_defined,mse,n_windows\n";
  for (const auto& s : r.rows) {
    out << s.model << ',' << s.subject_id << ',' << s.scan_id << ',' << s.roi << ','
        << s.pearson_r << ',' << (s.r_defined ? "true" : "false") << ',' << s.mse << ','
        << s.n_windows << "\n";
  }
  close_out(out, csv_path);
}

void write_plot_data(const std::vector<ScanResult>& rows, double tr, const fs::path& csv_path) {
  auto out = open_out(csv_path);
  out << "model,scan_id,roi,frame,time_sec,truth,pred\n";
  for (const auto& s : rows) {
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      out << s.model << ',' << s.scan_id << ',' << s.roi << ',' << s.frames[i] << ','
          << s.frames[i] * tr << ',' << s.truth[i] << ',' << s.pred[i] << "\n";
    }
  }
  close_out(out, csv_path);
}

MergedTable merge_reports(const std::vector<EvalReport>& reports,
                          const std::vector<std::string>& model_names) {
  if (reports.size() != model_names.size()) {
    throw InvalidArgument("merge_reports: one model name per report is required");
  }
  MergedTable t;
  t.models = model_names;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t m = 0; m < reports.size(); ++m) {
    for (const auto& s : reports[m].rows) {
      auto [it, fresh] = index.try_emplace({s.scan_id, s.roi}, t.rows.size());
      if (fresh) t.rows.push_back({s.scan_id, s.roi, std::vector<std::optional<double>>(reports.size())});
      t.rows[it->second].r[m] = s.pearson_r;
    }
  }
  return t;
}

void write_merged(const MergedTable& t, const fs::path& csv_path, const fs::path& json_path) {
  {
    auto out = open_out(csv_path);
    out << "scan_id,roi";
    for (const auto& m : t.models) out << ',' << m;
    out << "\n";
    for (const auto& r : t.rows) {
      out << r.scan_id << ',' << r.roi;
      for (const auto& v : r.r) {
        out << ',';
        if (v) out << *v;
      }
      out << "\n";
    }
    close_out(out, csv_path);
  }
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json cells = Json::object();
    for (std::size_t m = 0; m < t.models.size(); ++m) {
      cells[t.models[m]] = r.r[m] ? Json(*r.r[m]) : Json(nullptr);
    }
    rows.push_back({{"scan_id", r.scan_id}, {"roi", r.roi}, {"pearson_r", cells}});
  }
  auto out = open_out(json_path);
  out << Json{{"models", t.models}, {"rows", rows}}.dump(2) << "\n";
  close_out(out, json_path);
}

// ---------------------------------------------------------------------------

MeanBaseline MeanBaseline::fit(std::span<const double> targets) {
  if (targets.empty()) throw InvalidArgument("baseline_mean: empty training targets");
  return {mean_of(targets)};
}

Predictor MeanBaseline::predictor() const {
  const double m = mean;
  return [m](std::span<const WindowSample> ws) { return std::vector<double>(ws.size(), m); };
}

std::vector<Band> default_bands() {
  return {{"delta", 1.0, 4.0},
          {"theta", 4.0, 8.0},
          {"alpha", 8.0, 12.0},
          {"beta", 12.0, 30.0},
          {"gamma", 30.0, 70.0}};
}

std::vector<double> band_power_features(const Matrix<float>& x, double fs,
                                        const std::vector<Band>& bands, std::size_t stft_window) {
  if (stft_window == 0 || x.cols() < stft_window) {
    throw InvalidArgument("band_power_features: window shorter than one STFT segment");
  }
  const std::size_t segments = x.cols() / stft_window;
  const std::size_t nb = bands.size();
  const std::size_t bins = stft_window / 2 + 1;
  // Bin k lies at k * fs / w Hz.
  std::vector<int> band_of(bins, -1);
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(stft_window);
    for (std::size_t b = 0; b < nb; ++b) {
      if (f >= bands[b].f_lo && f < bands[b].f_hi) {
        band_of[k] = static_cast<int>(b);
        break;
      }
    }
  }
  std::vector<double> out(x.rows() * nb, 0.0);
  std::vector<double> seg(stft_window), mag(bins);
  for (std::size_t c = 0; c < x.rows(); ++c) {
    const float* row = x.row(c).data();
    for (std::size_t s = 0; s < segments; ++s) {
      std::copy(row + s * stft_window, row + (s + 1) * stft_window, seg.begin());
      fft::rfft_magnitude(seg, mag);
      for (std::size_t k = 0; k < bins; ++k) {
        if (band_of[k] >= 0) out[c * nb + static_cast<std::size_t>(band_of[k])] += mag[k] * mag[k];
      }
    }
  }
  for (double& v : out) v = std::log(v / static_cast<double>(segments) + 1e-8);
  return out;
}

double RidgeModel::predict(std::span<const double> f) const {
  if (f.size() != beta.size()) throw InvalidArgument("ridge: feature count mismatch");
  double y = intercept;
  for (std::size_t i = 0; i < f.size(); ++i) y += beta[i] * (f[i] - mean[i]) / scale[i];
  return y;
}

RidgeModel fit_ridge(const Matrix<double>& features, std::span<const double> y, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("ridge: lambda must be positive");
  const std::size_t n = features.rows(), p = features.cols();
  if (n == 0 || p == 0) throw InvalidArgument("ridge: empty design");
  if (y.size() != n) throw InvalidArgument("ridge: target count does not match the design");
  RidgeModel m;
  m.lambda = lambda;
  m.mean.assign(p, 0.0);
  m.scale.assign(p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += features(i, j);
    m.mean[j] = s / static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (features(i, j) - m.mean[j]) * (features(i, j) - m.mean[j]);
    const double sd = std::sqrt(v / static_cast<double>(n));
    m.scale[j] = sd > 1e-12 ? sd : 1.0;  // constant columns center to zero
  }
  Eigen::MatrixXd z(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) z(i, j) = (features(i, j) - m.mean[j]) / m.scale[j];
  }
  const double ymean = mean_of(y);
  Eigen::VectorXd yc(n);
  for (std::size_t i = 0; i < n; ++i) yc(i) = y[i] - ymean;
  Eigen::MatrixXd a = z.transpose() * z;
  a.diagonal().array() += lambda;
  const Eigen::VectorXd beta = a.ldlt().solve(z.transpose() * yc);
  m.beta.assign(beta.data(), beta.data() + p);
  m.intercept = ymean;
  return m;
}

std::vector<double> default_lambda_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}; }

double RidgeBaseline::predict(const WindowSample& w) const {
  return model.predict(band_power_features(w.x(), fs, bands, stft_window));
}

Predictor RidgeBaseline::predictor() const {
  return [this](std::span<const WindowSample> ws) {
    std::vector<double> out;
    out.reserve(ws.size());
    for (const auto& w : ws) out.push_back(predict(w));
    return out;
  };
}

RidgeBaseline baseline_ridge(const std::vector<WindowSample>& train,
                             const std::vector<WindowSample>& val, std::vector<Band> bands,
                             double fs, const std::vector<double>& lambdas) {
  if (train.empty()) throw InvalidArgument("baseline_ridge: empty training set");
  if (val.empty()) throw InvalidArgument("baseline_ridge: empty validation set");
  if (lambdas.empty()) throw InvalidArgument("baseline_ridge: empty lambda grid");
  RidgeBaseline out;
  out.bands = std::move(bands);
  out.fs = fs;
  const auto design = [&](const std::vector<WindowSample>& ws, std::vector<double>& y) {
    Matrix<double> x;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const auto f = band_power_features(ws[i].x(), fs, out.bands, out.stft_window);
      if (i == 0) x = Matrix<double>(ws.size(), f.size());
      std::copy(f.begin(), f.end(), x.row(i).begin());
      y.push_back(ws[i].y);
    }
    return x;
  };
  std::vector<double> ytr, yva;
  const Matrix<double> xtr = design(train, ytr);
  const Matrix<double> xva = design(val, yva);

  bool have = false;
  Correlation best_r{0.0, false};
  double best_mse = 0.0;
  for (double lambda : lambdas) {
    RidgeModel m = fit_ridge(xtr, ytr, lambda);
    std::vector<double> pred;
    for (std::size_t i = 0; i < xva.rows(); ++i) pred.push_back(m.predict(xva.row(i)));
    const Correlation r = pred.size() >= 2 ? pearson_flagged(pred, yva) : Correlation{0.0, false};
    const double mse = mse_loss(pred, yva);
    const bool better = !have || (r.defined && (!best_r.defined || r.r > best_r.r)) ||
                        (r.defined == best_r.defined && r.r == best_r.r && mse < best_mse);
    if (better) {
      have = true;
      best_r = r;
      best_mse = mse;
      out.model = std::move(m);
      out.val_r = r.r;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("paired_t_test: lengths differ");
  if (a.size() < 2) throw InvalidArgument("paired_t_test: need at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  PairedTTest r;
  r.n = d.size();
  r.df = static_cast<double>(r.n - 1);
  r.mean_diff = mean_of(d);
  const double se = sample_sd(d) / std::sqrt(static_cast<double>(r.n));
  if (se == 0.0) {
    r.t = r.mean_diff == 0.0 ? 0.0
                             : std::copysign(std::numeric_limits<double>::infinity(), r.mean_diff);
    r.p_value = r.mean_diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = r.mean_diff / se;
  const boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

// ---------------------------------------------------------------------------

std::vector<AblationSetting> default_ablation_grid() {
  std::vector<AblationSetting> g = {{"T only", Branches::kSTOnly, 3},
                                    {"MS only", Branches::kSpecOnly, 3}};
  for (std::size_t l = 0; l <= 4; ++l) {
    g.push_back({"T+MS l" + std::to_string(l), Branches::kBoth, l});
  }
  return g;
}

AblationTable ablation_run(const std::vector<RoiSplit>& data, const NeuroBoltConfig& base,
                           const TrainConfig& train_cfg,
                           const std::vector<AblationSetting>& settings,
                           const std::function<void(const std::string&)>& progress) {
  if (data.empty()) throw InvalidArgument("ablation_run: no ROI data");
  AblationTable table;
  for (const auto& d : data) {
    if (d.test.empty()) throw InvalidArgument("ablation_run: ROI '" + d.roi + "' has no test windows");
    table.rois.push_back(d.roi);
  }
  for (const auto& s : settings) {
    AblationRow row;
    row.name = s.name;
    for (const auto& d : data) {
      NeuroBoltConfig cfg = base;
      cfg.branches = s.branches;
      cfg.sp.max_level = s.level;
      cfg.target_roi = d.roi;
      NeuroBoltModel<float> model(cfg);
      train_model(model, d.train, d.val, train_cfg);
      const auto rows = evaluate_windows(model_predictor(model), d.test, s.name);
      double r = 0.0, mse = 0.0;
      for (const auto& x : rows) {
        r += x.pearson_r;
        mse += x.mse;
      }
      row.roi_r.push_back(r / static_cast<double>(rows.size()));
      row.roi_mse.push_back(mse / static_cast<double>(rows.size()));
      if (progress) {
        std::ostringstream msg;
        msg << s.name << " / " << d.roi << ": R " << row.roi_r.back() << ", MSE "
            << row.roi_mse.back();
        progress(msg.str());
      }
    }
    row.avg_r = mean_of(row.roi_r);
    row.avg_mse = mean_of(row.roi_mse);
    table.rows.push_back(std::move(row));
  }
  return table;
}

Json to_json(const AblationTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"name", r.name},
                    {"roi_r", r.roi_r},
                    {"roi_mse", r.roi_mse},
                    {"avg_r", r.avg_r},
                    {"avg_mse", r.avg_mse}});
  }
  return {{"rois", t.rois}, {"rows", rows}};
}

void write_ablation_csv(const AblationTable& t, const fs::path& csv_path) {
  auto out = open_out(csv_path);
  out << "setting";
  for (const auto& roi : t.rois) out << ",mse_" << roi << ",r_" << roi;
  out << ",mse_avg,r_avg\n";
  for (const auto& r : t.rows) {
    out << r.name;
    for (std::size_t i = 0; i < t.rois.size(); ++i) out << ',' << r.roi_mse[i] << ',' << r.roi_r[i];
    out << ',' << r.avg_mse << ',' << r.avg_r << "\n";
  }
  close_out(out, csv_path);
}

}  // namespace neurobolt::eval
