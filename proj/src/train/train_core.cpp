// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/train_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include <json.hpp>

#include "neurobolt/bundle.hpp"
#include "neurobolt/config.hpp"
#include "neurobolt/error.hpp"
#include "neurobolt/log.hpp"
#include "neurobolt/metrics.hpp"

namespace neurobolt {
namespace fs = std::filesystem;

namespace {

constexpr const char* kCheckpointFormat = "neurobolt-checkpoint";
constexpr int kCheckpointVersion = 1;

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

void TrainConfig::validate() const {
  const auto bad = [](const std::string& m) { throw InvalidArgument("train config: " + m); };
  if (batch_size == 0) bad("batch_size must be positive");
  if (epochs == 0) bad("epochs must be positive");
  if (!(warmup_epochs < epochs)) bad("warmup_epochs must be smaller than epochs");
  if (!(min_lr >= 0.0) || !(min_lr < peak_lr)) bad("need 0 <= min_lr < peak_lr");
  if (!(weight_decay >= 0.0)) bad("weight_decay must be nonnegative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) bad("betas must be in [0, 1)");
  if (!(eps > 0.0)) bad("eps must be positive");
  if (!(drop_path >= 0.0 && drop_path < 1.0)) bad("drop_path must be in [0, 1)");
  if (!(layer_decay > 0.0 && layer_decay <= 1.0)) bad("layer_decay must be in (0, 1]");
  if (precision != 32 && precision != 64) bad("precision must be 32 or 64");
}

TrainConfig TrainConfig::for_split(SplitKind kind) {
  TrainConfig c;
  c.batch_size = kind == SplitKind::kInterSubject ? 64 : 16;
  return c;
}

double lr_at(std::size_t step, const TrainConfig& cfg, std::size_t steps_per_epoch, int layer,
             int n_layers) {
  const std::size_t spe = std::max<std::size_t>(steps_per_epoch, 1);
  const std::size_t warm = cfg.warmup_epochs * spe;
  const std::size_t total = cfg.epochs * spe;
  double base;
  if (step < warm) {
    base = cfg.peak_lr * static_cast<double>(step) / static_cast<double>(warm);
  } else {
    const std::size_t span = total - 1 > warm ? total - 1 - warm : 1;
    const double p = std::min(1.0, static_cast<double>(step - warm) / static_cast<double>(span));
    base = cfg.min_lr + 0.5 * (cfg.peak_lr - cfg.min_lr) * (1.0 + std::cos(std::numbers::pi * p));
  }
  return base * std::pow(cfg.layer_decay, n_layers - layer);
}

// ---------------------------------------------------------------------------

template <typename T>
AdamW<T>::AdamW(nn::ParamList<T> params, const TrainConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    m_.emplace_back(p.param->value.size(), 0.0);
    v_.emplace_back(p.param->value.size(), 0.0);
  }
}

template <typename T>
void AdamW<T>::step(const std::function<double(std::size_t)>& lr_of) {
  ++t_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const double lr = lr_of(i);
    const double shrink = decays(params_[i]) ? 1.0 - lr * cfg_.weight_decay : 1.0;
    T* w = params_[i].param->value.data();
    const T* g = params_[i].param->grad.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const std::size_t n = m_[i].size();
    for (std::size_t k = 0; k < n; ++k) {
      const double gk = static_cast<double>(g[k]);
      m[k] = b1 * m[k] + (1.0 - b1) * gk;
      v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
      const double update = (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.eps);
      w[k] = static_cast<T>(static_cast<double>(w[k]) * shrink - lr * update);
    }
  }
}

template class AdamW<float>;
template class AdamW<double>;

// ---------------------------------------------------------------------------

template <typename T>
std::vector<TensorRecord> snapshot(NeuroBoltModel<T>& model) {
  std::vector<TensorRecord> out;
  for (const auto& p : model.params()) {
    TensorRecord r{p.name, p.param->value.rows(), p.param->value.cols(), {}};
    r.values.resize(p.param->value.size());
    std::transform(p.param->value.data(), p.param->value.data() + r.values.size(), r.values.begin(),
                   [](T v) { return static_cast<float>(v); });
    out.push_back(std::move(r));
  }
  return out;
}

template <typename T>
void restore(NeuroBoltModel<T>& model, const std::vector<TensorRecord>& tensors) {
  std::map<std::string, const TensorRecord*> by_name;
  for (const auto& t : tensors) {
    if (!by_name.emplace(t.name, &t).second) throw DataError("duplicate tensor '" + t.name + "'");
  }
  auto params = model.params();
  if (params.size() != tensors.size()) {
    throw DataError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model has " +
                    std::to_string(params.size()));
  }
  for (auto& p : params) {
    const auto it = by_name.find(p.name);
    if (it == by_name.end()) throw DataError("checkpoint is missing tensor '" + p.name + "'");
    const TensorRecord& r = *it->second;
    auto& v = p.param->value;
    if (r.rows != v.rows() || r.cols != v.cols() || r.values.size() != v.size()) {
      throw DataError("tensor '" + p.name + "' is " + std::to_string(r.rows) + "x" +
                      std::to_string(r.cols) + ", model expects " + std::to_string(v.rows()) +
                      "x" + std::to_string(v.cols()));
    }
    std::transform(r.values.begin(), r.values.end(), v.data(),
                   [](float x) { return static_cast<T>(x); });
  }
}

template std::vector<TensorRecord> snapshot(NeuroBoltModel<float>&);
template std::vector<TensorRecord> snapshot(NeuroBoltModel<double>&);
template void restore(NeuroBoltModel<float>&, const std::vector<TensorRecord>&);
template void restore(NeuroBoltModel<double>&, const std::vector<TensorRecord>&);

void save_checkpoint(const Checkpoint& ckpt, const fs::path& dir) {
  fs::create_directories(dir);
  Json tensors = Json::array();
  std::vector<float> blob;
  for (const auto& t : ckpt.tensors) {
    const std::size_t offset = blob.size() * sizeof(float);
    blob.insert(blob.end(), t.values.begin(), t.values.end());
    tensors.push_back({{"name", t.name},
                       {"shape", {t.rows, t.cols}},
                       {"dtype", "float32"},
                       {"offset", offset},
                       {"nbytes", t.values.size() * sizeof(float)}});
  }
  const Json manifest = {{"format", kCheckpointFormat},
                         {"version", kCheckpointVersion},
                         {"dtype", "float32"},
                         {"endianness", "little"},
                         {"blob", "params.bin"},
                         {"tensors", tensors},
                         {"model_config", to_json(ckpt.model)},
                         {"train_config", to_json(ckpt.train)},
                         {"epoch", ckpt.epoch},
                         {"best_val_r", ckpt.best_val_r},
                         {"best_val_mse", ckpt.best_val_mse}};
  bundle::write_f32_le(dir / "params.bin", blob);
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
  if (!out) throw DataError("write failed: " + (dir / "manifest.json").string());
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  Json m;
  try {
    m = read_json_file(mpath);
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  const auto bad = [&](const std::string& what) { throw DataError(mpath.string() + ": " + what); };
  try {
    if (m.at("format") != kCheckpointFormat) bad("not a checkpoint manifest");
    if (m.at("version").get<int>() != kCheckpointVersion) bad("unsupported checkpoint version");
    if (m.at("dtype") != "float32" || m.at("endianness") != "little") bad("unsupported encoding");
    Checkpoint c;
    c.model = model_config_from_json(m.at("model_config"), "model_config");
    c.train = train_config_from_json(m.at("train_config"), "train_config");
    c.epoch = m.at("epoch").get<std::size_t>();
    c.best_val_r = m.at("best_val_r").get<double>();
    c.best_val_mse = m.at("best_val_mse").get<double>();
    const std::vector<float> blob = bundle::read_f32_le(dir / "params.bin");
    std::size_t expect = 0;  // offsets must tile the blob in order
    for (const auto& t : m.at("tensors")) {
      TensorRecord r;
      r.name = t.at("name").get<std::string>();
      const auto& shape = t.at("shape");
      if (!shape.is_array() || shape.size() != 2) bad("tensor '" + r.name + "' needs a 2-d shape");
      r.rows = shape[0].get<std::size_t>();
      r.cols = shape[1].get<std::size_t>();
      const auto offset = t.at("offset").get<std::size_t>();
      const auto nbytes = t.at("nbytes").get<std::size_t>();
      if (t.at("dtype") != "float32") bad("tensor '" + r.name + "' is not float32");
      if (offset != expect) bad("tensor '" + r.name + "' offset leaves a gap or overlaps");
      if (nbytes != r.rows * r.cols * sizeof(float)) bad("tensor '" + r.name + "' size mismatch");
      if ((offset + nbytes) / sizeof(float) > blob.size()) bad("params.bin is truncated");
      const auto first = blob.begin() + static_cast<std::ptrdiff_t>(offset / sizeof(float));
      r.values.assign(first, first + static_cast<std::ptrdiff_t>(nbytes / sizeof(float)));
      expect = offset + nbytes;
      c.tensors.push_back(std::move(r));
    }
    if (expect != blob.size() * sizeof(float)) bad("params.bin has trailing data");
    return c;
  } catch (const Json::exception& e) {
    bad(e.what());
  } catch (const ConfigError& e) {
    bad(e.what());
  }
  return {};
}

NeuroBoltModel<float> model_from_checkpoint(const Checkpoint& ckpt) {
  NeuroBoltModel<float> model(ckpt.model);
  restore(model, ckpt.tensors);
  return model;
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
Matrix<T> window_input(const WindowSample& w, Matrix<float>& scratch) {
  scratch.resize(w.channels(), w.length);
  w.copy_x(scratch.data());
  if constexpr (std::is_same_v<T, float>) {
    return scratch;
  } else {
    return scratch.template cast<T>();
  }
}

// Model rows for each scan's channel labels, resolved once per scan.
template <typename T>
class ChannelIds {
 public:
  explicit ChannelIds(const NeuroBoltModel<T>& model) : model_(model) {}
  const std::vector<std::size_t>& operator()(const WindowSample& w) {
    auto it = cache_.find(w.scan.get());
    if (it == cache_.end()) {
      it = cache_.emplace(w.scan.get(), model_.resolve_channels(w.scan->eeg.channel_labels)).first;
    }
    return it->second;
  }

 private:
  const NeuroBoltModel<T>& model_;
  std::map<const ScanPair*, std::vector<std::size_t>> cache_;
};

template <typename T>
std::pair<Correlation, double> validate_epoch(const NeuroBoltModel<T>& model,
                                              const std::vector<WindowSample>& val,
                                              ChannelIds<T>& ids) {
  std::vector<double> pred, target;
  ModelCache<T> cache;
  Matrix<float> scratch;
  for (const auto& w : val) {
    const Matrix<T> x = window_input<T>(w, scratch);
    pred.push_back(static_cast<double>(model.forward(x, ids(w), cache, nullptr)));
    target.push_back(w.y);
  }
  const Correlation r = val.size() >= 2 ? pearson_flagged(pred, target) : Correlation{0.0, false};
  return {r, mse_loss(pred, target)};
}

}  // namespace

template <typename T>
TrainResult train_model(NeuroBoltModel<T>& model, const std::vector<WindowSample>& train_set,
                        const std::vector<WindowSample>& val, const TrainConfig& cfg,
                        const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw InvalidArgument("train: empty training split");
  if (val.empty()) throw InvalidArgument("train: empty validation split");
  const std::size_t t = model.config().window_samples();
  for (const auto* set : {&train_set, &val}) {
    for (const auto& w : *set) {
      if (w.length != t) {
        throw InvalidArgument("train: window length " + std::to_string(w.length) +
                              " does not match the model's " + std::to_string(t));
      }
    }
  }
  if (model.config().has_st()) model.st().cfg.drop_path = cfg.drop_path;

  auto params = model.params();
  AdamW<T> opt(params, cfg);
  ChannelIds<T> ids(model);
  const std::size_t n = train_set.size();
  const std::size_t spe = ceil_div(n, cfg.batch_size);
  // Dropout masks and drop-path decisions come from one stream for the run.
  Rng noise(derive_seed(cfg.seed, 0xD40F));

  TrainResult result;
  result.checkpoint.model = model.config();
  result.checkpoint.model.st.drop_path = cfg.drop_path;
  result.checkpoint.train = cfg;
  bool have_best = false;
  double best_r = 0.0;

  std::vector<std::size_t> order(n);
  ModelCache<T> cache;
  Matrix<float> scratch;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle(derive_seed(cfg.seed, epoch));
    shuffle.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_size, ++step) {
      const std::size_t b1 = std::min(n, b0 + cfg.batch_size);
      const T scale = T(2) / static_cast<T>(b1 - b0);
      model.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = b0; i < b1; ++i) {
        const WindowSample& w = train_set[order[i]];
        const Matrix<T> x = window_input<T>(w, scratch);
        const T y = model.forward(x, ids(w), cache, &noise);
        const T e = y - static_cast<T>(w.y);
        batch_loss += static_cast<double>(e) * static_cast<double>(e);
        model.backward(cache, scale * e);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step) + " (lr " +
                           std::to_string(lr_at(step, cfg, spe, 1, 1)) + ")");
      }
      loss_sum += batch_loss;
      opt.step([&](std::size_t k) {
        return lr_at(step, cfg, spe, params[k].layer, params[k].n_layers);
      });
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    const auto [r, mse] = validate_epoch(model, val, ids);
    rec.val_r = r.r;
    rec.val_r_defined = r.defined;
    rec.val_mse = mse;
    rec.lr = lr_at(step - 1, cfg, spe, 1, 1);
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!have_best || rec.val_r > best_r) {
      have_best = true;
      best_r = rec.val_r;
      result.checkpoint.epoch = epoch;
      result.checkpoint.best_val_r = rec.val_r;
      result.checkpoint.best_val_mse = rec.val_mse;
      result.checkpoint.tensors = snapshot(model);
    }
  }
  restore(model, result.checkpoint.tensors);
  return result;
}

template TrainResult train_model(NeuroBoltModel<float>&, const std::vector<WindowSample>&,
                                 const std::vector<WindowSample>&, const TrainConfig&,
                                 const EpochCallback&);
template TrainResult train_model(NeuroBoltModel<double>&, const std::vector<WindowSample>&,
                                 const std::vector<WindowSample>&, const TrainConfig&,
                                 const EpochCallback&);

TrainResult train(const std::vector<WindowSample>& train_set, const std::vector<WindowSample>& val,
                  const NeuroBoltConfig& model_cfg, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw InvalidArgument("train: empty training split");
  if (val.empty()) throw InvalidArgument("train: empty validation split");
  if (cfg.precision == 64) {
    NeuroBoltModel<double> model(model_cfg);
    return train_model(model, train_set, val, cfg, on_epoch);
  }
  NeuroBoltModel<float> model(model_cfg);
  return train_model(model, train_set, val, cfg, on_epoch);
}

// ---------------------------------------------------------------------------

GradCheckReport grad_check(const NeuroBoltConfig& model_cfg, const GradCheckOptions& opt) {
  NeuroBoltModel<double> model(model_cfg);
  Rng rng(derive_seed(opt.seed, 0x6C4E));
  const std::size_t c = model_cfg.channels.size();
  const std::size_t t = model_cfg.window_samples();
  std::vector<Matrix<double>> xs;
  std::vector<double> ys;
  for (std::size_t b = 0; b < opt.batch; ++b) {
    Matrix<double> x(c, t);
    if (!opt.zero_input) {
      for (auto& v : x.flat()) v = opt.input_scale * rng.normal();
    }
    xs.push_back(std::move(x));
    ys.push_back(rng.normal());
  }
  const double inv_b = 1.0 / static_cast<double>(opt.batch);
  ModelCache<double> cache;
  const auto loss = [&] {
    double acc = 0.0;
    for (std::size_t b = 0; b < xs.size(); ++b) {
      const double e = model.forward(xs[b], cache, nullptr) - ys[b];
      acc += e * e;
    }
    return acc * inv_b;
  };

  model.zero_grad();
  for (std::size_t b = 0; b < xs.size(); ++b) {
    const double e = model.forward(xs[b], cache, nullptr) - ys[b];
    model.backward(cache, 2.0 * e * inv_b);
  }

  GradCheckReport report;
  for (auto& p : model.params()) {
    if (!opt.prefixes.empty() &&
        std::none_of(opt.prefixes.begin(), opt.prefixes.end(),
                     [&](const std::string& pre) { return p.name.rfind(pre, 0) == 0; })) {
      continue;
    }
    GradCheckEntry entry;
    entry.name = p.name;
    auto& value = p.param->value;
    const auto& grad = p.param->grad;
    for (double g : grad.flat()) entry.finite = entry.finite && std::isfinite(g);

    const std::size_t size = value.size();
    std::vector<std::size_t> coords(size);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (size > opt.coords_per_tensor) {
      rng.shuffle(std::span<std::size_t>(coords));
      coords.resize(opt.coords_per_tensor);
    }
    for (std::size_t k : coords) {
      const double saved = value.data()[k];
      value.data()[k] = saved + opt.step;
      const double lp = loss();
      value.data()[k] = saved - opt.step;
      const double lm = loss();
      value.data()[k] = saved;
      const double numeric = (lp - lm) / (2.0 * opt.step);
      const double analytic = grad.data()[k];
      const double abs_err = std::abs(analytic - numeric);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), opt.rel_floor});
      const double rel = abs_err / denom;
      if (!std::isfinite(numeric) || !std::isfinite(rel)) entry.finite = false;
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_rel_error = std::max(entry.max_rel_error, std::isfinite(rel) ? rel : 1.0);
      ++entry.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.all_finite = report.all_finite && entry.finite;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace neurobolt
