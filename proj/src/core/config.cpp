// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace neurobolt {
namespace {

// Seeds are read through the std::size_t overload.
static_assert(std::is_same_v<std::uint64_t, std::size_t>);

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

// Reads an object's keys one by one and rejects whatever was not read.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  void get(const char* key, double& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, bool& out) {
    if (const Json* v = take(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::size_t& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(at(key), "expected a nonnegative integer");
      out = v->get<std::size_t>();
    }
  }
  void get(const char* key, int& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const Json* v = take(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::vector<std::string>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_array()) fail(at(key), "expected an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) fail(at(key), "expected an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  void get(const char* key, std::optional<double>& out) {
    if (const Json* v = take(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        fail(at(key), "expected a number or null");
      }
    }
  }
  void get(const char* key, std::array<int, 3>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_array() || v->size() != 3) fail(at(key), "expected three integers");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number_integer()) fail(at(key), "expected three integers");
        out[i] = (*v)[i].get<int>();
      }
    }
  }

  /// Nested object, or nullptr when absent.
  const Json* child(const char* key) {
    const Json* v = take(key);
    if (v != nullptr && !v->is_object()) fail(at(key), "expected an object");
    return v;
  }

  std::string at(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(path_ + "." + k, "unknown key");
    }
  }

 private:
  const Json* take(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Rewraps library validation failures with the config path.
template <typename F>
void checked(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
}

void read_st(const Json& j, const std::string& path, STConfig& c) {
  Reader r(j, path);
  r.get("patch", c.patch);
  r.get("stride", c.stride);
  r.get("depth", c.depth);
  r.get("heads", c.heads);
  r.get("ff_mult", c.ff_mult);
  r.get("conv_channels", c.conv_channels);
  r.get("gn_groups", c.gn_groups);
  r.get("drop_path", c.drop_path);
  r.finish();
}

void read_sp(const Json& j, const std::string& path, SpecConfig& c) {
  Reader r(j, path);
  r.get("base_window", c.base_window);
  r.get("max_level", c.max_level);
  r.get("n", c.n);
  r.get("depth", c.depth);
  r.get("heads", c.heads);
  r.get("ff_mult", c.ff_mult);
  r.get("rank", c.rank);
  r.get("cls_token", c.cls_token);
  r.get("log1p", c.log1p);
  r.get("attn_dropout", c.attn_dropout);
  r.finish();
}

}  // namespace

std::string to_string(SplitKind k) { return k == SplitKind::kIntraScan ? "intra" : "inter"; }

SplitKind split_kind_from_string(const std::string& s) {
  if (s == "intra") return SplitKind::kIntraScan;
  if (s == "inter") return SplitKind::kInterSubject;
  throw ConfigError("split kind must be 'intra' or 'inter', got '" + s + "'");
}

Json to_json(const STConfig& c) {
  return {{"patch", c.patch},         {"stride", c.stride},
          {"depth", c.depth},         {"heads", c.heads},
          {"ff_mult", c.ff_mult},     {"conv_channels", c.conv_channels},
          {"gn_groups", c.gn_groups}, {"drop_path", c.drop_path}};
}

Json to_json(const SpecConfig& c) {
  return {{"base_window", c.base_window}, {"max_level", c.max_level}, {"n", c.n},
          {"depth", c.depth},             {"heads", c.heads},         {"ff_mult", c.ff_mult},
          {"rank", c.rank},               {"cls_token", c.cls_token}, {"log1p", c.log1p},
          {"attn_dropout", c.attn_dropout}};
}

Json to_json(const NeuroBoltConfig& c) {
  return {{"channel_vocab", c.channel_vocab},
          {"channels", c.channels},
          {"fs", c.fs},
          {"window_sec", c.window_sec},
          {"d", c.d},
          {"st", to_json(c.st)},
          {"sp", to_json(c.sp)},
          {"branches", to_string(c.branches)},
          {"target_roi", c.target_roi},
          {"seed", c.seed}};
}

Json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"peak_lr", c.peak_lr},
          {"min_lr", c.min_lr},
          {"epochs", c.epochs},
          {"warmup_epochs", c.warmup_epochs},
          {"weight_decay", c.weight_decay},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"drop_path", c.drop_path},
          {"layer_decay", c.layer_decay},
          {"seed", c.seed},
          {"precision", c.precision}};
}

Json to_json(const synth::SynthConfig& c) {
  Json j = {{"duration_sec", c.duration_sec},
            {"fs", c.fs},
            {"tr", c.tr},
            {"eeg_noise_sigma", c.eeg_noise_sigma},
            {"bold_noise_sigma", c.bold_noise_sigma},
            {"eeg_scale_uv", c.eeg_scale_uv},
            {"envelope_smoothing_sec", c.envelope_smoothing_sec},
            {"envelope_floor", c.envelope_floor},
            {"lead_in_sec", c.lead_in_sec},
            {"carrier_components", c.carrier_components},
            {"gain_jitter", c.gain_jitter},
            {"hrf_duration_sec", c.hrf_duration_sec},
            {"seed", c.seed}};
  j["roi_lowpass_hz"] = c.roi_lowpass_hz ? Json(*c.roi_lowpass_hz) : Json(nullptr);
  return j;
}

Json to_json(const SplitConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"ratios", c.ratios},
          {"gap_sec", c.gap_sec},
          {"seed", c.seed}};
}

Json to_json(const PreprocessConfig& c) {
  Json j = {{"target_fs", c.target_fs},
            {"normalize_eeg", c.normalize_eeg},
            {"normalize_roi", c.normalize_roi}};
  j["roi_lowpass_hz"] = c.roi_lowpass_hz ? Json(*c.roi_lowpass_hz) : Json(nullptr);
  return j;
}

Json to_json(const DatasetConfig& c) {
  return {{"n_subjects", c.n_subjects}, {"scans_per_subject", c.scans_per_subject}};
}

Json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"synth", to_json(c.synth)},
          {"dataset", to_json(c.dataset)},
          {"preprocess", to_json(c.preprocess)},
          {"model", to_json(c.model)},
          {"train", to_json(c.train)},
          {"split", to_json(c.split)},
          {"rois", c.rois},
          {"output_dir", c.output_dir}};
}

NeuroBoltConfig model_config_from_json(const Json& j, const std::string& path) {
  NeuroBoltConfig c;
  Reader r(j, path);
  bool vocab_given = j.contains("channel_vocab");
  r.get("channel_vocab", c.channel_vocab);
  if (vocab_given) c.channels = c.channel_vocab;
  r.get("channels", c.channels);
  r.get("fs", c.fs);
  r.get("window_sec", c.window_sec);
  r.get("d", c.d);
  c.st.d = c.sp.d = c.d;
  if (const Json* st = r.child("st")) read_st(*st, r.at("st"), c.st);
  if (const Json* sp = r.child("sp")) read_sp(*sp, r.at("sp"), c.sp);
  std::string branches = to_string(c.branches);
  r.get("branches", branches);
  checked(r.at("branches"), [&] { c.branches = branches_from_string(branches); });
  r.get("target_roi", c.target_roi);
  r.get("seed", c.seed);
  r.finish();
  checked(path, [&] { c.validate(); });
  return c;
}

TrainConfig train_config_from_json(const Json& j, const std::string& path) {
  TrainConfig c;
  Reader r(j, path);
  r.get("batch_size", c.batch_size);
  r.get("peak_lr", c.peak_lr);
  r.get("min_lr", c.min_lr);
  r.get("epochs", c.epochs);
  r.get("warmup_epochs", c.warmup_epochs);
  r.get("weight_decay", c.weight_decay);
  r.get("beta1", c.beta1);
  r.get("beta2", c.beta2);
  r.get("eps", c.eps);
  r.get("drop_path", c.drop_path);
  r.get("layer_decay", c.layer_decay);
  r.get("seed", c.seed);
  r.get("precision", c.precision);
  r.finish();
  checked(path, [&] { c.validate(); });
  return c;
}

synth::SynthConfig synth_config_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  std::uint64_t seed = 0;
  r.get("seed", seed);
  synth::SynthConfig c = synth::SynthConfig::defaults(seed);
  r.get("duration_sec", c.duration_sec);
  r.get("fs", c.fs);
  r.get("tr", c.tr);
  r.get("eeg_noise_sigma", c.eeg_noise_sigma);
  r.get("bold_noise_sigma", c.bold_noise_sigma);
  r.get("eeg_scale_uv", c.eeg_scale_uv);
  r.get("envelope_smoothing_sec", c.envelope_smoothing_sec);
  r.get("envelope_floor", c.envelope_floor);
  r.get("lead_in_sec", c.lead_in_sec);
  r.get("carrier_components", c.carrier_components);
  r.get("gain_jitter", c.gain_jitter);
  r.get("hrf_duration_sec", c.hrf_duration_sec);
  r.get("roi_lowpass_hz", c.roi_lowpass_hz);
  r.finish();
  checked(path, [&] { c.validate(); });
  return c;
}

SplitConfig split_config_from_json(const Json& j, const std::string& path) {
  SplitConfig c;
  Reader r(j, path);
  std::string kind = to_string(c.kind);
  r.get("kind", kind);
  checked(r.at("kind"), [&] { c.kind = split_kind_from_string(kind); });
  if (c.kind == SplitKind::kInterSubject) c.ratios = {3, 1, 1};
  r.get("ratios", c.ratios);
  r.get("gap_sec", c.gap_sec);
  r.get("seed", c.seed);
  r.finish();
  for (int v : c.ratios) {
    if (v < 0) fail(path + ".ratios", "ratios must be nonnegative");
  }
  if (c.ratios[0] <= 0) fail(path + ".ratios", "the training ratio must be positive");
  if (!(c.gap_sec >= 0.0)) fail(path + ".gap_sec", "must be nonnegative");
  return c;
}

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  const synth::SynthConfig base = synth::SynthConfig::defaults(s);
  synth.seed = s;
  synth.channel_band_gains = base.channel_band_gains;
  model.seed = s;
  train.seed = s;
  split.seed = s;
}

void RunConfig::validate() const {
  checked("synth", [&] { synth.validate(); });
  checked("model", [&] { model.validate(); });
  checked("train", [&] { train.validate(); });
  if (dataset.n_subjects < 1 || dataset.scans_per_subject < 1) {
    fail("dataset", "n_subjects and scans_per_subject must be at least 1");
  }
  if (!(preprocess.target_fs > 0.0)) fail("preprocess.target_fs", "must be positive");
  if (preprocess.target_fs != model.fs) {
    fail("preprocess.target_fs", "must equal model.fs (" + std::to_string(model.fs) + ")");
  }
  if (output_dir.empty()) fail("output_dir", "must not be empty");
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  Reader r(j, "config");
  std::uint64_t seed = 0;
  const bool has_seed = j.is_object() && j.contains("seed");
  r.get("seed", seed);
  if (const Json* v = r.child("synth")) c.synth = synth_config_from_json(*v, "synth");
  if (const Json* v = r.child("dataset")) {
    Reader d(*v, "dataset");
    d.get("n_subjects", c.dataset.n_subjects);
    d.get("scans_per_subject", c.dataset.scans_per_subject);
    d.finish();
  }
  if (const Json* v = r.child("preprocess")) {
    Reader p(*v, "preprocess");
    p.get("target_fs", c.preprocess.target_fs);
    p.get("normalize_eeg", c.preprocess.normalize_eeg);
    p.get("normalize_roi", c.preprocess.normalize_roi);
    p.get("roi_lowpass_hz", c.preprocess.roi_lowpass_hz);
    p.finish();
  }
  if (const Json* v = r.child("model")) c.model = model_config_from_json(*v, "model");
  if (const Json* v = r.child("train")) c.train = train_config_from_json(*v, "train");
  if (const Json* v = r.child("split")) c.split = split_config_from_json(*v, "split");
  r.get("rois", c.rois);
  r.get("output_dir", c.output_dir);
  r.finish();
  // A top-level seed fills every section seed; a seed given inside a section wins.
  if (has_seed) {
    const auto in_section = [&](const char* key) {
      return j.contains(key) && j[key].is_object() && j[key].contains("seed");
    };
    const RunConfig explicit_seeds = c;
    c.set_seed(seed);
    if (in_section("synth")) c.synth = explicit_seeds.synth;
    if (in_section("model")) c.model.seed = explicit_seeds.model.seed;
    if (in_section("train")) c.train.seed = explicit_seeds.train.seed;
    if (in_section("split")) c.split.seed = explicit_seeds.split.seed;
  }
  c.validate();
  return c;
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Byte offset -> 1-based line and column of the offending character.
    const std::size_t pos = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    // Drop the library's "[json.exception.parse_error.101] parse error at line x, column y: " prefix.
    if (const auto k = what.find(": "); k != std::string::npos) what = what.substr(k + 2);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path.string());
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path));
}

}  // namespace neurobolt
