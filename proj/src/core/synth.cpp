// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/synth.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <iomanip>

#include "neurobolt/error.hpp"
#include "neurobolt/rng.hpp"

namespace neurobolt::synth {
namespace {

constexpr double kEps = 1e-9;

// Stream indices below a scan seed.
enum Stream : std::uint64_t { kEnvelopes = 1, kCarriers = 2, kEegNoise = 3, kBoldNoise = 4 };

const char* const kChannels26[] = {"Fp1", "Fp2", "F3",  "F4", "C3",  "C4", "P3",  "P4",  "O1",
                                   "O2",  "F7",  "F8",  "T7", "T8",  "P7", "P8",  "FPz", "Fz",
                                   "Cz",  "Pz",  "POz", "Oz", "FT9", "FT10", "TP9", "TP10"};

const char* const kRois7[] = {"cuneus", "heschl", "precuneus_ant", "mfg_ant",
                              "putamen", "thalamus", "global"};

// Per-ROI weights on the six default bands (delta, theta, low alpha, high
// alpha, beta, gamma).
const double kRoiBandWeights[7][6] = {
    {0.2, 0.1, -1.0, 0.6, 0.3, 0.1},   {0.1, 0.5, 0.3, -0.4, 0.8, 0.4},
    {-0.3, 0.8, -0.6, 0.5, 0.2, 0.0},  {0.5, 1.0, 0.2, -0.3, -0.5, 0.3},
    {0.2, -0.2, 0.6, 0.4, 1.0, -0.3},  {0.3, 0.2, 0.9, -0.9, 0.1, 0.2},
    {0.2, 0.3, -0.5, -0.5, 0.3, 0.2}};

const double kBandAmplitude[6] = {1.5, 1.0, 1.2, 1.2, 0.6, 0.3};

}  // namespace

std::size_t SynthConfig::samples() const {
  return static_cast<std::size_t>(std::llround(duration_sec * fs));
}

std::size_t SynthConfig::frames() const {
  return static_cast<std::size_t>(std::floor(duration_sec / tr + kEps));
}

std::size_t SynthConfig::lead_in_samples() const {
  return static_cast<std::size_t>(std::llround(lead_in_sec * fs));
}

void SynthConfig::validate() const {
  const auto bad = [](const std::string& m) { throw InvalidArgument("synth config: " + m); };
  if (channel_labels.empty()) bad("no channels");
  if (roi_labels.empty()) bad("no ROIs");
  if (!(fs > 0.0) || !(tr > 0.0) || !(duration_sec > 0.0)) bad("fs, tr and duration must be positive");
  if (bands.empty()) bad("no bands");
  for (const auto& b : bands) {
    if (!(b.f_lo > 0.0 && b.f_lo < b.f_hi && b.f_hi < fs / 2.0)) {
      bad("band '" + b.name + "' must satisfy 0 < f_lo < f_hi < fs/2");
    }
  }
  if (envelope_timescale_sec.size() != bands.size()) bad("one envelope timescale per band required");
  for (double t : envelope_timescale_sec) {
    if (!(t > 0.0)) bad("envelope timescales must be positive");
  }
  if (channel_band_gains.rows() != channels() || channel_band_gains.cols() != band_count()) {
    bad("channel_band_gains must be C x B");
  }
  if (roi_mixing.rows() != rois() || roi_mixing.cols() != channels() * band_count()) {
    bad("roi_mixing must be P x (C*B)");
  }
  for (double v : channel_band_gains.flat()) {
    if (!std::isfinite(v)) bad("non-finite gain");
  }
  for (double v : roi_mixing.flat()) {
    if (!std::isfinite(v)) bad("non-finite mixing weight");
  }
  if (eeg_noise_sigma < 0.0 || bold_noise_sigma < 0.0) bad("noise sigmas must be nonnegative");
  if (envelope_smoothing_sec < 0.0 || lead_in_sec < 0.0) bad("negative smoothing or lead-in");
  if (!(envelope_floor >= 0.0)) bad("envelope_floor must be nonnegative");
  if (carrier_components < 1) bad("carrier_components must be >= 1");
  if (gain_jitter < 0.0 || gain_jitter >= 1.0) bad("gain_jitter must be in [0, 1)");
  if (hrf_duration_sec < 25.0) bad("hrf_duration_sec must be >= 25");
  if (roi_lowpass_hz && !(*roi_lowpass_hz > 0.0)) bad("roi_lowpass_hz must be positive");
}

SynthConfig SynthConfig::defaults(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.channel_labels.assign(std::begin(kChannels26), std::end(kChannels26));
  cfg.roi_labels.assign(std::begin(kRois7), std::end(kRois7));
  cfg.bands = {{"delta", 1.0, 4.0},    {"theta", 4.0, 8.0},  {"alpha_lo", 8.0, 10.0},
               {"alpha_hi", 10.0, 12.0}, {"beta", 12.0, 30.0}, {"gamma", 30.0, 45.0}};
  // Slow enough that the part of the hemodynamic response older than one
  // 16 s window stays predictable from the window itself.
  cfg.envelope_timescale_sec = {48.0, 40.0, 32.0, 32.0, 40.0, 48.0};
  cfg.envelope_floor = 0.5;
  cfg.seed = seed;

  const std::size_t c = cfg.channels();
  const std::size_t b = cfg.band_count();
  Rng rng(derive_seed(seed, 0xC0FFEE));
  cfg.channel_band_gains = Matrix<double>(c, b);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      cfg.channel_band_gains(i, j) = kBandAmplitude[j] * rng.uniform(0.7, 1.3);
    }
  }
  cfg.roi_mixing = Matrix<double>(cfg.rois(), c * b);
  for (std::size_t p = 0; p < cfg.rois(); ++p) {
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        cfg.roi_mixing(p, i * b + j) = kRoiBandWeights[p][j] / static_cast<double>(c);
      }
    }
  }
  return cfg;
}

double double_gamma(double t) {
  if (t <= 0.0) return 0.0;
  const auto gamma_pdf = [](double x, double shape) {
    return std::exp((shape - 1.0) * std::log(x) - x - std::lgamma(shape));
  };
  return gamma_pdf(t, 6.0) - gamma_pdf(t, 16.0) / 6.0;
}

HRFKernel canonical_hrf(double dt, double duration_sec) {
  if (!(dt > 0.0)) throw InvalidArgument("canonical_hrf: dt must be positive");
  if (duration_sec < 25.0) {
    throw InvalidArgument("canonical_hrf: duration " + std::to_string(duration_sec) +
                          " s is too short to contain the undershoot (need >= 25 s)");
  }
  HRFKernel k;
  k.dt = dt;
  const auto n = static_cast<std::size_t>(std::llround(duration_sec / dt));
  k.samples.resize(n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    k.samples[j] = double_gamma(static_cast<double>(j) * dt);
    sum += k.samples[j];
  }
  std::size_t arg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    k.samples[j] /= sum;
    if (k.samples[j] > k.samples[arg]) arg = j;
  }
  k.peak_time_sec = static_cast<double>(arg) * dt;
  return k;
}

Matrix<double> gen_envelopes(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t total = cfg.lead_in_samples() + cfg.samples();
  const std::size_t nb = cfg.band_count();
  Matrix<double> env(nb, total);
  Rng rng(derive_seed(cfg.seed, kEnvelopes));
  const auto smooth = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                   std::llround(cfg.envelope_smoothing_sec * cfg.fs)));
  std::vector<double> raw(total);
  for (std::size_t b = 0; b < nb; ++b) {
    const double a = std::exp(-1.0 / (cfg.envelope_timescale_sec[b] * cfg.fs));
    const double innov = std::sqrt(1.0 - a * a);
    double x = rng.normal();
    for (std::size_t t = 0; t < total; ++t) {
      raw[t] = std::abs(x);
      x = a * x + innov * rng.normal();
    }
    // Causal moving average of the rectified process.
    double acc = 0.0;
    auto row = env.row(b);
    for (std::size_t t = 0; t < total; ++t) {
      acc += raw[t];
      if (t >= smooth) acc -= raw[t - smooth];
      const std::size_t width = std::min(t + 1, smooth);
      row[t] = cfg.envelope_floor + std::max(0.0, acc / static_cast<double>(width));
    }
  }
  return env;
}

std::vector<double> gen_carrier(const SynthConfig& cfg, std::size_t b) {
  Rng rng(derive_seed(derive_seed(cfg.seed, kCarriers), b));
  const auto& band = cfg.bands.at(b);
  const std::size_t m = cfg.samples();
  const int nc = cfg.carrier_components;
  std::vector<double> freq(static_cast<std::size_t>(nc)), phase(static_cast<std::size_t>(nc));
  for (int i = 0; i < nc; ++i) {
    freq[static_cast<std::size_t>(i)] = rng.uniform(band.f_lo, band.f_hi);
    phase[static_cast<std::size_t>(i)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  const double amp = std::sqrt(2.0 / nc);
  std::vector<double> out(m, 0.0);
  for (int i = 0; i < nc; ++i) {
    const double w = 2.0 * std::numbers::pi * freq[static_cast<std::size_t>(i)] / cfg.fs;
    for (std::size_t t = 0; t < m; ++t) {
      out[t] += amp * std::sin(w * static_cast<double>(t) + phase[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

EEGRecording gen_eeg(const Matrix<double>& envelopes, const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t lead = cfg.lead_in_samples();
  const std::size_t m = cfg.samples();
  if (envelopes.rows() != cfg.band_count() || envelopes.cols() != lead + m) {
    throw InvalidArgument("gen_eeg: envelope matrix does not match the configuration");
  }
  const std::size_t nc = cfg.channels();
  Matrix<double> acc(nc, m);
  for (std::size_t b = 0; b < cfg.band_count(); ++b) {
    const auto carrier = gen_carrier(cfg, b);
    const auto env = envelopes.row(b);
    for (std::size_t c = 0; c < nc; ++c) {
      const double g = cfg.channel_band_gains(c, b) * cfg.eeg_scale_uv;
      if (g == 0.0) continue;
      auto row = acc.row(c);
      for (std::size_t t = 0; t < m; ++t) row[t] += g * env[lead + t] * carrier[t];
    }
  }
  EEGRecording eeg;
  eeg.channel_labels = cfg.channel_labels;
  eeg.fs = cfg.fs;
  eeg.data = Matrix<float>(nc, m);
  Rng noise(derive_seed(cfg.seed, kEegNoise));
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t t = 0; t < m; ++t) {
      double v = acc(c, t);
      if (cfg.eeg_noise_sigma > 0.0) v += cfg.eeg_noise_sigma * noise.normal();
      eeg.data(c, t) = static_cast<float>(v);
    }
  }
  return eeg;
}

Matrix<double> latent_drives(const Matrix<double>& envelopes, const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t nb = cfg.band_count();
  if (envelopes.rows() != nb) throw InvalidArgument("latent_drives: envelope band count mismatch");
  Matrix<double> z(cfg.rois(), envelopes.cols());
  for (std::size_t p = 0; p < cfg.rois(); ++p) {
    for (std::size_t b = 0; b < nb; ++b) {
      double w = 0.0;
      for (std::size_t c = 0; c < cfg.channels(); ++c) {
        w += cfg.roi_mixing(p, c * nb + b) * cfg.channel_band_gains(c, b);
      }
      if (w == 0.0) continue;
      const auto env = envelopes.row(b);
      auto row = z.row(p);
      for (std::size_t t = 0; t < env.size(); ++t) row[t] += w * env[t];
    }
  }
  return z;
}

Matrix<double> sampled_bold(const Matrix<double>& envelopes, const SynthConfig& cfg,
                            const HRFKernel& hrf) {
  if (std::abs(hrf.dt * cfg.fs - 1.0) > 1e-9) {
    throw InvalidArgument("gen_roi: HRF sampling interval must equal 1/fs");
  }
  if (cfg.roi_mixing.rows() != cfg.rois() ||
      cfg.roi_mixing.cols() != cfg.channels() * cfg.band_count()) {
    throw InvalidArgument("gen_roi: roi_mixing must be P x (C*B)");
  }
  const Matrix<double> z = latent_drives(envelopes, cfg);
  const std::size_t lead = cfg.lead_in_samples();
  const std::size_t k_frames = cfg.frames();
  Matrix<double> bold(cfg.rois(), k_frames);
  const auto& h = hrf.samples;
  for (std::size_t p = 0; p < cfg.rois(); ++p) {
    const auto zr = z.row(p);
    for (std::size_t k = 0; k < k_frames; ++k) {
      const auto n = lead + static_cast<std::size_t>(
                                std::llround(static_cast<double>(k) * cfg.tr * cfg.fs));
      double acc = 0.0;
      const std::size_t jmax = std::min(h.size(), n + 1);
      for (std::size_t j = 0; j < jmax; ++j) acc += h[j] * zr[n - j];
      bold(p, k) = acc;
    }
  }
  return bold;
}

ROITimeSeries gen_roi(const Matrix<double>& envelopes, const SynthConfig& cfg,
                      const HRFKernel& hrf) {
  Matrix<double> bold = sampled_bold(envelopes, cfg, hrf);
  if (cfg.bold_noise_sigma > 0.0) {
    Rng noise(derive_seed(cfg.seed, kBoldNoise));
    for (auto& v : bold.flat()) v += cfg.bold_noise_sigma * noise.normal();
  }
  ROITimeSeries roi;
  roi.roi_labels = cfg.roi_labels;
  roi.tr = cfg.tr;
  roi.data = std::move(bold);
  return normalize_roi(roi, cfg.roi_lowpass_hz);
}

ScanPair gen_scan(const SynthConfig& cfg, const std::string& subject_id,
                  const std::string& scan_id) {
  cfg.validate();
  const auto env = gen_envelopes(cfg);
  const auto hrf = canonical_hrf(1.0 / cfg.fs, cfg.hrf_duration_sec);
  ScanPair scan;
  scan.subject_id = subject_id;
  scan.scan_id = scan_id;
  scan.condition = "rest";
  scan.eeg = gen_eeg(env, cfg);
  scan.roi = gen_roi(env, cfg, hrf);
  return scan;
}

SynthConfig subject_config(const SynthConfig& cfg, int subject, int scan) {
  SynthConfig out = cfg;
  const std::uint64_t subject_seed = derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(subject));
  Rng jitter(derive_seed(subject_seed, 0));
  for (auto& g : out.channel_band_gains.flat()) {
    g *= 1.0 + jitter.uniform(-cfg.gain_jitter, cfg.gain_jitter);
  }
  out.seed = derive_seed(subject_seed, 1 + static_cast<std::uint64_t>(scan));
  return out;
}

std::vector<ScanPair> gen_dataset(const SynthConfig& cfg, int n_subjects, int scans_per_subject) {
  cfg.validate();
  if (n_subjects < 1 || scans_per_subject < 1) {
    throw InvalidArgument("gen_dataset: need at least one subject and one scan per subject");
  }
  std::vector<ScanPair> out;
  out.reserve(static_cast<std::size_t>(n_subjects * scans_per_subject));
  for (int s = 0; s < n_subjects; ++s) {
    std::ostringstream sid;
    sid << "sub-" << std::setw(2) << std::setfill('0') << (s + 1);
    for (int j = 0; j < scans_per_subject; ++j) {
      const auto scfg = subject_config(cfg, s, j);
      out.push_back(gen_scan(scfg, sid.str(), sid.str() + "_scan-" + std::to_string(j + 1)));
    }
  }
  return out;
}

}  // namespace neurobolt::synth
