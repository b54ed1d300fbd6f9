// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Synthetic simultaneous EEG / ROI-BOLD scans with a known generative map.
//
// Per band b a slow nonnegative envelope e_b(t) (smoothed |AR(1)|) modulates
// a narrowband carrier; each EEG channel mixes the modulated carriers with
// per-channel gains. Each ROI's latent drive is a fixed linear combination of
// the per-channel band envelopes, convolved with a canonical double-gamma
// HRF and sampled at the frame times k * tr.
//
// Envelope matrices carry `lead_in_sec` of history before t = 0 so early BOLD
// frames see a fully developed hemodynamic response; column lead_in_samples()
// is t = 0. All randomness derives from SynthConfig::seed via derive_seed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurobolt/signal_core.hpp"
#include "neurobolt/tensor.hpp"

namespace neurobolt::synth {

struct Band {
  std::string name;
  double f_lo = 0.0;
  double f_hi = 0.0;
};

struct SynthConfig {
  std::vector<std::string> channel_labels;
  std::vector<std::string> roi_labels;
  double duration_sec = 630.0;
  double fs = 200.0;
  double tr = 2.1;
  std::vector<Band> bands;
  std::vector<double> envelope_timescale_sec;  // one per band
  Matrix<double> channel_band_gains;           // C x B
  Matrix<double> roi_mixing;                   // P x (C*B), column c*B + b
  double eeg_noise_sigma = 5.0;                // microvolts
  double bold_noise_sigma = 0.0;               // drive units, before normalization
  double eeg_scale_uv = 20.0;                  // microvolts per unit of gain * envelope * carrier
  double envelope_smoothing_sec = 0.5;
  double envelope_floor = 0.0;                 // added to every envelope sample
  double lead_in_sec = 32.0;
  int carrier_components = 6;
  double gain_jitter = 0.2;                    // per-subject relative gain jitter (uniform +/-)
  double hrf_duration_sec = 32.0;
  std::optional<double> roi_lowpass_hz;        // applied by normalize_roi in gen_roi
  std::uint64_t seed = 0;

  std::size_t channels() const { return channel_labels.size(); }
  std::size_t band_count() const { return bands.size(); }
  std::size_t rois() const { return roi_labels.size(); }
  std::size_t samples() const;
  std::size_t frames() const;
  std::size_t lead_in_samples() const;

  void validate() const;

  /// 26 channels, 200 Hz, tr 2.1 s, 7 ROIs, six bands.
  static SynthConfig defaults(std::uint64_t seed = 0);
};

struct HRFKernel {
  double dt = 0.0;
  std::vector<double> samples;
  double peak_time_sec = 0.0;
};

/// Double-gamma HRF (shapes 6 and 16, unit scale, undershoot ratio 1/6)
/// sampled at j * dt for j < round(duration / dt) and scaled so the samples
/// sum to one. Throws InvalidArgument for duration < 25 s.
HRFKernel canonical_hrf(double dt, double duration_sec = 32.0);

/// Closed-form, unnormalized double-gamma value at t seconds.
double double_gamma(double t);

/// B x (lead + M) nonnegative band envelopes at cfg.fs.
Matrix<double> gen_envelopes(const SynthConfig& cfg);

/// Unit-RMS narrowband carrier of band `b`, M samples from t = 0.
std::vector<double> gen_carrier(const SynthConfig& cfg, std::size_t b);

EEGRecording gen_eeg(const Matrix<double>& envelopes, const SynthConfig& cfg);

/// Latent drives z (P x (lead + M)) before convolution.
Matrix<double> latent_drives(const Matrix<double>& envelopes, const SynthConfig& cfg);

/// Noise-free BOLD before noise and normalization: (z * hrf) at k * tr.
Matrix<double> sampled_bold(const Matrix<double>& envelopes, const SynthConfig& cfg,
                            const HRFKernel& hrf);

ROITimeSeries gen_roi(const Matrix<double>& envelopes, const SynthConfig& cfg,
                      const HRFKernel& hrf);

ScanPair gen_scan(const SynthConfig& cfg, const std::string& subject_id = "sub-00",
                  const std::string& scan_id = "sub-00_scan-0");

/// Subject s uses gains jittered by a per-subject stream; scan j of subject s
/// uses its own envelope/carrier/noise stream. Deterministic in cfg.seed.
std::vector<ScanPair> gen_dataset(const SynthConfig& cfg, int n_subjects, int scans_per_subject);

/// The configuration actually used for subject s, scan j of gen_dataset.
SynthConfig subject_config(const SynthConfig& cfg, int subject, int scan);

}  // namespace neurobolt::synth
