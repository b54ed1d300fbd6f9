// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

#include "neurobolt/error.hpp"
#include "neurobolt/eval.hpp"
#include "neurobolt/fft.hpp"
#include "neurobolt/metrics.hpp"
#include "neurobolt/pipeline.hpp"
#include "neurobolt/synth.hpp"

using namespace neurobolt;
using synth::SynthConfig;

namespace {

/// One channel, one band, one ROI; short scan.
SynthConfig single(double f_lo, double f_hi, double seconds = 60.0) {
  SynthConfig c = SynthConfig::defaults(3);
  c.channel_labels = {"Cz"};
  c.roi_labels = {"roi"};
  c.bands = {{"b", f_lo, f_hi}};
  c.envelope_timescale_sec = {10.0};
  c.channel_band_gains = Matrix<double>(1, 1, 1.0);
  c.roi_mixing = Matrix<double>(1, 1, 1.0);
  c.duration_sec = seconds;
  return c;
}

double autocorr(std::span<const double> x, std::size_t lag) {
  std::vector<double> a(x.begin(), x.end() - lag), b(x.begin() + lag, x.end());
  return pearson(a, b);
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("canonical HRF shape") {
    const auto h = synth::canonical_hrf(0.1, 32.0);
    double area = 0.0;
    for (double v : h.samples) area += v;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-6));
    const auto peak = std::max_element(h.samples.begin(), h.samples.end());
    const double t_peak = 0.1 * (peak - h.samples.begin());
    CHECK(std::abs(t_peak - 5.0) <= 0.1 + 1e-12);
    CHECK(h.peak_time_sec == doctest::Approx(t_peak));
    CHECK(std::abs(h.samples[300]) < 1e-3 * *peak);
    CHECK(h.samples.size() * h.dt >= 25.0);
    // Closed form: gamma densities of shapes 6 and 16 at t = 5 s.
    const double g6 = std::pow(5.0, 5) * std::exp(-5.0) / 120.0;
    const double g16 = std::pow(5.0, 15) * std::exp(-5.0) / std::tgamma(16.0);
    CHECK(synth::double_gamma(5.0) == doctest::Approx(g6 - g16 / 6.0).epsilon(1e-12));
    CHECK_THROWS_AS(synth::canonical_hrf(0.1, 20.0), InvalidArgument);
  }

  TEST_CASE("envelopes are deterministic, nonnegative and slow") {
    const auto cfg = single(8, 12, 400.0);
    const auto a = synth::gen_envelopes(cfg);
    CHECK(a == synth::gen_envelopes(cfg));
    CHECK(*std::min_element(a.flat().begin(), a.flat().end()) >= 0.0);
    const auto row = a.row(0);
    CHECK(autocorr(row, 200) > autocorr(row, 2000));
  }

  TEST_CASE("EEG length and zero cases") {
    auto cfg = SynthConfig::defaults(1);
    CHECK(cfg.samples() == 126000);
    CHECK(cfg.frames() == 300);

    auto zero = single(8, 12);
    zero.channel_band_gains.set_zero();
    zero.eeg_noise_sigma = 0.0;
    const auto eeg0 = synth::gen_eeg(synth::gen_envelopes(zero), zero);
    CHECK(std::all_of(eeg0.data.flat().begin(), eeg0.data.flat().end(), [](float v) { return v == 0.0f; }));

    zero.eeg_noise_sigma = 4.0;
    const auto noise = synth::gen_eeg(synth::gen_envelopes(zero), zero);
    double ss = 0.0;
    for (float v : noise.data.flat()) ss += double(v) * v;
    CHECK(std::sqrt(ss / noise.data.size()) == doctest::Approx(4.0).epsilon(0.02));
  }

  TEST_CASE("single 8-12 Hz band concentrates spectral mass in band") {
    auto cfg = single(8, 12);
    cfg.eeg_noise_sigma = 0.0;
    const auto eeg = synth::gen_eeg(synth::gen_envelopes(cfg), cfg);
    const std::size_t n = 3200;  // 16 s windows
    for (std::size_t start = 0; start + n <= eeg.samples(); start += n) {
      std::vector<double> x(eeg.data.row(0).begin() + start, eeg.data.row(0).begin() + start + n);
      std::vector<std::complex<double>> bins(n / 2 + 1);
      fft::rfft(x, bins);
      double in = 0.0, total = 0.0;
      for (std::size_t k = 0; k < bins.size(); ++k) {
        const double f = k * cfg.fs / n, p = std::norm(bins[k]);
        total += p;
        if (f >= 8.0 && f <= 12.0) in += p;
      }
      CHECK(in / total > 0.9);
    }
  }

  TEST_CASE("impulse drive peaks one HRF delay later") {
    auto cfg = single(8, 12);
    cfg.tr = 0.5;
    const auto hrf = synth::canonical_hrf(1.0 / cfg.fs, cfg.hrf_duration_sec);
    Matrix<double> env(1, cfg.lead_in_samples() + cfg.samples());
    const double t0 = 20.0;
    env(0, cfg.lead_in_samples() + static_cast<std::size_t>(t0 * cfg.fs)) = 1.0;
    const auto roi = synth::gen_roi(env, cfg, hrf);
    const auto row = roi.data.row(0);
    const double t_peak = cfg.tr * (std::max_element(row.begin(), row.end()) - row.begin());
    CHECK(std::abs(t_peak - (t0 + hrf.peak_time_sec)) <= cfg.tr);
  }

  TEST_CASE("zero mixing row fails normalization unless BOLD noise is present") {
    auto cfg = single(8, 12);
    cfg.roi_mixing.set_zero();
    const auto env = synth::gen_envelopes(cfg);
    const auto hrf = synth::canonical_hrf(1.0 / cfg.fs);
    CHECK_THROWS_AS(synth::gen_roi(env, cfg, hrf), InvalidArgument);
    cfg.bold_noise_sigma = 0.1;
    CHECK_NOTHROW(synth::gen_roi(env, cfg, hrf));
  }

  TEST_CASE("noise-free ROI equals independently convolved drive") {
    auto cfg = SynthConfig::defaults(5);
    cfg.duration_sec = 120.0;
    const auto env = synth::gen_envelopes(cfg);
    const auto hrf = synth::canonical_hrf(1.0 / cfg.fs);
    const auto roi = synth::gen_roi(env, cfg, hrf);
    const std::size_t lead = cfg.lead_in_samples(), nb = cfg.band_count();
    for (std::size_t p = 0; p < cfg.rois(); ++p) {
      std::vector<double> want;
      for (std::size_t k = 0; k < cfg.frames(); ++k) {
        const std::size_t n = lead + static_cast<std::size_t>(std::llround(k * cfg.tr * cfg.fs));
        double acc = 0.0;
        for (std::size_t j = 0; j < hrf.samples.size(); ++j) {
          double z = 0.0;
          for (std::size_t c = 0; c < cfg.channels(); ++c) {
            for (std::size_t b = 0; b < nb; ++b) {
              z += cfg.roi_mixing(p, c * nb + b) * cfg.channel_band_gains(c, b) * env(b, n - j);
            }
          }
          acc += hrf.samples[j] * z;
        }
        want.push_back(acc);
      }
      const auto got = roi.data.row(p);
      CHECK(pearson(std::vector<double>(got.begin(), got.end()), want) ==
            doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("HRF convolution preserves a constant drive level") {
    auto cfg = single(8, 12);
    const auto hrf = synth::canonical_hrf(1.0 / cfg.fs);
    Matrix<double> env(1, cfg.lead_in_samples() + cfg.samples(), 2.5);
    const auto bold = synth::sampled_bold(env, cfg, hrf);
    for (double v : bold.row(0)) CHECK(v == doctest::Approx(2.5).epsilon(1e-6));
  }

  TEST_CASE("dataset layout and determinism") {
    auto cfg = SynthConfig::defaults(11);
    cfg.duration_sec = 40.0;
    const auto a = synth::gen_dataset(cfg, 5, 2);
    REQUIRE(a.size() == 10);
    std::set<std::string> subjects, scans;
    for (const auto& s : a) {
      subjects.insert(s.subject_id);
      scans.insert(s.scan_id);
    }
    CHECK(subjects.size() == 5);
    CHECK(scans.size() == 10);
    const auto b = synth::gen_dataset(cfg, 5, 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].eeg.data == b[i].eeg.data);
      CHECK(a[i].roi.data == b[i].roi.data);
    }
    // Scans of one subject share jittered gains; different subjects do not.
    CHECK(synth::subject_config(cfg, 0, 0).channel_band_gains ==
          synth::subject_config(cfg, 0, 1).channel_band_gains);
    CHECK(!(synth::subject_config(cfg, 0, 0).channel_band_gains ==
            synth::subject_config(cfg, 1, 0).channel_band_gains));
    const auto g = synth::subject_config(cfg, 2, 0).channel_band_gains;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double ratio = g.flat()[i] / cfg.channel_band_gains.flat()[i];
      CHECK(ratio >= 0.8 - 1e-12);
      CHECK(ratio <= 1.2 + 1e-12);
    }
  }

  TEST_CASE("config validation") {
    auto cfg = SynthConfig::defaults();
    cfg.bands[0].f_hi = 150.0;  // above Nyquist
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = SynthConfig::defaults();
    cfg.eeg_noise_sigma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  }

  TEST_CASE("identifiability: band-power ridge recovers noise-free BOLD") {
    auto cfg = SynthConfig::defaults(7);
    cfg.eeg_noise_sigma = 0.0;
    const auto scans = preprocess_all(synth::gen_dataset(cfg, 8, 1), PreprocessConfig{});
    SplitConfig sc;
    sc.kind = SplitKind::kInterSubject;
    sc.ratios = {5, 1, 2};
    sc.seed = 7;
    const auto split = make_split(scans, sc, 16.0);
    for (const std::string roi : {"heschl", "thalamus"}) {
      const auto d = apply_split(scans, split, roi, 16.0);
      const auto ridge = eval::baseline_ridge(d.train, d.val, eval::default_bands(), cfg.fs);
      const auto rows = eval::evaluate_windows(ridge.predictor(), d.test, "ridge");
      double r = 0.0;
      for (const auto& row : rows) r += row.pearson_r;
      r /= static_cast<double>(rows.size());
      INFO(roi << " ridge test R " << r);
      CHECK(r > 0.8);
    }
  }
}
