// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "../common/fixtures.hpp"
#include "neurobolt/error.hpp"
#include "neurobolt/signal_core.hpp"

using namespace neurobolt;

namespace {

EEGRecording sine_recording(double fs, double seconds, double freq) {
  EEGRecording e;
  e.channel_labels = {"Cz"};
  e.fs = fs;
  const auto n = static_cast<std::size_t>(std::llround(fs * seconds));
  e.data = Matrix<float>(1, n);
  for (std::size_t i = 0; i < n; ++i) {
    e.data(0, i) = static_cast<float>(std::sin(2.0 * std::numbers::pi * freq * i / fs));
  }
  return e;
}

ROITimeSeries roi_rows(std::vector<std::vector<double>> rows) {
  ROITimeSeries r;
  r.tr = 2.1;
  r.data = Matrix<double>(rows.size(), rows.front().size());
  for (std::size_t p = 0; p < rows.size(); ++p) {
    r.roi_labels.push_back("r" + std::to_string(p));
    std::copy(rows[p].begin(), rows[p].end(), r.data.row(p).begin());
  }
  return r;
}

// Independent percentile: linear interpolation between order statistics.
double percentile_oracle(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

std::vector<WindowSample> ordered_samples(std::size_t n, int first = 0) {
  auto scan = std::make_shared<ScanPair>();
  scan->scan_id = "s";
  std::vector<WindowSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].scan = scan;
    out[i].frame_index = first + static_cast<int>(i);
  }
  return out;
}

}  // namespace

TEST_SUITE("signal_core") {
  TEST_CASE("resample at the same rate is a bit-identical copy") {
    const auto e = sine_recording(200.0, 3.0, 7.0);
    const auto r = resample(e, 200.0);
    CHECK(r.fs == 200.0);
    CHECK(r.data == e.data);
  }

  TEST_CASE("resample 400 Hz sine to 200 Hz matches the analytic sine") {
    const auto r = resample(sine_recording(400.0, 4.0, 10.0), 200.0);
    REQUIRE(r.samples() == 800);
    double worst = 0.0;
    for (std::size_t i = 100; i < 700; ++i) {
      const double want = std::sin(2.0 * std::numbers::pi * 10.0 * i / 200.0);
      worst = std::max(worst, std::abs(r.data(0, i) - want));
    }
    CHECK(worst < 1e-3);
  }

  TEST_CASE("resample length arithmetic") {
    EEGRecording e = sine_recording(250.0, 4.0, 5.0);
    REQUIRE(e.samples() == 1000);
    CHECK(resample(e, 200.0).samples() == 800);
    CHECK_THROWS_AS(resample(e, 0.0), InvalidArgument);
    CHECK_THROWS_AS(resample(e, -5.0), InvalidArgument);
  }

  TEST_CASE("normalize_amplitude divides by 100 once") {
    EEGRecording e;
    e.channel_labels = {"Cz"};
    e.fs = 200.0;
    e.data = Matrix<float>(1, 3, std::vector<float>{100.0f, 0.0f, -55.0f});
    const auto n = normalize_amplitude(e);
    CHECK(n.normalized);
    CHECK(n.data(0, 0) == doctest::Approx(1.0));
    CHECK(n.data(0, 1) == 0.0f);
    CHECK(n.data(0, 2) == doctest::Approx(-0.55));
    CHECK_THROWS_AS(normalize_amplitude(n), InvalidArgument);
  }

  TEST_CASE("percentile uses linear interpolation between order statistics") {
    CHECK(percentile({0, 2, 2}, 0.95) == doctest::Approx(2.0));
    CHECK(percentile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
    Rng rng(4);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> v(1 + rng.index(40));
      for (auto& x : v) x = rng.normal();
      const double q = rng.uniform();
      CHECK(percentile(v, q) == doctest::Approx(percentile_oracle(v, q)).epsilon(1e-12));
    }
  }

  TEST_CASE("normalize_roi rejects a constant row and names it") {
    auto r = roi_rows({{1, 2, 3, 4}, {1, 1, 1, 1}});
    try {
      normalize_roi(r, std::nullopt);
      FAIL("expected an error");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("r1") != std::string::npos);
    }
  }

  TEST_CASE("normalize_roi on [-2, 0, 2] without low-pass") {
    const auto n = normalize_roi(roi_rows({{-2, 0, 2}}), std::nullopt);
    const double p95 = percentile_oracle({2, 0, 2}, 0.95);
    CHECK(n.data(0, 0) == doctest::Approx(-2.0 / p95));
    CHECK(n.data(0, 1) == doctest::Approx(0.0));
    CHECK(n.data(0, 2) == doctest::Approx(2.0 / p95));
  }

  TEST_CASE("normalize_roi rows: zero mean, unit 95th percentile, idempotent") {
    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> row(5 + rng.index(300));
      for (auto& x : row) x = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 10));
      const auto once = normalize_roi(roi_rows({row}), std::nullopt);
      const auto twice = normalize_roi(once, std::nullopt);
      double mean = 0.0;
      std::vector<double> abs_vals;
      for (double v : once.data.row(0)) {
        mean += v;
        abs_vals.push_back(std::abs(v));
      }
      CHECK(std::abs(mean / row.size()) < 1e-9);
      CHECK(std::abs(percentile_oracle(abs_vals, 0.95) - 1.0) < 1e-9);
      for (std::size_t i = 0; i < row.size(); ++i) CHECK(std::abs(twice.data(0, i) - once.data(0, i)) < 1e-9);
    }
  }

  TEST_CASE("normalize_roi low-pass removes content above the cutoff") {
    const std::size_t k = 300;
    std::vector<double> row(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double t = i * 2.1;
      row[i] = std::sin(2 * std::numbers::pi * 0.02 * t) + std::sin(2 * std::numbers::pi * 0.2 * t);
    }
    const auto n = normalize_roi(roi_rows({row}), 0.15);
    // Projection on the 0.2 Hz component is gone; the 0.02 Hz one remains.
    double hi = 0.0, lo = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      hi += n.data(0, i) * std::sin(2 * std::numbers::pi * 0.2 * i * 2.1);
      lo += n.data(0, i) * std::sin(2 * std::numbers::pi * 0.02 * i * 2.1);
    }
    CHECK(std::abs(hi) < 0.05 * std::abs(lo));
  }

  TEST_CASE("align_windows: tr 2.1, 16 s windows, 100 frames") {
    const auto scan = testing::random_scan(3, 200.0, 42000, 2, 2.1, 100);
    const auto w = align_windows(scan, 16.0, 1);
    REQUIRE(w.size() == 92);
    CHECK(w.front().frame_index == 8);
    CHECK(w.back().frame_index == 99);
    for (const auto& s : w) {
      CHECK(s.length == 3200);
      CHECK(s.roi_index == 1);
      CHECK(s.y == scan->roi.data(1, s.frame_index));
      // Half-open interval [k tr - 16, k tr).
      CHECK(s.start + s.length == static_cast<std::size_t>(std::llround(s.frame_index * 2.1 * 200.0)));
    }
    const auto x = w[3].x();
    CHECK(x.rows() == 3);
    CHECK(x.cols() == 3200);
    CHECK(x(2, 17) == scan->eeg.data(2, w[3].start + 17));
  }

  TEST_CASE("align_windows count matches brute-force enumeration") {
    Rng rng(21);
    for (int t = 0; t < 200; ++t) {
      const double tr = rng.uniform(0.5, 3.0);
      const std::size_t k = 1 + rng.index(200);
      const double win = rng.uniform(1.0, 20.0);
      std::size_t brute = 0;
      for (std::size_t f = 0; f < k; ++f) brute += (f * tr >= win - 1e-9) ? 1 : 0;
      CHECK(alignable_frame_count(k, tr, win) == brute);
    }
    const auto scan = testing::random_scan(2, 100.0, 3000, 1, 1.5, 20);
    CHECK(align_windows(scan, 4.0, 0).size() == alignable_frame_count(20, 1.5, 4.0));
  }

  TEST_CASE("align_windows degenerate inputs") {
    // K * tr = 8.4 s < 16 s with 20 s of EEG: empty list (plus a warning).
    const auto few_frames = testing::random_scan(2, 200.0, 4000, 1, 2.1, 4);
    CHECK(align_windows(few_frames, 16.0, 0).empty());
    // Window longer than the EEG itself: error.
    const auto shortscan = testing::random_scan(2, 200.0, 2000, 1, 2.1, 4);
    CHECK_THROWS_AS(align_windows(shortscan, 16.0, 0), InvalidArgument);
    CHECK_THROWS_AS(align_windows(shortscan, 2.0, 3), InvalidArgument);
    CHECK_THROWS_AS(align_windows(shortscan, 2.0, -1), InvalidArgument);
  }

  TEST_CASE("split_intra: 1000 frames at tr 2.1") {
    const auto s = split_intra(ordered_samples(1000), {8, 1, 1}, 20.0, 2.1);
    CHECK(s.gap_frames == 10);
    CHECK(s.train_frames.size() == 800);
    CHECK(s.val_frames.size() == 90);
    CHECK(s.test_frames.size() == 90);
    CHECK(s.val_frames.front() == 810);
    CHECK(s.test_frames.front() == 910);
  }

  TEST_CASE("split_intra too few frames") {
    CHECK_THROWS_AS(split_intra(ordered_samples(30), {8, 1, 1}, 20.0, 2.1), InvalidArgument);
  }

  TEST_CASE("split_intra sets are disjoint and gap-separated") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
      const double tr = rng.uniform(0.7, 3.0);
      const auto s = split_intra(ordered_samples(400 + rng.index(600), 3), {8, 1, 1}, 20.0, tr);
      std::set<int> all;
      for (const auto* v : {&s.train_frames, &s.val_frames, &s.test_frames}) all.insert(v->begin(), v->end());
      CHECK(all.size() == s.train_frames.size() + s.val_frames.size() + s.test_frames.size());
      CHECK((s.val_frames.front() - s.train_frames.back() - 1) * tr >= 20.0 - 1e-9);
      CHECK((s.test_frames.front() - s.val_frames.back() - 1) * tr >= 20.0 - 1e-9);
    }
  }

  TEST_CASE("split_inter keeps subjects together and is deterministic") {
    std::vector<ScanPtr> scans;
    for (int s = 0; s < 22; ++s) {
      for (int j = 0; j < (s < 7 ? 2 : 1); ++j) {
        auto p = std::make_shared<ScanPair>();
        p->subject_id = "sub-" + std::to_string(s);
        p->scan_id = p->subject_id + "_" + std::to_string(j);
        scans.push_back(p);
      }
    }
    REQUIRE(scans.size() == 29);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto a = split_inter(scans, {18, 5, 6}, seed);
      CHECK(a.train_scans.size() + a.val_scans.size() + a.test_scans.size() == 29);
      for (const auto* set : {&a.train_scans, &a.val_scans, &a.test_scans}) {
        for (const auto& id : *set) {
          if (id.back() == '0' && std::stoi(id.substr(4)) < 7) {
            const std::string sibling = id.substr(0, id.size() - 1) + "1";
            CHECK(std::find(set->begin(), set->end(), sibling) != set->end());
          }
        }
      }
      if (seed % 100 == 0) {
        const auto b = split_inter(scans, {18, 5, 6}, seed);
        CHECK(a.train_scans == b.train_scans);
        CHECK(a.val_scans == b.val_scans);
        CHECK(a.test_scans == b.test_scans);
      }
    }
    const std::vector<ScanPtr> two(scans.begin(), scans.begin() + 4);  // subjects 0 and 1
    CHECK_THROWS_AS(split_inter(two, {3, 1, 1}, 0), InvalidArgument);
  }

  TEST_CASE("select by frames and by scan ids") {
    const auto scan = testing::random_scan(1, 10.0, 400, 1, 1.0, 40);
    const auto w = align_windows(scan, 5.0, 0);
    CHECK(select(w, std::vector<int>{5, 6, 100}).size() == 2);
    CHECK(select(w, std::vector<std::string>{"sub-00_scan-0"}).size() == w.size());
    CHECK(select(w, std::vector<std::string>{"other"}).empty());
  }

  TEST_CASE("ScanPair validation") {
    ScanPair s = *testing::random_scan(2, 100.0, 1000, 1, 1.0, 10);
    CHECK_NOTHROW(s.validate());
    s.eeg.channel_labels.pop_back();
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    ScanPair t = *testing::random_scan(2, 100.0, 500, 1, 1.0, 10);
    CHECK_THROWS_AS(t.validate(), InvalidArgument);  // EEG shorter than the BOLD frames
  }
}
