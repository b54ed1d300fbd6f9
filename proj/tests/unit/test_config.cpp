// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <set>

#include "../common/fixtures.hpp"
#include "neurobolt/bundle.hpp"
#include "neurobolt/config.hpp"
#include "neurobolt/error.hpp"
#include "neurobolt/pipeline.hpp"

using namespace neurobolt;
using testing::TempDir;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

std::vector<ScanPtr> small_dataset(int subjects, int scans) {
  auto cfg = synth::SynthConfig::defaults(4);
  cfg.duration_sec = 120.0;
  return preprocess_all(synth::gen_dataset(cfg, subjects, scans), PreprocessConfig{});
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("syntax errors carry line and column") {
    const std::string msg = message_of([] { parse_json_text("{\n  \"seed\": 3,\n  oops\n}", "run.json"); });
    CHECK(msg.rfind("run.json:3:", 0) == 0);
    CHECK_THROWS_AS(parse_json_text("{", "x"), ConfigError);
  }

  TEST_CASE("unknown keys and bad values name their path") {
    const std::string unknown = message_of([] { run_config_from_json(Json::parse(R"({"model": {"st": {"dept": 2}}})")); });
    CHECK(unknown.find("model.st.dept") != std::string::npos);
    CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"train": {"epochs": "many"}})")), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"train": {"min_lr": 1.0}})")), ConfigError);
    CHECK_THROWS_AS(run_config_from_json(Json::parse(R"({"split": {"kind": "diagonal"}})")), ConfigError);
  }

  TEST_CASE("run config JSON round trip") {
    RunConfig c;
    c.set_seed(17);
    c.model.st.depth = 2;
    c.train.epochs = 12;
    c.split.kind = SplitKind::kInterSubject;
    c.preprocess.normalize_roi = true;
    c.synth.envelope_floor = 0.25;
    c.rois = {"cuneus", "global"};
    const auto j = to_json(c);
    const auto back = run_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.model.st.depth == 2);
    CHECK(back.synth.envelope_floor == 0.25);
    CHECK(back.split.kind == SplitKind::kInterSubject);
  }

  TEST_CASE("top-level seed propagates and section seeds override it") {
    const auto c = run_config_from_json(Json::parse(R"({"seed": 5, "train": {"seed": 9}})"));
    CHECK(c.seed == 5);
    CHECK(c.model.seed == 5);
    CHECK(c.synth.seed == 5);
    CHECK(c.split.seed == 5);
    CHECK(c.train.seed == 9);
    CHECK(c.synth.channel_band_gains == synth::SynthConfig::defaults(5).channel_band_gains);
    const auto d = run_config_from_json(Json::parse(R"({"seed": 5, "synth": {"seed": 8}})"));
    CHECK(d.synth.seed == 8);
    CHECK(d.synth.channel_band_gains == synth::SynthConfig::defaults(8).channel_band_gains);
  }

  TEST_CASE("config files") {
    TempDir dir;
    std::ofstream(dir / "ok.json") << R"({"seed": 2, "dataset": {"n_subjects": 3}})";
    CHECK(load_run_config(dir / "ok.json").dataset.n_subjects == 3);
    std::ofstream(dir / "bad.json") << "{\"seed\": }";
    const std::string msg = message_of([&] { load_run_config(dir / "bad.json"); });
    CHECK(msg.find("bad.json:1:") != std::string::npos);
    CHECK_THROWS(load_run_config(dir / "absent.json"));
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("preprocess resamples and normalizes") {
    auto s = *testing::random_scan(2, 400.0, 400 * 60, 1, 2.0, 20);
    s.eeg.normalized = false;
    for (auto& v : s.eeg.data.flat()) v *= 50.0f;
    const auto p = preprocess(s, PreprocessConfig{});
    CHECK(p.eeg.fs == 200.0);
    CHECK(p.eeg.samples() == 200 * 60);
    CHECK(p.eeg.normalized);
    CHECK(p.roi.data == s.roi.data);
    PreprocessConfig roi_cfg;
    roi_cfg.normalize_roi = true;
    roi_cfg.roi_lowpass_hz = std::nullopt;
    const auto q = preprocess(s, roi_cfg);
    double mean = 0.0;
    for (double v : q.roi.data.row(0)) mean += v;
    CHECK(std::abs(mean / 20.0) < 1e-12);
  }

  TEST_CASE("bundles round trip through disk") {
    TempDir dir;
    const auto scans = small_dataset(2, 1);
    std::vector<ScanPair> raw;
    for (const auto& s : scans) raw.push_back(*s);
    bundle::write_dataset(dir.path(), raw);
    const auto back = bundle::read_dataset(dir.path());
    REQUIRE(back.size() == 2);
    CHECK(back[1]->scan_id == raw[1].scan_id);
    CHECK(back[1]->eeg.data == raw[1].eeg.data);
    CHECK(back[1]->eeg.normalized);
    std::filesystem::remove(dir / raw[0].scan_id / "roi.bin");
    CHECK_THROWS_AS(bundle::read_dataset(dir.path()), DataError);
  }

  TEST_CASE("intra split covers each scan chronologically") {
    const auto scans = small_dataset(2, 1);
    SplitConfig sc;
    sc.gap_sec = 4.0;
    const auto split = make_split(scans, sc, 16.0);
    REQUIRE(split.scans.size() == 2);
    for (const auto& [id, f] : split.scans) {
      REQUIRE(!f.train.empty());
      REQUIRE(!f.val.empty());
      REQUIRE(!f.test.empty());
      CHECK(f.train.back() < f.val.front());
      CHECK(f.val.back() < f.test.front());
    }
    const auto back = split_from_json(to_json(split));
    CHECK(back.scans.at(scans[0]->scan_id).test == split.scans.at(scans[0]->scan_id).test);
    CHECK(back.kind == split.kind);
    CHECK_THROWS_AS(split_from_json(Json::parse(R"({"kind": 3})")), DataError);
  }

  TEST_CASE("inter split keeps subjects together") {
    const auto scans = small_dataset(5, 2);
    SplitConfig sc;
    sc.kind = SplitKind::kInterSubject;
    sc.ratios = {3, 1, 1};
    sc.seed = 2;
    const auto split = make_split(scans, sc, 16.0);
    std::map<std::string, int> set_of_subject;
    for (int set = 0; set < 3; ++set) {
      for (const auto& id : split.scan_ids(set)) {
        const std::string subject = id.substr(0, id.find('_'));
        CHECK((!set_of_subject.count(subject) || set_of_subject[subject] == set));
        set_of_subject[subject] = set;
      }
    }
    CHECK(set_of_subject.size() == 5);
    const auto d = apply_split(scans, split, "global", 16.0);
    std::set<std::string> train_scans;
    for (const auto& w : d.train) train_scans.insert(w.scan_id());
    for (const auto& w : d.test) CHECK(!train_scans.count(w.scan_id()));
    CHECK(d.roi == "global");

    auto dup = scans;
    dup.push_back(scans[0]);
    CHECK_THROWS_AS(make_split(dup, sc, 16.0), InvalidArgument);
  }

  TEST_CASE("unknown ROI lists the available labels") {
    const auto scans = small_dataset(1, 1);
    CHECK(roi_index_of(scans, "putamen") == 4);
    const std::string msg = message_of([&] { roi_index_of(scans, "amygdala"); });
    CHECK(msg.find("'amygdala'") != std::string::npos);
    CHECK(msg.find("cuneus, heschl") != std::string::npos);
  }
}
