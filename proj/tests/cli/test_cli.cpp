// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the neurobolt executable end to end on a small synthetic dataset.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "../common/fixtures.hpp"
#include "neurobolt/config.hpp"

using neurobolt::Json;
using neurobolt::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;  // stdout and stderr
};

Run run(const std::string& args, const std::string& env = "") {
  static int n = 0;
  const fs::path log = fs::temp_directory_path() / ("nb-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
  const std::string cmd = env + " '" NEUROBOLT_CLI_PATH "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  fs::remove(log);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

/// Two 300 s scans and one-epoch training: seconds per command.
fs::path small_config(const TempDir& dir) {
  const fs::path p = dir / "small.json";
  std::ofstream(p) << R"({"seed": 3, "synth": {"duration_sec": 300},
    "dataset": {"n_subjects": 2, "scans_per_subject": 1},
    "train": {"epochs": 1, "warmup_epochs": 0}})";
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2") {
    CHECK(run("").code == 2);
    CHECK(run("simulate").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("--help").code == 0);
    CHECK(run("gradcheck").code == 2);
  }

  TEST_CASE("malformed config reports line and column") {
    TempDir dir("nb-cli");
    std::ofstream(dir / "bad.json") << "{\n  \"seed\": 1,\n  x\n}";
    const auto r = run("simulate -c " + q(dir / "bad.json") + " -o " + q(dir / "out"));
    CHECK(r.code == 2);
    CHECK(r.output.find("bad.json:3:") != std::string::npos);
    CHECK(!fs::exists(dir / "out" / "dataset.json"));
  }

  TEST_CASE("simulate is deterministic and writes every scan") {
    TempDir dir("nb-cli");
    const auto cfg = small_config(dir);
    REQUIRE(run("simulate -c " + q(cfg) + " -o " + q(dir / "a")).code == 0);
    REQUIRE(run("simulate -c " + q(cfg) + " -o " + q(dir / "b")).code == 0);
    const Json manifest = Json::parse(slurp(dir / "a" / "dataset.json"));
    std::size_t scans = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      if (e.is_directory()) {
        ++scans;
        for (const char* f : {"eeg.bin", "roi.bin", "meta.json", "synth_truth.json"}) {
          const std::string bytes = slurp(e.path() / f);
          CHECK(!bytes.empty());
          CHECK(bytes == slurp(dir / "b" / e.path().filename() / f));
        }
      }
    }
    CHECK(scans == 2);
    CHECK(slurp(dir / "a" / "dataset.json") == slurp(dir / "b" / "dataset.json"));
    CHECK(manifest["scans"].size() == 2);

    // The flag seed wins over the environment, which wins over the config.
    REQUIRE(run("simulate -c " + q(cfg) + " -o " + q(dir / "c"), "NEUROBOLT_SEED=11").code == 0);
    REQUIRE(run("simulate -c " + q(cfg) + " -o " + q(dir / "d") + " --seed 12", "NEUROBOLT_SEED=11").code == 0);
    CHECK(Json::parse(slurp(dir / "c" / "config.json"))["seed"] == 11);
    CHECK(Json::parse(slurp(dir / "d" / "config.json"))["seed"] == 12);
    CHECK(run("simulate -o " + q(dir / "e"), "NEUROBOLT_SEED=abc").code == 2);
  }

  TEST_CASE("gradcheck on the tiny model passes") {
    const auto r = run("gradcheck --tiny");
    CHECK(r.code == 0);
    CHECK(r.output.find("PASS") != std::string::npos);
    CHECK(run("gradcheck --tiny --tol 1e-30").code == 1);
  }

  TEST_CASE("train, eval and report") {
    TempDir dir("nb-cli");
    const auto cfg = small_config(dir);
    const auto data = dir / "data";
    REQUIRE(run("simulate -c " + q(cfg) + " -o " + q(data)).code == 0);

    const auto unknown = run("train -c " + q(cfg) + " -d " + q(data) + " --roi amygdala -o " + q(dir / "x"));
    CHECK(unknown.code == 2);
    CHECK(unknown.output.find("cuneus") != std::string::npos);

    const char* rois[] = {"cuneus", "heschl", "global"};
    std::string dirs;
    for (const char* roi : rois) {
      const auto r = run("-q train -c " + q(cfg) + " -d " + q(data) + " --roi " + roi + " -o " + q(dir / roi));
      REQUIRE_MESSAGE(r.code == 0, r.output);
      dirs += " " + q(dir / roi);
    }
    const fs::path a = dir / "cuneus";
    for (const char* f : {"config.json", "split.json", "train_log.jsonl", "report.json", "report.csv",
                          "checkpoint/manifest.json"}) {
      CHECK_MESSAGE(fs::exists(a / f), f);
    }
    CHECK(!fs::exists(a / ".lock"));
    const Json epoch = Json::parse(slurp(a / "train_log.jsonl"));
    CHECK(epoch["epoch"] == 1);
    CHECK(epoch.contains("val_R"));

    const auto ev = run("eval --checkpoint " + q(a) + " -d " + q(data) + " --plot-data");
    REQUIRE_MESSAGE(ev.code == 0, ev.output);
    CHECK(fs::exists(a / "eval" / "report.json"));
    CHECK(slurp(a / "eval" / "plot_data.csv").rfind("model,scan_id,roi,frame,time_sec,truth,pred", 0) == 0);
    const auto ev_test = run("eval --checkpoint " + q(a / "checkpoint") + " -d " + q(data) + " --split-file " +
                             q(a / "split.json") + " --set test -o " + q(dir / "ev"));
    REQUIRE_MESSAGE(ev_test.code == 0, ev_test.output);
    // Evaluating the run's own test set reproduces the report written by train.
    const Json trained = Json::parse(slurp(a / "report.json"));
    const Json again = Json::parse(slurp(dir / "ev" / "report.json"));
    CHECK(trained["rows"] == again["rows"]);

    // The resolved snapshot alone reproduces the run.
    const auto redo = run("-q train -c " + q(a / "config.json") + " -d " + q(data) + " -o " + q(dir / "redo"));
    REQUIRE_MESSAGE(redo.code == 0, redo.output);
    Json redo_rows = Json::parse(slurp(dir / "redo" / "report.json"))["rows"];
    Json trained_rows = trained["rows"];
    for (auto* rows : {&redo_rows, &trained_rows}) {
      for (auto& row : *rows) row.erase("model");  // the run directory name
    }
    CHECK(redo_rows == trained_rows);
    CHECK(slurp(dir / "redo" / "train_log.jsonl") == slurp(a / "train_log.jsonl"));

    std::ofstream(a / "eval" / ".lock") << "1\n";
    CHECK(run("eval --checkpoint " + q(a) + " -d " + q(data)).code == 1);
    fs::remove(a / "eval" / ".lock");

    const auto rep = run("report" + dirs + " -o " + q(dir / "merged"));
    REQUIRE_MESSAGE(rep.code == 0, rep.output);
    std::ifstream csv(dir / "merged" / "summary.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "scan_id,roi,cuneus,heschl,global");
  }

  TEST_CASE("a memorized tiny model tracks its training frames") {
    TempDir dir("nb-cli");
    const fs::path cfg = dir / "mem.json";
    std::ofstream(cfg) << R"({"seed": 4, "synth": {"duration_sec": 300},
      "dataset": {"n_subjects": 1, "scans_per_subject": 1},
      "model": {"d": 8, "window_sec": 2.0,
        "st": {"conv_channels": 2, "gn_groups": 1, "depth": 1, "heads": 2, "drop_path": 0.0},
        "sp": {"n": 4, "rank": 4, "max_level": 1, "depth": 1, "heads": 2, "attn_dropout": 0.0}},
      "train": {"epochs": 60, "warmup_epochs": 5, "peak_lr": 0.01, "min_lr": 1e-5,
        "weight_decay": 0.0, "drop_path": 0.0, "batch_size": 16}})";
    const auto data = dir / "data";
    const auto runs = dir / "run";
    REQUIRE(run("simulate -c " + q(cfg) + " -o " + q(data)).code == 0);
    const auto tr = run("-q train -c " + q(cfg) + " -d " + q(data) + " --roi heschl -o " + q(runs));
    REQUIRE_MESSAGE(tr.code == 0, tr.output);
    const auto ev = run("eval --checkpoint " + q(runs) + " -d " + q(data) + " --split-file " +
                        q(runs / "split.json") + " --set train -o " + q(dir / "ev"));
    REQUIRE_MESSAGE(ev.code == 0, ev.output);
    const Json rows = Json::parse(slurp(dir / "ev" / "report.json"))["rows"];
    REQUIRE(rows.size() == 1);
    INFO(rows[0].dump());
    CHECK(rows[0]["pearson_r"].get<double>() > 0.9);
  }
}
