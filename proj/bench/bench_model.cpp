// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// Forward + backward wall time per window for a given geometry.

#include <chrono>
#include <cstdio>

#include <CLI11.hpp>

#include "neurobolt/model.hpp"

using namespace neurobolt;

int main(int argc, char** argv) {
  CLI::App app{"neurobolt model step benchmark"};
  NeuroBoltConfig cfg;
  std::string branches = "both";
  int reps = 5;
  app.add_option("--d", cfg.d);
  app.add_option("--st-depth", cfg.st.depth);
  app.add_option("--st-heads", cfg.st.heads);
  app.add_option("--sp-depth", cfg.sp.depth);
  app.add_option("--sp-heads", cfg.sp.heads);
  app.add_option("--n", cfg.sp.n);
  app.add_option("--rank", cfg.sp.rank);
  app.add_option("--level", cfg.sp.max_level);
  app.add_option("--conv-channels", cfg.st.conv_channels);
  app.add_option("--branches", branches);
  app.add_option("--reps", reps);
  CLI11_PARSE(app, argc, argv);
  cfg.st.d = cfg.sp.d = cfg.d;
  cfg.branches = branches_from_string(branches);

  NeuroBoltModel<float> model(cfg);
  Rng rng(1);
  Matrix<float> x(cfg.channels.size(), cfg.window_samples());
  for (auto& v : x.flat()) v = static_cast<float>(0.3 * rng.normal());
  ModelCache<float> cache;
  Rng train_rng(2);
  model.forward(x, cache, &train_rng);
  model.backward(cache, 1.0f);

  using clock = std::chrono::steady_clock;
  double fwd = 0.0, bwd = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock::now();
    model.forward(x, cache, &train_rng);
    const auto t1 = clock::now();
    model.backward(cache, 1.0f);
    const auto t2 = clock::now();
    fwd += std::chrono::duration<double, std::milli>(t1 - t0).count();
    bwd += std::chrono::duration<double, std::milli>(t2 - t1).count();
  }
  std::printf("params %zu  forward %.2f ms  backward %.2f ms  total %.2f ms/window\n",
              model.parameter_count(), fwd / reps, bwd / reps, (fwd + bwd) / reps);
  return 0;
}
