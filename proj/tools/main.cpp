// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// neurobolt: simulate, train, eval, gradcheck, ablate, report.
// Exit codes: 0 success, 1 computational failure, 2 usage error.

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "neurobolt/config.hpp"
#include "neurobolt/log.hpp"

namespace cli = neurobolt::cli;

int main(int argc, char** argv) {
  CLI::App app{"EEG to fMRI ROI signal reconstruction"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  cli::SimulateArgs sim;
  std::uint64_t seed = 0;
  auto* s = app.add_subcommand("simulate", "Generate synthetic scan bundles");
  s->add_option("-c,--config", sim.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  s->add_option("-o,--out", sim.out_dir, "Output dataset directory")->required();
  auto* s_seed = s->add_option("--seed", seed, "Run seed (overrides NEUROBOLT_SEED and the config)");

  cli::TrainArgs tr;
  std::size_t epochs = 0;
  auto* t = app.add_subcommand("train", "Train one model on one ROI");
  t->add_option("-c,--config", tr.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  t->add_option("-d,--data", tr.data_dir, "Dataset directory written by simulate")->required();
  t->add_option("-o,--run-dir", tr.run_dir, "Run directory");
  t->add_option("--split", tr.split, "Split protocol")->check(CLI::IsMember({"intra", "inter"}));
  t->add_option("--roi", tr.roi, "Target ROI label");
  auto* t_seed = t->add_option("--seed", seed, "Run seed");
  auto* t_epochs = t->add_option("--epochs", epochs, "Override train.epochs")->check(CLI::PositiveNumber);

  cli::EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--checkpoint", ev.checkpoint, "Run directory or checkpoint directory")->required();
  e->add_option("-d,--data", ev.data_dir, "Dataset directory")->required();
  e->add_option("--split-file", ev.split_file, "split.json of a run")->check(CLI::ExistingFile);
  e->add_option("--set", ev.set, "Set to evaluate with --split-file")
      ->check(CLI::IsMember({"train", "val", "test"}));
  e->add_option("--roi", ev.roi, "ROI label (default: the checkpoint's target)");
  e->add_option("-o,--out", ev.out_dir, "Report directory (default: <run>/eval)");
  e->add_flag("--plot-data", ev.plot_data, "Also write per-frame predicted and true series");

  cli::GradCheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  g->add_flag("--tiny", gc.tiny, "Use the tiny geometry");
  g->add_option("-c,--config", gc.config, "Take the model geometry from a run configuration")
      ->check(CLI::ExistingFile);
  g->add_option("--tol", gc.tolerance, "Relative error tolerance")->check(CLI::PositiveNumber);
  auto* g_seed = g->add_option("--seed", seed, "Sampling seed");

  cli::AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "Branch and scale-level ablation grid");
  a->add_option("-c,--config", ab.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  a->add_option("-d,--data", ab.data_dir, "Dataset directory")->required();
  a->add_option("-o,--out", ab.out_dir, "Output directory")->required();
  a->add_option("--levels", ab.levels, "Scale levels for T+MS rows (default 0..4)")
      ->check(CLI::Range(0, 4));
  auto* a_seed = a->add_option("--seed", seed, "Run seed");
  auto* a_epochs = a->add_option("--epochs", epochs, "Override train.epochs")->check(CLI::PositiveNumber);

  cli::ReportArgs rp;
  auto* r = app.add_subcommand("report", "Merge run reports into one table");
  r->add_option("runs", rp.run_dirs, "Run directories")->required()->check(CLI::ExistingDirectory);
  r->add_option("-o,--out", rp.out_dir, "Output directory")->required();
  r->add_option("--name", rp.names, "Model name per run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  neurobolt::log::set_min_level(quiet ? neurobolt::log::Level::kWarning : neurobolt::log::Level::kInfo);
  const auto seed_of = [&](CLI::Option* o) { return o->count() ? std::optional<std::uint64_t>(seed) : std::nullopt; };
  try {
    if (*s) {
      sim.seed = seed_of(s_seed);
      return cli::cmd_simulate(sim);
    }
    if (*t) {
      tr.seed = seed_of(t_seed);
      if (t_epochs->count()) tr.epochs = epochs;
      return cli::cmd_train(tr);
    }
    if (*e) return cli::cmd_eval(ev);
    if (*g) {
      gc.seed = seed_of(g_seed);
      return cli::cmd_gradcheck(gc);
    }
    if (*a) {
      ab.seed = seed_of(a_seed);
      if (a_epochs->count()) ab.epochs = epochs;
      return cli::cmd_ablate(ab);
    }
    return cli::cmd_report(rp);
  } catch (const neurobolt::InvalidArgument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return cli::kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return cli::kExitFailure;
  }
}
