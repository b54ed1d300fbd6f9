// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/log.hpp"

#include <iostream>
#include <mutex>

namespace neurobolt::log {
namespace {

struct State {
  std::mutex mu;
  Level min_level = Level::kInfo;
  Sink sink;
};

State& state() {
  static State s;
  return s;
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarning: return "warning";
    case Level::kError: return "error";
  }
  return "?";
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(state().mu);
  state().sink = std::move(sink);
}

void set_min_level(Level level) {
  std::lock_guard lock(state().mu);
  state().min_level = level;
}

void write(Level level, std::string_view message) {
  auto& s = state();
  std::lock_guard lock(s.mu);
  if (level < s.min_level) return;
  if (s.sink) {
    s.sink(level, message);
    return;
  }
  std::cerr << "[" << level_name(level) << "] " << message << '\n';
}

}  // namespace neurobolt::log
