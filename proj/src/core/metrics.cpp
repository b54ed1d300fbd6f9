// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurobolt/error.hpp"

namespace neurobolt {
namespace {

// Two-pass centered sums; returns false when either input is constant.
bool centered_sums(std::span<const double> a, std::span<const double> b, double& sab, double& saa,
                   double& sbb) {
  if (a.size() != b.size()) {
    throw InvalidArgument("pearson: lengths differ (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw InvalidArgument("pearson: need at least two values");
  // Exact check: centered sums of a constant vector can be round-off, not zero.
  const auto constant = [](std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  };
  if (constant(a) || constant(b)) return false;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  sab = saa = sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return saa > 0.0 && sbb > 0.0;
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
  double sab, saa, sbb;
  if (!centered_sums(a, b, sab, saa, sbb)) {
    throw NumericError("pearson: correlation is undefined for a constant input");
  }
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

Correlation pearson_flagged(std::span<const double> a, std::span<const double> b) {
  double sab, saa, sbb;
  if (!centered_sums(a, b, sab, saa, sbb)) return {0.0, false};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), true};
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.empty()) throw InvalidArgument("mse_loss: empty input");
  if (pred.size() != target.size()) {
    throw InvalidArgument("mse_loss: lengths differ (" + std::to_string(pred.size()) + " vs " +
                          std::to_string(target.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    acc += e * e;
  }
  return acc / static_cast<double>(pred.size());
}

}  // namespace neurobolt
