// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

namespace neurobolt {

/// Sample Pearson correlation. Throws InvalidArgument for unequal lengths or
/// fewer than two values and NumericError when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

struct Correlation {
  double r = 0.0;
  bool defined = true;  // false when an input is constant; r is then 0
};

/// Pearson R with the constant-input case reported as r = 0, defined = false.
Correlation pearson_flagged(std::span<const double> a, std::span<const double> b);

/// Mean of squared differences. Throws InvalidArgument for empty or unequal inputs.
double mse_loss(std::span<const double> pred, std::span<const double> target);

}  // namespace neurobolt
