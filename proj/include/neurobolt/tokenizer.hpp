// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Fixed-length per-channel patches of an EEG window.

#include <cstddef>
#include <cstring>
#include <string>

#include "neurobolt/error.hpp"
#include "neurobolt/tensor.hpp"

namespace neurobolt {

/// C x K_p x w patches stored as a (C * K_p) x w matrix; row c * K_p + k is
/// patch k of channel c.
template <typename T>
struct PatchGrid {
  Matrix<T> patches;
  std::size_t channels = 0;
  std::size_t per_channel = 0;  // K_p
  std::size_t w = 0;
  std::size_t s = 0;

  const T* at(std::size_t c, std::size_t k) const { return patches.row(c * per_channel + k).data(); }
};

/// floor((t - w) / s) + 1 for 0 < w <= t, s > 0.
inline std::size_t patch_count(std::size_t t, std::size_t w, std::size_t s) {
  if (w == 0 || w > t) {
    throw InvalidArgument("patch: width " + std::to_string(w) + " must be in [1, " +
                          std::to_string(t) + "]");
  }
  if (s == 0) throw InvalidArgument("patch: stride must be positive");
  return (t - w) / s + 1;
}

/// Patch (c, k) is x[c, k*s : k*s + w]. Trailing samples that do not fill a
/// patch are dropped.
template <typename T>
PatchGrid<T> patch(const Matrix<T>& x, std::size_t w, std::size_t s) {
  PatchGrid<T> grid;
  grid.channels = x.rows();
  grid.per_channel = patch_count(x.cols(), w, s);
  grid.w = w;
  grid.s = s;
  grid.patches = Matrix<T>(grid.channels * grid.per_channel, w);
  for (std::size_t c = 0; c < grid.channels; ++c) {
    const T* src = x.row(c).data();
    for (std::size_t k = 0; k < grid.per_channel; ++k) {
      std::memcpy(grid.patches.row(c * grid.per_channel + k).data(), src + k * s, w * sizeof(T));
    }
  }
  return grid;
}

}  // namespace neurobolt
