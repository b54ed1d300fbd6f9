// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace neurobolt::fft {

/// One-sided forward transform of a real sequence of length n into n/2+1
/// bins, unnormalized: X[k] = sum_t x[t] exp(-2 pi i k t / n).
void rfft(std::span<const double> x, std::span<std::complex<double>> out);

/// Inverse of rfft for a sequence of length n (bins.size() == n/2+1),
/// including the 1/n factor. The imaginary parts of the DC bin and (for even
/// n) the Nyquist bin are ignored.
void irfft(std::span<const std::complex<double>> bins, std::span<double> out);

/// Magnitudes of the one-sided spectrum; out.size() == x.size()/2+1.
void rfft_magnitude(std::span<const double> x, std::span<double> out);

/// rfft_magnitude of each of the x.size() / n consecutive length-n segments
/// of x, written back to back (n/2+1 values per segment).
void rfft_magnitude_batch(std::span<const double> x, std::size_t n, std::span<double> out);

}  // namespace neurobolt::fft
