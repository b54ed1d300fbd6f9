// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

// Backed by FFTW. Plans are created with FFTW_ESTIMATE so the chosen algorithm
// (and therefore every output bit) does not depend on timing measurements.

#include "neurobolt/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace neurobolt::fft {
namespace {

struct Plan {
  std::size_t n = 0;
  std::size_t howmany = 1;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  std::mutex mu;

  // `howmany` transforms of length n over contiguous segments.
  Plan(std::size_t size, std::size_t count) : n(size), howmany(count) {
    const int len = static_cast<int>(n);
    const int bins = static_cast<int>(n / 2 + 1);
    real = fftw_alloc_real(n * howmany);
    spec = fftw_alloc_complex((n / 2 + 1) * howmany);
    forward = fftw_plan_many_dft_r2c(1, &len, static_cast<int>(howmany), real, nullptr, 1, len,
                                     spec, nullptr, 1, bins, FFTW_ESTIMATE);
    if (howmany == 1) inverse = fftw_plan_dft_c2r_1d(len, spec, real, FFTW_ESTIMATE);
  }
  ~Plan() {
    fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
    fftw_free(real);
    fftw_free(spec);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
};

// FFTW's planner is not thread-safe; execution on distinct plans is.
Plan& plan_for(std::size_t n, std::size_t howmany = 1) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Plan>> plans;
  std::lock_guard lock(mu);
  auto& slot = plans[{n, howmany}];
  if (!slot) slot = std::make_unique<Plan>(n, howmany);
  return *slot;
}

}  // namespace

void rfft(std::span<const double> x, std::span<std::complex<double>> out) {
  const std::size_t n = x.size();
  if (n == 0 || out.size() != n / 2 + 1) throw std::invalid_argument("rfft: bad sizes");
  Plan& p = plan_for(n);
  std::lock_guard lock(p.mu);
  std::memcpy(p.real, x.data(), n * sizeof(double));
  fftw_execute(p.forward);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {p.spec[k][0], p.spec[k][1]};
}

void irfft(std::span<const std::complex<double>> bins, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0 || bins.size() != n / 2 + 1) throw std::invalid_argument("irfft: bad sizes");
  Plan& p = plan_for(n);
  std::lock_guard lock(p.mu);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    p.spec[k][0] = bins[k].real();
    p.spec[k][1] = bins[k].imag();
  }
  p.spec[0][1] = 0.0;
  if (n % 2 == 0) p.spec[n / 2][1] = 0.0;
  fftw_execute(p.inverse);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = p.real[t] * scale;
}

void rfft_magnitude(std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  if (n == 0 || out.size() != n / 2 + 1) throw std::invalid_argument("rfft_magnitude: bad sizes");
  Plan& p = plan_for(n);
  std::lock_guard lock(p.mu);
  std::memcpy(p.real, x.data(), n * sizeof(double));
  fftw_execute(p.forward);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::sqrt(p.spec[k][0] * p.spec[k][0] + p.spec[k][1] * p.spec[k][1]);
  }
}

void rfft_magnitude_batch(std::span<const double> x, std::size_t n, std::span<double> out) {
  if (n == 0 || x.size() % n != 0) throw std::invalid_argument("rfft_magnitude_batch: bad sizes");
  const std::size_t count = x.size() / n;
  const std::size_t bins = n / 2 + 1;
  if (out.size() != count * bins) throw std::invalid_argument("rfft_magnitude_batch: bad sizes");
  if (count == 0) return;
  Plan& p = plan_for(n, count);
  std::lock_guard lock(p.mu);
  std::memcpy(p.real, x.data(), x.size() * sizeof(double));
  fftw_execute(p.forward);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::sqrt(p.spec[k][0] * p.spec[k][0] + p.spec[k][1] * p.spec[k][1]);
  }
}

}  // namespace neurobolt::fft
