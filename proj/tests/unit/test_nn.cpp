// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "neurobolt/nn.hpp"
#include "neurobolt/rng.hpp"
#include "neurobolt/spec_encoder.hpp"

using namespace neurobolt;
using Mat = Matrix<double>;

namespace {

void fill(Mat& m, Rng& rng, double sd = 0.5) {
  for (auto& v : m.flat()) v = rng.normal(0.0, sd);
}

Mat randm(std::size_t r, std::size_t c, Rng& rng) {
  Mat m(r, c);
  fill(m, rng);
  return m;
}

void randomize(nn::Attention<double>& a, Rng& rng) {
  fill(a.qkv.weight.value, rng);
  fill(a.qkv.bias.value, rng);
  fill(a.proj.weight.value, rng);
  fill(a.proj.bias.value, rng);
  if (a.low_rank) {
    fill(a.e.value, rng);
    fill(a.f.value, rng);
  }
}

Mat affine(const Mat& x, const Mat& w, const Mat& b) {
  Mat y(x.rows(), w.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double acc = b(0, j);
      for (std::size_t k = 0; k < x.cols(); ++k) acc += x(i, k) * w(k, j);
      y(i, j) = acc;
    }
  }
  return y;
}

/// Low-rank attention written out with plain loops from the explicit weights.
Mat low_rank_oracle(const Mat& x, const nn::Attention<double>& a) {
  const std::size_t n = x.rows(), d = a.d, h = a.heads, dh = d / h, r = a.rank;
  const Mat qkv = affine(x, a.qkv.weight.value, a.qkv.bias.value);
  Mat kp(r, d), vp(r, d);
  for (std::size_t m = 0; m < r; ++m) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t t = 0; t < n; ++t) {
        kp(m, j) += a.e.value(m, t) * qkv(t, d + j);
        vp(m, j) += a.f.value(m, t) * qkv(t, 2 * d + j);
      }
    }
  }
  Mat o(n, d);
  for (std::size_t head = 0; head < h; ++head) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> s(r);
      double mx = -1e300, z = 0.0;
      for (std::size_t m = 0; m < r; ++m) {
        for (std::size_t j = 0; j < dh; ++j) s[m] += qkv(i, head * dh + j) * kp(m, head * dh + j);
        s[m] /= std::sqrt(double(dh));
        mx = std::max(mx, s[m]);
      }
      for (auto& v : s) z += (v = std::exp(v - mx));
      for (std::size_t m = 0; m < r; ++m) {
        for (std::size_t j = 0; j < dh; ++j) o(i, head * dh + j) += s[m] / z * vp(m, head * dh + j);
      }
    }
  }
  return affine(o, a.proj.weight.value, a.proj.bias.value);
}

void check_close(const Mat& a, const Mat& b, double tol) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.flat()[i] - b.flat()[i]) < tol);
}

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("low-rank attention at N 6, d 4, D 3 matches a loop oracle") {
    Rng rng(12);
    nn::Attention<double> a;
    a.init_low_rank(4, 2, 3, 6, rng);
    randomize(a, rng);
    const Mat x = randm(6, 4, rng);
    const Mat want = low_rank_oracle(x, a);
    nn::AttentionCache<double> cache;
    Mat y;
    a.forward(x, y, cache);
    check_close(y, want, 1e-12);
    check_close(linear_attention(x, a), want, 1e-12);
  }

  TEST_CASE("fewer tokens than n_max use the leading columns of E and F") {
    Rng rng(13);
    nn::Attention<double> a;
    a.init_low_rank(4, 2, 3, 6, rng);
    randomize(a, rng);
    const Mat x = randm(4, 4, rng);
    nn::AttentionCache<double> cache;
    Mat y;
    a.forward(x, y, cache);
    check_close(y, low_rank_oracle(x, a), 1e-12);
  }

  TEST_CASE("one token, rank one: output is the projected, scaled value") {
    Rng rng(14);
    nn::Attention<double> a;
    a.init_low_rank(4, 1, 1, 1, rng);
    randomize(a, rng);
    const Mat x = randm(1, 4, rng);
    const Mat qkv = affine(x, a.qkv.weight.value, a.qkv.bias.value);
    Mat v(1, 4);
    for (std::size_t j = 0; j < 4; ++j) v(0, j) = a.f.value(0, 0) * qkv(0, 8 + j);
    check_close(linear_attention(x, a), affine(v, a.proj.weight.value, a.proj.bias.value), 1e-12);
  }

  TEST_CASE("dense attention equals the explicit reference") {
    Rng rng(15);
    nn::Attention<double> a;
    a.init(8, 2, rng);
    randomize(a, rng);
    const Mat x = randm(5, 8, rng);
    const Mat qkv = affine(x, a.qkv.weight.value, a.qkv.bias.value);
    Mat q(5, 8), k(5, 8), v(5, 8);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 8; ++j) {
        q(i, j) = qkv(i, j);
        k(i, j) = qkv(i, 8 + j);
        v(i, j) = qkv(i, 16 + j);
      }
    }
    const Mat want = affine(nn::dense_attention_reference(q, k, v, 2), a.proj.weight.value,
                            a.proj.bias.value);
    nn::AttentionCache<double> cache;
    Mat y;
    a.forward(x, y, cache);
    check_close(y, want, 1e-12);
  }

  TEST_CASE("dense reference with identical keys averages the values") {
    Rng rng(16);
    Mat q = randm(3, 4, rng), k(3, 4, 0.7), v = randm(3, 4, rng);
    const Mat o = nn::dense_attention_reference(q, k, v, 2);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(o(i, j) == doctest::Approx((v(0, j) + v(1, j) + v(2, j)) / 3.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("dense block is permutation equivariant in evaluation mode") {
    Rng rng(17);
    nn::Block<double> b;
    b.init(8, 2, 4, rng);
    const Mat x = randm(6, 8, rng);
    const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
    Mat xp(6, 8);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 8; ++j) xp(i, j) = x(perm[i], j);
    }
    Mat y = x, yp = xp;
    nn::BlockCache<double> c1, c2;
    b.forward(y, c1, {});
    b.forward(yp, c2, {});
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 8; ++j) CHECK(yp(i, j) == doctest::Approx(y(perm[i], j)).epsilon(1e-12));
    }
  }

  TEST_CASE("layer norm standardizes rows at unit gain") {
    Rng rng(18);
    nn::LayerNorm<double> ln;
    ln.init(16);
    const Mat x = randm(4, 16, rng);
    Mat y;
    ln.forward(x, y, nullptr);
    for (std::size_t i = 0; i < 4; ++i) {
      double m = 0.0, s = 0.0;
      for (double v : y.row(i)) m += v;
      m /= 16;
      for (double v : y.row(i)) s += (v - m) * (v - m);
      CHECK(std::abs(m) < 1e-12);
      CHECK(s / 16 == doctest::Approx(1.0).epsilon(1e-4));
    }
  }

  TEST_CASE("linear layer computes x W + b") {
    Rng rng(19);
    nn::Linear<double> l;
    l.init(3, 2, rng);
    fill(l.bias.value, rng);
    const Mat x = randm(5, 3, rng);
    Mat y(5, 2);
    l.forward(x.data(), 5, y.data());
    check_close(y, affine(x, l.weight.value, l.bias.value), 1e-14);
  }

  TEST_CASE("patch encoder geometry") {
    CHECK(nn::conv1_stride(200, 4) == 66);
    CHECK(nn::conv1_stride(200, 25) == 8);
    Rng rng(20);
    nn::PatchEncoder<double> enc;
    enc.init(200, 16, 4, 2, rng);
    CHECK(enc.positions == 4);
    CHECK(enc.dim() == 16);
    Mat p(3, 200);
    fill(p, rng);
    for (std::size_t j = 0; j < 200; ++j) p(2, j) = p(0, j);
    Mat out;
    nn::PatchEncoderCache<double> cache;
    enc.forward(p, out, cache);
    REQUIRE(out.rows() == 3);
    REQUIRE(out.cols() == 16);
    for (std::size_t j = 0; j < 16; ++j) CHECK(out(2, j) == out(0, j));
  }
}
