/* Copyright 2026 The xbnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <bit>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "support/oracles.h"
#include "xbnn/error.h"
#include "xbnn/floatops.h"

namespace xbnn {
namespace {

using testing::Rng;

FloatTensor Filled(const Dims& d, float v, Layout layout = Layout::kNHWC) {
  FloatTensor t(d, layout);
  std::fill(t.data().begin(), t.data().end(), v);
  return t;
}

TEST_CASE("Conv2dF32 basics") {
  Rng rng(1);
  const FloatTensor in = testing::RandomTensor(rng, Dims{1, 3, 4, 4}, Layout::kNHWC);
  FloatTensor eye(Dims{3, 3, 1, 1}, Layout::kNCHW);
  for (std::uint32_t c = 0; c < 3; ++c) eye.at(c, c, 0, 0) = 1.0f;
  CHECK(testing::SameValues(Conv2dF32(in, eye, {}, ConvParams{1, 1, 1, 1, 0, 0, 3}), in));

  const FloatTensor ones = Filled(Dims{1, 1, 3, 3}, 1.0f);
  const FloatTensor k = Filled(Dims{1, 1, 3, 3}, 1.0f, Layout::kNCHW);
  const FloatTensor nine = Conv2dF32(ones, k, {}, ConvParams{3, 3, 1, 1, 0, 0, 1});
  REQUIRE(nine.data().size() == 1);
  CHECK(nine.data()[0] == 9.0f);

  CHECK_THROWS_AS(Conv2dF32(in, k, {}, ConvParams{3, 3, 1, 1, 0, 0, 3}), Error);
}

TEST_CASE("Conv2dF32 equals the six-loop reference exactly") {
  Rng rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint32_t c = 1 + static_cast<std::uint32_t>(rng() % 9);
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng() % 6);
    const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng() % 3);
    const std::uint32_t s = 1 + static_cast<std::uint32_t>(rng() % 2);
    const std::uint32_t p = static_cast<std::uint32_t>(rng() % k);
    const FloatTensor in = testing::RandomTensor(rng, Dims{2, c, 3 + k, 5}, Layout::kNCHW);
    const FloatTensor w = testing::RandomTensor(rng, Dims{m, c, k, k}, Layout::kNCHW);
    std::vector<float> bias;
    if (trial % 2) bias = testing::RandomTensor(rng, Dims{m, 1, 1, 1}, Layout::kNCHW).data();
    const ConvParams params{k, k, s, s, p, p, c};
    CHECK(testing::SameValues(Conv2dF32(in, w, bias, params),
                              testing::NaiveConvF32(in, w, bias, params)));
  }
}

TEST_CASE("OracleBinaryConv pads with +1") {
  const FloatTensor pos = Filled(Dims{1, 8, 2, 2}, 0.5f);
  const FloatTensor w = Filled(Dims{2, 8, 1, 1}, 3.0f, Layout::kNCHW);
  const FloatTensor out = OracleBinaryConv(pos, w, ConvParams{1, 1, 1, 1, 0, 0, 8});
  for (float v : out.data()) CHECK(v == 8.0f);

  // A -1 image with +1 weights: border taps add +1 instead of 0.
  const FloatTensor neg = Filled(Dims{1, 1, 2, 2}, -1.0f);
  const FloatTensor k = Filled(Dims{1, 1, 3, 3}, 1.0f, Layout::kNCHW);
  const FloatTensor corner = OracleBinaryConv(neg, k, ConvParams{3, 3, 1, 1, 1, 1, 1});
  // 4 image taps of -1 and 5 padding taps of +1
  CHECK(corner.at(0, 0, 0, 0) == 1.0f);

  Rng rng(3);
  const FloatTensor in = testing::RandomTensor(rng, Dims{1, 5, 4, 4}, Layout::kNHWC);
  const FloatTensor rw = testing::RandomTensor(rng, Dims{3, 5, 3, 3}, Layout::kNCHW);
  const ConvParams params{3, 3, 1, 1, 1, 1, 5};
  const FloatTensor o = OracleBinaryConv(in, rw, params);
  const testing::IntTensor ref = testing::BinaryConvOracle(in, rw, params);
  const std::int64_t k_valid = 45;
  for (std::uint32_t m = 0; m < 3; ++m)
    for (std::uint32_t y = 0; y < 4; ++y)
      for (std::uint32_t x = 0; x < 4; ++x) {
        const float v = o.at(0, m, y, x);
        CHECK(v == static_cast<float>(ref.at(0, m, y, x)));
        CHECK(std::abs(v) <= k_valid);
        CHECK((static_cast<std::int64_t>(v) - k_valid) % 2 == 0);
      }
}

TEST_CASE("SignOp") {
  const FloatTensor t(Dims{1, 3, 1, 1}, Layout::kNHWC, {-0.5f, 0.0f, -0.0f});
  CHECK(SignOp(t).data() == std::vector<float>{-1.0f, 1.0f, -1.0f});
  Rng rng(4);
  const FloatTensor r = testing::RandomTensor(rng, Dims{1, 4, 3, 3}, Layout::kNHWC);
  CHECK(SignOp(SignOp(r)) == SignOp(r));
}

BatchNormParams OneChannel(float scale, float shift, float mean, float var, float eps) {
  return BatchNormParams{{scale}, {shift}, {mean}, {var}, eps};
}

TEST_CASE("BatchNorm") {
  Rng rng(5);
  const FloatTensor r = testing::RandomTensor(rng, Dims{1, 1, 3, 3}, Layout::kNHWC);
  CHECK(BatchNorm(r, OneChannel(1, 0, 0, 1, 0)) == r);

  const FloatTensor three(Dims{1, 1, 1, 1}, Layout::kNHWC, {3.0f});
  const float expected = (3.0f - 1.0f) / std::sqrt(4.0f + 0.0f) * 2.0f + 1.0f;
  CHECK(BatchNorm(three, OneChannel(2, 1, 1, 4, 0)).data()[0] == expected);
  CHECK(expected == 3.0f);

  CHECK_THROWS_AS(BatchNorm(three, OneChannel(1, 0, 0, -1, 0)), Error);
  CHECK_THROWS_AS(BatchNorm(three, BatchNormParams{{1, 1}, {0, 0}, {0, 0}, {1, 1}, 0}), Error);
}

TEST_CASE("FusedBnSign reproduces Sign(BatchNorm(x)) bit for bit") {
  Rng rng(6);
  std::vector<float> probes = {0.0f, -0.0f, std::numeric_limits<float>::denorm_min(),
                               -std::numeric_limits<float>::denorm_min(),
                               std::numeric_limits<float>::infinity(),
                               -std::numeric_limits<float>::infinity(),
                               std::numeric_limits<float>::quiet_NaN(),
                               -std::numeric_limits<float>::quiet_NaN(),
                               std::numeric_limits<float>::max(), std::numeric_limits<float>::lowest(),
                               1e-30f, -1e-30f};
  for (int i = 0; i < 3000; ++i) probes.push_back(testing::RandomFloat(rng, -4.0f, 4.0f));
  for (int i = 0; i < 500; ++i) probes.push_back(std::bit_cast<float>(static_cast<std::uint32_t>(rng())));

  std::vector<BatchNormParams> cases = {
      OneChannel(1, 0, 0, 1, 0),        OneChannel(-1, 0, 0, 1, 0),
      OneChannel(2, 1, 1, 4, 0),        OneChannel(0, 0.5f, 0, 1, 1e-5f),
      OneChannel(0, -0.5f, 0, 1, 0),    OneChannel(0, 0, 0, 1, 0),
      OneChannel(1, -0.0f, 0.25f, 0, 0), OneChannel(-3, 0.1f, -0.2f, 1e-8f, 1e-5f),
      OneChannel(1, 0, 0, 0, 0),        OneChannel(1e30f, 1, 0, 1e-30f, 0),
      OneChannel(1e-30f, 0, 0, 1e30f, 0)};
  for (int i = 0; i < 100; ++i) {
    cases.push_back(OneChannel(testing::RandomFloat(rng, -3, 3), testing::RandomFloat(rng, -2, 2),
                               testing::RandomFloat(rng, -2, 2), testing::RandomFloat(rng, 0, 3),
                               testing::RandomFloat(rng, 0, 1e-3f)));
  }
  for (const BatchNormParams& p : cases) {
    const FusedBnSign fused(p);
    const FloatTensor in(Dims{1, 1, 1, static_cast<std::uint32_t>(probes.size())}, Layout::kNHWC, probes);
    const FloatTensor expected = SignOp(BatchNorm(in, p));
    CHECK(fused.Apply(in) == expected);
    // values next to the analytic zero crossing
    const float denom = std::sqrt(p.variance[0] + p.epsilon);
    if (p.scale[0] == 0.0f || !(denom > 0.0f)) continue;
    const float root = p.mean[0] - p.shift[0] * denom / p.scale[0];
    for (float y : {std::nextafter(root, -INFINITY), root, std::nextafter(root, INFINITY)}) {
      const bool want = std::signbit((y - p.mean[0]) / denom * p.scale[0] + p.shift[0]);
      CHECK(fused.NegativeBit(0, y) == want);
    }
  }
}

TEST_CASE("pooling") {
  const FloatTensor t(Dims{1, 1, 2, 2}, Layout::kNCHW, {1, 2, 3, 4});
  const PoolParams p{2, 2, 2, 2, 0, 0};
  CHECK(MaxPool(t, p).data()[0] == 4.0f);
  CHECK(AvgPool(t, p).data()[0] == 2.5f);
  CHECK(GlobalAvgPool(t).data()[0] == 2.5f);
  CHECK_THROWS_WITH_AS(MaxPool(t, PoolParams{3, 3, 1, 1, 0, 0}),
                       doctest::Contains("pool window larger than padded input"), Error);

  // padded average excludes pad taps
  const FloatTensor avg = AvgPool(t, PoolParams{3, 3, 1, 1, 1, 1});
  CHECK(avg.at(0, 0, 0, 0) == (1.0f + 2.0f + 3.0f + 4.0f) / 4.0f);

  Rng rng(7);
  const FloatTensor r = testing::RandomTensor(rng, Dims{2, 3, 5, 6}, Layout::kNHWC);
  const FloatTensor mx = MaxPool(r, PoolParams{3, 3, 2, 2, 1, 1});
  const FloatTensor av = AvgPool(r, PoolParams{3, 3, 2, 2, 1, 1});
  for (std::uint32_t n = 0; n < 2; ++n)
    for (std::uint32_t c = 0; c < 3; ++c)
      for (std::uint32_t y = 0; y < mx.dims().h; ++y)
        for (std::uint32_t x = 0; x < mx.dims().w; ++x) {
          float best = -INFINITY, sum = 0;
          int taps = 0;
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = static_cast<int>(y) * 2 + ky - 1;
              const int ix = static_cast<int>(x) * 2 + kx - 1;
              if (iy < 0 || ix < 0 || iy >= 5 || ix >= 6) continue;
              const float v = r.at(n, c, iy, ix);
              best = std::max(best, v);
              sum += v;
              ++taps;
            }
          CHECK(mx.at(n, c, y, x) == best);
          CHECK(av.at(n, c, y, x) == sum / static_cast<float>(taps));
        }
}

TEST_CASE("elementwise and dense operators") {
  const FloatTensor t(Dims{1, 2, 1, 1}, Layout::kNHWC, {-2.0f, 3.0f});
  CHECK(Relu(t).data() == std::vector<float>{0.0f, 3.0f});
  CHECK(Add(t, FloatTensor(t.dims(), Layout::kNHWC)) == t);
  CHECK_THROWS_AS(Add(t, FloatTensor(Dims{1, 3, 1, 1}, Layout::kNHWC)), Error);

  Rng rng(8);
  const FloatTensor x = testing::RandomTensor(rng, Dims{2, 7, 1, 1}, Layout::kNHWC);
  const FloatTensor w = testing::RandomTensor(rng, Dims{4, 7, 1, 1}, Layout::kNCHW);
  const std::vector<float> b = {0.5f, -1.0f, 0.0f, 2.0f};
  const FloatTensor y = FullyConnected(x, w, b);
  for (std::uint32_t n = 0; n < 2; ++n)
    for (std::uint32_t o = 0; o < 4; ++o) {
      float acc = 0.0f;
      for (std::uint32_t k = 0; k < 7; ++k) acc += x.at(n, k, 0, 0) * w.at(o, k, 0, 0);
      CHECK(y.at(n, o, 0, 0) == acc + b[o]);
    }
  CHECK_THROWS_AS(FullyConnected(x, testing::RandomTensor(rng, Dims{4, 6, 1, 1}, Layout::kNCHW), {}), Error);

  const FloatTensor img = testing::RandomTensor(rng, Dims{1, 2, 2, 3}, Layout::kNHWC);
  const FloatTensor flat = Flatten(img);
  CHECK(flat.dims() == Dims{1, 12, 1, 1});
  CHECK(flat.at(0, 7, 0, 0) == img.at(0, 1, 0, 1));
}

}  // namespace
}  // namespace xbnn
