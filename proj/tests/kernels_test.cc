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

#include <algorithm>

#include "doctest.h"
#include "support/oracles.h"
#include "xbnn/error.h"
#include "xbnn/kernels.h"
#include "xbnn/layout.h"

namespace xbnn {
namespace {

using testing::Rng;

BinMatrix RandomMatrix(Rng& rng, std::size_t rows, std::size_t cols, std::uint32_t vec_bits) {
  BinMatrix m(rows, cols, vec_bits);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t w = 0; w < m.vec_words(); ++w) m.vec(r, c)[w] = rng() & VecWordMask(vec_bits, w);
  return m;
}

TEST_CASE("Bgemm small cases") {
  BinMatrix a(1, 1, 8), b(1, 1, 8);
  a.vec(0, 0)[0] = 0xF0;
  b.vec(0, 0)[0] = 0xF0;
  CHECK(Bgemm(a, b).at(0, 0) == 8);

  BinMatrix a2(1, 2, 8), b2(2, 1, 8);
  a2.vec(0, 0)[0] = 0xF0;
  a2.vec(0, 1)[0] = 0xAA;
  b2.vec(0, 0)[0] = 0xF0;
  b2.vec(1, 0)[0] = 0x55;
  const MatchMatrix c = Bgemm(a2, b2);
  CHECK(c.data == testing::BgemmOracle(a2, b2));
  CHECK(c.at(0, 0) == 8);
}

TEST_CASE("Bgemm equals the per-bit oracle") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t bits = 8 * (1 + static_cast<std::uint32_t>(rng() % 24));
    const std::size_t m = 1 + rng() % 4, k = 1 + rng() % 4, n = 1 + rng() % 4;
    const BinMatrix a = RandomMatrix(rng, m, k, bits);
    const BinMatrix b = RandomMatrix(rng, k, n, bits);
    const MatchMatrix c = Bgemm(a, b);
    CHECK(c.rows == m);
    CHECK(c.cols == n);
    CHECK(c.data == testing::BgemmOracle(a, b));
    for (std::uint32_t v : c.data) CHECK(v <= k * bits);
  }
}

TEST_CASE("Bgemm entry depends only on its row and column") {
  Rng rng(8);
  BinMatrix a = RandomMatrix(rng, 3, 4, 64);
  BinMatrix b = RandomMatrix(rng, 4, 3, 64);
  const MatchMatrix before = Bgemm(a, b);
  a.vec(2, 1)[0] = ~a.vec(2, 1)[0];
  b.vec(3, 2)[0] = ~b.vec(3, 2)[0];
  const MatchMatrix after = Bgemm(a, b);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(after.at(i, j) == before.at(i, j));
}

TEST_CASE("Bgemm shape errors and the no-addv variant shape") {
  BinMatrix a(2, 3, 64), b(4, 4, 64), c(3, 4, 128);
  CHECK_THROWS_AS(Bgemm(a, b), Error);
  CHECK_THROWS_AS(Bgemm(a, c), Error);
  const MatchMatrix no_addv = BgemmNoAddv(a, BinMatrix(3, 4, 64));
  CHECK(no_addv.rows == 2);
  CHECK(no_addv.cols == 4);
  CHECK(no_addv.data.size() == 8);
  CHECK_THROWS_AS(BgemmNoAddv(a, b), Error);
}

TEST_CASE("Im2ColPacked 1x1 is a reshape of the input groups") {
  Rng rng(1);
  const FloatTensor t = testing::RandomTensor(rng, Dims{1, 20, 3, 4}, Layout::kNHWC);
  const PackedTensor p = PackToNC1HWC2(t, 16);
  const ConvParams params{1, 1, 1, 1, 0, 0, 20};
  const BinMatrix m = Im2ColPacked(p, params);
  CHECK(m.rows() == 2);   // K = C1
  CHECK(m.cols() == 12);  // N = H * W
  for (std::uint32_t g = 0; g < 2; ++g)
    for (std::uint32_t pos = 0; pos < 12; ++pos) {
      const PackedIndex idx = IndexNC1HWC2(t.dims(), 16, 0, g * 16, pos / 4, pos % 4);
      CHECK(m.vec(g, pos)[0] == p.group(idx.group_offset)[0]);
    }
}

TEST_CASE("Im2ColPacked full window and padded corner") {
  FloatTensor t(Dims{1, 8, 3, 3}, Layout::kNHWC);
  std::fill(t.data().begin(), t.data().end(), -1.0f);
  const PackedTensor p = PackToNC1HWC2(t, 8);

  const BinMatrix full = Im2ColPacked(p, ConvParams{3, 3, 1, 1, 0, 0, 8});
  CHECK(full.cols() == 1);
  CHECK(full.rows() == 9);
  for (std::size_t k = 0; k < 9; ++k) CHECK(full.vec(k, 0)[0] == 0xFF);

  const BinMatrix padded = Im2ColPacked(p, ConvParams{3, 3, 1, 1, 1, 1, 8});
  CHECK(padded.cols() == 9);
  std::size_t pad_vectors = 0;
  for (std::size_t k = 0; k < 9; ++k) pad_vectors += padded.vec(k, 0)[0] == 0;
  CHECK(pad_vectors == 5);

  CHECK_THROWS_WITH_AS(Im2ColPacked(p, ConvParams{5, 5, 1, 1, 0, 0, 8}),
                       doctest::Contains("kernel larger than padded input"), Error);
}

TEST_CASE("direct convolution on constant inputs") {
  const ConvParams params{1, 1, 1, 1, 0, 0, 8};
  PackedTensor input(Dims{1, 8, 1, 1}, 8);
  BinMatrix weights(1, 1, 8);
  MatchMatrix m = DirectConvMatches(input, weights, params);
  CHECK(m.at(0, 0) == 8);
  CHECK(BinaryDirectConv(input, weights, params).data()[0] == 8.0f);

  weights.vec(0, 0)[0] = 0xFF;
  m = DirectConvMatches(input, weights, params);
  CHECK(m.at(0, 0) == 0);
  CHECK(BinaryDirectConv(input, weights, params).data()[0] == -8.0f);
}

TEST_CASE("MatchToDot correction") {
  CHECK(MatchToDot(5, ConvParams{1, 1, 1, 1, 0, 0, 8}, 8) == 2);

  // six valid channels, all +1: two pad bits also match
  const ConvParams six{1, 1, 1, 1, 0, 0, 6};
  FloatTensor ones(Dims{1, 6, 1, 1}, Layout::kNHWC);
  std::fill(ones.data().begin(), ones.data().end(), 1.0f);
  FloatTensor w(Dims{1, 6, 1, 1}, Layout::kNCHW);
  std::fill(w.data().begin(), w.data().end(), 1.0f);
  const std::int64_t expected = testing::BinaryConvOracle(ones, w, six).data[0];
  const MatchMatrix raw = DirectConvMatches(PackToNC1HWC2(ones, 8), PackFilters(w, 8), six);
  CHECK(raw.at(0, 0) == 8);
  CHECK(MatchToDot(raw.at(0, 0), six, 8) == expected);
  CHECK(expected == 6);

  const ConvParams p{3, 3, 1, 1, 0, 0, 130};
  const std::int64_t k_valid = 9 * 130;
  const std::int64_t pad = 9 * (256 - 130);
  CHECK(MatchToDot(k_valid + pad, p, 128) == k_valid);
  CHECK(MatchToDot(pad, p, 128) == -k_valid);
}

TEST_CASE("direct convolution equals the integer oracle") {
  Rng rng(12);
  for (std::uint32_t c : {8u, 16u, 130u}) {
    for (std::uint32_t pad : {0u, 1u}) {
      for (std::uint32_t c2 : {8u, 64u, 128u}) {
        const Dims d{2, c, 5, 6};
        const FloatTensor in = testing::RandomTensor(rng, d, Layout::kNHWC);
        const FloatTensor w = testing::RandomSignTensor(rng, Dims{5, c, 3, 3}, Layout::kNCHW);
        const ConvParams params{3, 3, 1, 1, pad, pad, c};
        const FloatTensor out = BinaryDirectConv(PackToNC1HWC2(in, c2), PackFilters(w, c2), params);
        const testing::IntTensor oracle = testing::BinaryConvOracle(in, w, params);
        REQUIRE(out.dims() == oracle.dims);
        bool same = true;
        for (std::uint32_t n = 0; n < d.n; ++n)
          for (std::uint32_t m = 0; m < 5; ++m)
            for (std::uint32_t y = 0; y < oracle.dims.h; ++y)
              for (std::uint32_t x = 0; x < oracle.dims.w; ++x)
                same &= out.at(n, m, y, x) == static_cast<float>(oracle.at(n, m, y, x));
        CHECK(same);
      }
    }
  }
}

TEST_CASE("direct convolution equals bgemm over im2col") {
  Rng rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const std::uint32_t c2 = 8u << (rng() % 5);
    const std::uint32_t c = 1 + static_cast<std::uint32_t>(rng() % 160);
    const std::uint32_t k = rng() % 2 ? 3 : 1;
    const std::uint32_t s = 1 + static_cast<std::uint32_t>(rng() % 2);
    const std::uint32_t pad = k == 3 ? static_cast<std::uint32_t>(rng() % 2) : 0;
    const std::uint32_t h = 3 + static_cast<std::uint32_t>(rng() % 6);
    const std::uint32_t w = 3 + static_cast<std::uint32_t>(rng() % 6);
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng() % 9);
    const ConvParams params{k, k, s, s, pad, pad, c};
    const PackedTensor in = PackToNC1HWC2(testing::RandomTensor(rng, Dims{1, c, h, w}, Layout::kNHWC), c2);
    const BinMatrix filt = PackFilters(testing::RandomSignTensor(rng, Dims{m, c, k, k}, Layout::kNCHW), c2);
    const MatchMatrix direct = DirectConvMatches(in, filt, params);
    const MatchMatrix gemm = Bgemm(filt, Im2ColPacked(in, params));
    CHECK(direct.data == gemm.data);
  }
}

TEST_CASE("lane capacity is enforced") {
  // 1x1 kernel over 8192 groups of 64 bits: one accumulation too many
  const std::uint32_t c = 64 * 8192;
  FloatTensor in(Dims{1, c, 1, 1}, Layout::kNHWC);
  FloatTensor w(Dims{1, c, 1, 1}, Layout::kNCHW);
  const ConvParams params{1, 1, 1, 1, 0, 0, c};
  CHECK_THROWS_WITH_AS(DirectConvMatches(PackToNC1HWC2(in, 64), PackFilters(w, 64), params),
                       doctest::Contains("reduction overflow"), Error);

  // 8191 groups is the largest allowed count and stays exact
  const std::uint32_t ok = 64 * 8191;
  FloatTensor in2(Dims{1, ok, 1, 1}, Layout::kNHWC);
  FloatTensor w2(Dims{1, ok, 1, 1}, Layout::kNCHW);
  const MatchMatrix m = DirectConvMatches(PackToNC1HWC2(in2, 64), PackFilters(w2, 64),
                                          ConvParams{1, 1, 1, 1, 0, 0, ok});
  CHECK(m.at(0, 0) == ok);
}

TEST_CASE("ConvParams validation") {
  CHECK_THROWS_AS(ConvParams({0, 1, 1, 1, 0, 0, 1}).Validate(), Error);
  CHECK_THROWS_AS(ConvParams({1, 1, 0, 1, 0, 0, 1}).Validate(), Error);
  CHECK(ConvParams({3, 3, 2, 2, 1, 1, 4}).OutputHeight(7) == 4);
}

}  // namespace
}  // namespace xbnn
