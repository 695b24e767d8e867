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

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "support/oracles.h"
#include "xbnn/bitpack.h"
#include "xbnn/error.h"
#include "xbnn/kernels.h"

namespace xbnn {
namespace {

using testing::BitsMatchSigns;
using testing::Rng;

TEST_CASE("BinarizeBit reads the raw sign bit") {
  CHECK(BinarizeBit(-1.5f));
  CHECK_FALSE(BinarizeBit(0.0f));
  CHECK(BinarizeBit(-0.0f));
  CHECK_FALSE(BinarizeBit(3.0f));
  CHECK(BinarizeBit(-std::numeric_limits<float>::quiet_NaN()));
  CHECK_FALSE(BinarizeBit(std::numeric_limits<float>::quiet_NaN()));
  CHECK(BinarizeBit(-std::numeric_limits<float>::infinity()));
}

TEST_CASE("PackNaive on a mixed slice") {
  const std::vector<float> v = {-1.5f, 0.25f, -0.0f, 3.0f, -2.0f, 0.0f, -7.0f, 1.0f};
  const PackedBits p = PackNaive(v);
  CHECK(BitsMatchSigns(p, v));
  CHECK(p.logical_len == 8);
  REQUIRE(p.words.size() == 1);
  // bit i set where the element's sign bit is set: elements 0, 2, 4, 6
  std::uint64_t expected = 0;
  for (std::size_t i = 0; i < v.size(); ++i) expected |= std::uint64_t{std::signbit(v[i])} << i;
  CHECK(p.words[0] == expected);
  CHECK((p.words[0] & 0xFF) == 0x55);
  CHECK(PackSignBits(v) == p);
}

TEST_CASE("empty and all-negative slices") {
  const PackedBits empty = PackNaive({});
  CHECK(empty.words.empty());
  CHECK(empty.logical_len == 0);
  CHECK(PackSignBits({}) == empty);

  const std::vector<float> neg(64, -1.0f);
  const PackedBits p = PackNaive(neg);
  REQUIRE(p.words.size() == 1);
  CHECK(p.words[0] == 0xFFFFFFFFFFFFFFFFull);
  CHECK(PackSignBits(neg) == p);
}

TEST_CASE("PackSignBits matches PackNaive on random slices") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = trial < 130 ? static_cast<std::size_t>(trial) : rng() % 700;
    const std::vector<float> v = testing::RandomSlice(rng, len, true);
    const PackedBits naive = PackNaive(v);
    const PackedBits gathered = PackSignBits(v);
    CHECK(BitsMatchSigns(naive, v));
    CHECK(gathered == naive);
  }
}

TEST_CASE("128 random floats pack identically") {
  Rng rng(5);
  const std::vector<float> v = testing::RandomSlice(rng, 128, false);
  CHECK(PackSignBits(v) == PackNaive(v));
}

TEST_CASE("negatively signed NaN packs to 1") {
  std::vector<float> v(70, 1.0f);
  v[65] = -std::numeric_limits<float>::quiet_NaN();
  CHECK(PackSignBits(v).bit(65));
  CHECK(PackNaive(v).bit(65));
}

TEST_CASE("Unpack maps bits to +-1") {
  PackedBits p{{0x01}, 2};
  CHECK(Unpack(p) == std::vector<std::int8_t>{-1, 1});
  CHECK(Unpack(PackedBits{}).empty());

  Rng rng(3);
  const std::vector<float> v = testing::RandomSlice(rng, 333, true);
  const std::vector<std::int8_t> u = Unpack(PackNaive(v));
  REQUIRE(u.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(u[i] == (std::signbit(v[i]) ? -1 : 1));
}

TEST_CASE("xnor, cnt and addv primitives") {
  // width 4: 0b1100 xnor 0b1010
  const PackedBits a{{0b1100}, 4};
  const PackedBits b{{0b1010}, 4};
  std::uint64_t expected = 0;
  for (int i = 0; i < 4; ++i) {
    const bool x = (0b1100 >> i) & 1;
    const bool y = (0b1010 >> i) & 1;
    expected |= std::uint64_t{x == y} << i;
  }
  CHECK(XnorVec(a, b).words[0] == expected);
  CHECK(XnorVec(a, b).words[0] == 0b1001);
  CHECK(XnorVec(a, a).words[0] == 0b1111);
  CHECK(XnorVec(a, PackedBits{{0b0011}, 4}).words[0] == 0);
  CHECK_THROWS_AS(XnorVec(a, PackedBits{{0}, 8}), Error);

  const PackedBits bytes{{0x0F00FFull}, 24};
  CHECK(CntBytes(bytes) == std::vector<std::uint8_t>{8, 0, 4});
  CHECK(CntBytes(PackedBits{{0, 0}, 128}) == std::vector<std::uint8_t>(16, 0));

  const std::vector<std::uint8_t> small = {3, 1, 4, 1};
  CHECK(Addv(small) == 9);
  const std::vector<std::uint8_t> eights(16, 8);
  CHECK(Addv(eights) == 128);

  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 8 * (1 + rng() % 40);
    PackedBits v{std::vector<BitWord>(WordsForBits(len)), len};
    for (std::size_t i = 0; i < len; ++i) v.words[i / 64] |= BitWord{rng() & 1} << (i % 64);
    const std::vector<std::uint8_t> counts = CntBytes(v);
    REQUIRE(counts.size() == len / 8);
    std::uint64_t sum = 0;
    for (std::size_t byte = 0; byte < counts.size(); ++byte) {
      int expect = 0;
      for (int bit = 0; bit < 8; ++bit) expect += v.bit(byte * 8 + bit);
      CHECK(counts[byte] == expect);
      sum += counts[byte];
    }
    CHECK(Addv(counts) == sum);
    CHECK(Addv(counts) == testing::PopcountOracle(v));
  }
}

}  // namespace
}  // namespace xbnn
