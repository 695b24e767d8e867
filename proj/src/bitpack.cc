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

#include "xbnn/bitpack.h"

#include <array>
#include <cstring>

namespace xbnn {
namespace {

constexpr std::uint64_t kLaneRepeat = 0x0000000100000001ull;

// Per 32-bit lane: keep the top k bits of `high`, fill the remaining bits
// with `low` shifted right by k. Bits that cross lanes land in the kept
// region and are discarded.
inline std::uint64_t ShiftRightInsert(std::uint64_t high, std::uint64_t low, unsigned k) {
  const std::uint64_t fill = (0xFFFFFFFFull >> k) * kLaneRepeat;
  return (high & ~fill) | ((low >> k) & fill);
}

// Packs 64 raw float bit patterns into one word. Lane 0 of r[j] carries
// element j and lane 1 carries element 32 + j, so after five insert levels
// lane 0 holds elements 0..31 and lane 1 holds elements 32..63, both in
// little-endian bit order. Every insert within a level is independent of
// the others.
inline BitWord GatherWord(const std::uint32_t* raw) {
  std::array<std::uint64_t, 32> r;
  for (std::size_t j = 0; j < 32; ++j) {
    r[j] = static_cast<std::uint64_t>(raw[j]) | (static_cast<std::uint64_t>(raw[32 + j]) << 32);
  }
  std::size_t live = 32;
  for (unsigned k = 1; live > 1; k <<= 1, live >>= 1) {
    for (std::size_t i = 0; i < live / 2; i += 4) {
      // Four independent chains per step.
      r[i] = ShiftRightInsert(r[2 * i + 1], r[2 * i], k);
      if (i + 1 < live / 2) r[i + 1] = ShiftRightInsert(r[2 * i + 3], r[2 * i + 2], k);
      if (i + 2 < live / 2) r[i + 2] = ShiftRightInsert(r[2 * i + 5], r[2 * i + 4], k);
      if (i + 3 < live / 2) r[i + 3] = ShiftRightInsert(r[2 * i + 7], r[2 * i + 6], k);
    }
  }
  return r[0];
}

}  // namespace

PackedBits PackNaive(std::span<const float> values) {
  PackedBits out;
  out.logical_len = values.size();
  out.words.assign(WordsForBits(values.size()), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.words[i / kWordBits] |= static_cast<BitWord>(BinarizeBit(values[i])) << (i % kWordBits);
  }
  return out;
}

PackedBits PackSignBits(std::span<const float> values) {
  PackedBits out;
  out.logical_len = values.size();
  out.words.resize(WordsForBits(values.size()));

  std::array<std::uint32_t, kWordBits> raw;
  const std::size_t full = values.size() / kWordBits;
  for (std::size_t w = 0; w < full; ++w) {
    std::memcpy(raw.data(), values.data() + w * kWordBits, sizeof(raw));
    out.words[w] = GatherWord(raw.data());
  }
  const std::size_t tail = values.size() - full * kWordBits;
  if (tail != 0) {
    // Zero bit patterns in the tail keep the padding bits at 0.
    raw.fill(0);
    std::memcpy(raw.data(), values.data() + full * kWordBits, tail * sizeof(float));
    out.words[full] = GatherWord(raw.data());
  }
  return out;
}

std::vector<std::int8_t> Unpack(const PackedBits& packed) {
  std::vector<std::int8_t> out(packed.logical_len);
  for (std::size_t i = 0; i < packed.logical_len; ++i) {
    out[i] = packed.bit(i) ? -1 : 1;
  }
  return out;
}

}  // namespace xbnn
