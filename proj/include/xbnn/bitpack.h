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

#ifndef XBNN_BITPACK_H_
#define XBNN_BITPACK_H_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace xbnn {

using BitWord = std::uint64_t;

inline constexpr std::size_t kWordBits = 64;

inline constexpr std::size_t WordsForBits(std::size_t bits) {
  return (bits + kWordBits - 1) / kWordBits;
}

// Binarized elements packed little-endian: element i lives in bit (i % 64) of
// words[i / 64]. Bits at positions >= logical_len are always 0.
struct PackedBits {
  std::vector<BitWord> words;
  std::size_t logical_len = 0;

  bool bit(std::size_t i) const { return (words[i / kWordBits] >> (i % kWordBits)) & 1u; }

  friend bool operator==(const PackedBits&, const PackedBits&) = default;
};

// Raw IEEE-754 sign bit. 1 encodes -1 and 0 encodes +1, so -0.0 and
// negatively signed NaN map to 1.
inline bool BinarizeBit(float x) {
  return (std::bit_cast<std::uint32_t>(x) >> 31) != 0;
}

// Baseline: one element per step.
PackedBits PackNaive(std::span<const float> values);

// Gathers 64 sign bits per word with a shift-right-and-insert tree over
// 32-bit lanes. Output is bit-identical to PackNaive.
PackedBits PackSignBits(std::span<const float> values);

// Element i is -1 when bit i is set, +1 otherwise.
std::vector<std::int8_t> Unpack(const PackedBits& packed);

}  // namespace xbnn

#endif  // XBNN_BITPACK_H_
