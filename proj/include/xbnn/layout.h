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

#ifndef XBNN_LAYOUT_H_
#define XBNN_LAYOUT_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xbnn/tensor.h"

namespace xbnn {

inline constexpr std::uint32_t kDefaultGroupBits = 128;

struct PackedIndex {
  std::size_t group_offset = 0;
  std::uint32_t bit_offset = 0;

  friend bool operator==(const PackedIndex&, const PackedIndex&) = default;
};

// group_offset = ((n * C1 + c / C2) * H + h) * W + w, bit_offset = c % C2.
PackedIndex IndexNC1HWC2(const Dims& dims, std::uint32_t group_bits, std::uint32_t n,
                         std::uint32_t c, std::uint32_t h, std::uint32_t w);

FloatTensor ConvertLayout(const FloatTensor& tensor, Layout target);

PackedTensor PackToNC1HWC2(const FloatTensor& tensor, std::uint32_t group_bits = kDefaultGroupBits);

// Returns an NHWC tensor of +/-1 values.
FloatTensor UnpackFromNC1HWC2(const PackedTensor& packed);

// Group offsets touched by a kh x kw window whose top-left corner sits at
// (y, x) in channel group `group` of image n. Used to reason about how many
// loads adjacent windows share.
std::vector<std::size_t> WindowGroupOffsets(const Dims& dims, std::uint32_t group_bits,
                                            std::uint32_t n, std::uint32_t group, std::uint32_t y,
                                            std::uint32_t x, std::uint32_t kernel_h,
                                            std::uint32_t kernel_w);

}  // namespace xbnn

#endif  // XBNN_LAYOUT_H_
