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

#include "xbnn/layout.h"

#include <algorithm>

#include "xbnn/bitpack.h"
#include "xbnn/error.h"

namespace xbnn {

PackedIndex IndexNC1HWC2(const Dims& dims, std::uint32_t group_bits, std::uint32_t n,
                         std::uint32_t c, std::uint32_t h, std::uint32_t w) {
  ValidateGroupBits(group_bits);
  Check(n < dims.n && c < dims.c && h < dims.h && w < dims.w, ErrorCode::kIndexOutOfBounds,
        "index out of bounds");
  const std::size_t groups = (dims.c + group_bits - 1) / group_bits;
  PackedIndex index;
  index.group_offset = ((static_cast<std::size_t>(n) * groups + c / group_bits) * dims.h + h) *
                           dims.w +
                       w;
  index.bit_offset = c % group_bits;
  return index;
}

FloatTensor ConvertLayout(const FloatTensor& tensor, Layout target) {
  if (tensor.layout() == target) return tensor;
  const Dims& d = tensor.dims();
  FloatTensor out(d, target);
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t h = 0; h < d.h; ++h)
        for (std::uint32_t w = 0; w < d.w; ++w) out.at(n, c, h, w) = tensor.at(n, c, h, w);
  return out;
}

PackedTensor PackToNC1HWC2(const FloatTensor& tensor, std::uint32_t group_bits) {
  const Dims& d = tensor.dims();
  PackedTensor out(d, group_bits);
  const std::size_t wpg = out.words_per_group();

  if (tensor.layout() == Layout::kNHWC) {
    // Each pixel's channels are contiguous: pack one C2 slice at a time.
    for (std::uint32_t n = 0; n < d.n; ++n)
      for (std::uint32_t h = 0; h < d.h; ++h)
        for (std::uint32_t w = 0; w < d.w; ++w) {
          const float* pixel = tensor.data().data() + tensor.Offset(n, 0, h, w);
          for (std::uint32_t g = 0; g < out.groups(); ++g) {
            const std::uint32_t first = g * group_bits;
            const std::uint32_t len = std::min(group_bits, d.c - first);
            const PackedBits bits = PackSignBits({pixel + first, len});
            BitWord* dst = out.group(IndexNC1HWC2(d, group_bits, n, first, h, w).group_offset);
            for (std::size_t i = 0; i < bits.words.size() && i < wpg; ++i) dst[i] = bits.words[i];
          }
        }
    return out;
  }

  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t h = 0; h < d.h; ++h)
        for (std::uint32_t w = 0; w < d.w; ++w) {
          if (!BinarizeBit(tensor.at(n, c, h, w))) continue;
          const PackedIndex idx = IndexNC1HWC2(d, group_bits, n, c, h, w);
          out.group(idx.group_offset)[idx.bit_offset / kWordBits] |= BitWord{1}
                                                                     << (idx.bit_offset % kWordBits);
        }
  return out;
}

FloatTensor UnpackFromNC1HWC2(const PackedTensor& packed) {
  const Dims& d = packed.dims();
  FloatTensor out(d, Layout::kNHWC);
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t h = 0; h < d.h; ++h)
        for (std::uint32_t w = 0; w < d.w; ++w) {
          const PackedIndex idx = IndexNC1HWC2(d, packed.group_bits(), n, c, h, w);
          const BitWord word = packed.group(idx.group_offset)[idx.bit_offset / kWordBits];
          out.at(n, c, h, w) = ((word >> (idx.bit_offset % kWordBits)) & 1u) ? -1.0f : 1.0f;
        }
  return out;
}

std::vector<std::size_t> WindowGroupOffsets(const Dims& dims, std::uint32_t group_bits,
                                            std::uint32_t n, std::uint32_t group, std::uint32_t y,
                                            std::uint32_t x, std::uint32_t kernel_h,
                                            std::uint32_t kernel_w) {
  std::vector<std::size_t> offsets;
  offsets.reserve(static_cast<std::size_t>(kernel_h) * kernel_w);
  for (std::uint32_t ky = 0; ky < kernel_h; ++ky)
    for (std::uint32_t kx = 0; kx < kernel_w; ++kx)
      offsets.push_back(
          IndexNC1HWC2(dims, group_bits, n, group * group_bits, y + ky, x + kx).group_offset);
  return offsets;
}

}  // namespace xbnn
