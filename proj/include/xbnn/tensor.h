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

#ifndef XBNN_TENSOR_H_
#define XBNN_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "xbnn/bitpack.h"

namespace xbnn {

enum class Layout : std::uint8_t { kNCHW = 0, kNHWC = 1 };

// Logical extents, always in (n, c, h, w) order regardless of storage layout.
struct Dims {
  std::uint32_t n = 0;
  std::uint32_t c = 0;
  std::uint32_t h = 0;
  std::uint32_t w = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::string ToString() const;

  friend bool operator==(const Dims&, const Dims&) = default;
};

class FloatTensor {
 public:
  FloatTensor() = default;
  FloatTensor(Dims dims, Layout layout);
  FloatTensor(Dims dims, Layout layout, std::vector<float> data);

  const Dims& dims() const { return dims_; }
  Layout layout() const { return layout_; }
  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  std::size_t Offset(std::uint32_t n, std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
    if (layout_ == Layout::kNCHW) {
      return ((static_cast<std::size_t>(n) * dims_.c + c) * dims_.h + h) * dims_.w + w;
    }
    return ((static_cast<std::size_t>(n) * dims_.h + h) * dims_.w + w) * dims_.c + c;
  }
  float at(std::uint32_t n, std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
    return data_[Offset(n, c, h, w)];
  }
  float& at(std::uint32_t n, std::uint32_t c, std::uint32_t h, std::uint32_t w) {
    return data_[Offset(n, c, h, w)];
  }

  friend bool operator==(const FloatTensor&, const FloatTensor&) = default;

 private:
  Dims dims_;
  Layout layout_ = Layout::kNCHW;
  std::vector<float> data_;
};

// Binary tensor in NC1HWC2 order. Each group of `group_bits` channels at one
// (n, c1, h, w) position occupies `words_per_group()` consecutive words; bit j
// of a group is channel c1 * group_bits + j. Bits past the logical channel
// count (and past group_bits inside the last word) are 0.
class PackedTensor {
 public:
  PackedTensor() = default;
  PackedTensor(Dims dims, std::uint32_t group_bits);

  const Dims& dims() const { return dims_; }
  std::uint32_t group_bits() const { return group_bits_; }
  std::uint32_t groups() const { return groups_; }
  std::size_t words_per_group() const { return WordsForBits(group_bits_); }
  std::size_t group_count() const {
    return static_cast<std::size_t>(dims_.n) * groups_ * dims_.h * dims_.w;
  }

  const std::vector<BitWord>& data() const { return data_; }
  std::vector<BitWord>& data() { return data_; }

  const BitWord* group(std::size_t group_offset) const {
    return data_.data() + group_offset * words_per_group();
  }
  BitWord* group(std::size_t group_offset) {
    return data_.data() + group_offset * words_per_group();
  }

  friend bool operator==(const PackedTensor&, const PackedTensor&) = default;

 private:
  Dims dims_;
  std::uint32_t group_bits_ = 0;
  std::uint32_t groups_ = 0;
  std::vector<BitWord> data_;
};

void ValidateGroupBits(std::uint32_t group_bits);

}  // namespace xbnn

#endif  // XBNN_TENSOR_H_
