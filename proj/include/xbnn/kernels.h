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

#ifndef XBNN_KERNELS_H_
#define XBNN_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xbnn/bitpack.h"
#include "xbnn/tensor.h"

namespace xbnn {

// Matrix whose elements are bit-packed vectors of `vec_bits` significant
// bits, each stored in `vec_words()` words (row-major). vec_bits is a
// multiple of 8; bits past vec_bits are 0.
class BinMatrix {
 public:
  BinMatrix() = default;
  BinMatrix(std::size_t rows, std::size_t cols, std::uint32_t vec_bits);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint32_t vec_bits() const { return vec_bits_; }
  std::size_t vec_words() const { return WordsForBits(vec_bits_); }

  const BitWord* vec(std::size_t row, std::size_t col) const {
    return data_.data() + (row * cols_ + col) * vec_words();
  }
  BitWord* vec(std::size_t row, std::size_t col) {
    return data_.data() + (row * cols_ + col) * vec_words();
  }

  const std::vector<BitWord>& data() const { return data_; }
  std::vector<BitWord>& data() { return data_; }

  friend bool operator==(const BinMatrix&, const BinMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::uint32_t vec_bits_ = 0;
  std::vector<BitWord> data_;
};

struct MatchMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> data;

  std::uint32_t at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct ConvParams {
  std::uint32_t kernel_h = 1;
  std::uint32_t kernel_w = 1;
  std::uint32_t stride_h = 1;
  std::uint32_t stride_w = 1;
  std::uint32_t pad_h = 0;
  std::uint32_t pad_w = 0;
  std::uint32_t channels = 0;  // logical input channels

  void Validate() const;
  std::uint32_t OutputHeight(std::uint32_t in_h) const;
  std::uint32_t OutputWidth(std::uint32_t in_w) const;
};

// Largest number of word-sized cnt results one dot product may accumulate
// before a 16-bit lane can wrap (8 * 8191 <= 65535).
inline constexpr std::size_t kMaxLaneAccumulations = 8191;

// --- Instruction-level primitives -----------------------------------------

// Bitwise NOT(a XOR b) over logical_len bits; padding bits stay 0.
PackedBits XnorVec(const PackedBits& a, const PackedBits& b);

// Per-byte population count. logical_len must be a multiple of 8.
std::vector<std::uint8_t> CntBytes(const PackedBits& v);

std::uint64_t Addv(std::span<const std::uint8_t> bytes);

// Word-level forms used by the kernels.
inline BitWord CntWord(BitWord v) {
  v = v - ((v >> 1) & 0x5555555555555555ull);
  v = (v & 0x3333333333333333ull) + ((v >> 2) & 0x3333333333333333ull);
  return (v + (v >> 4)) & 0x0F0F0F0F0F0F0F0Full;
}
inline std::uint32_t AddvWord(BitWord byte_counts) {
  return static_cast<std::uint32_t>((byte_counts * 0x0101010101010101ull) >> 56);
}
// Mask of the significant bits in word `index` of a vec_bits-wide vector.
inline BitWord VecWordMask(std::uint32_t vec_bits, std::size_t index) {
  const std::size_t used = vec_bits - index * kWordBits;
  return used >= kWordBits ? ~BitWord{0} : ((BitWord{1} << used) - 1);
}

// --- Matrix and convolution kernels ---------------------------------------

// C[i][j] = sum_k popcount(xnor(A[i][k], B[k][j])), evaluated as k-outermost
// rank-1 updates with the byte reduction applied inside every update.
MatchMatrix Bgemm(const BinMatrix& a, const BinMatrix& b);

// Bgemm with the byte reduction removed. Only the output shape is meaningful;
// it exists to time the cost of the reduction.
MatchMatrix BgemmNoAddv(const BinMatrix& a, const BinMatrix& b);

// K x N matrix for a single image: column j holds the kernel_h * kernel_w * C1
// group vectors of output position j in (ky, kx, group) order. Positions
// outside the image contribute all-zero vectors (logical +1).
BinMatrix Im2ColPacked(const PackedTensor& input, const ConvParams& params);

// Packs OIHW float filters into an M x K matrix whose row order matches the
// Im2ColPacked column order.
BinMatrix PackFilters(const FloatTensor& weights, std::uint32_t group_bits);

// Raw xnor match counts (M x OH*OW) for image n, accumulated per byte lane
// into 16-bit lanes and reduced once per dot product.
MatchMatrix DirectConvMatches(const PackedTensor& input, const BinMatrix& weights,
                              const ConvParams& params, std::uint32_t n = 0);

// Signed dot products, NHWC with c = weights.rows().
FloatTensor BinaryDirectConv(const PackedTensor& input, const BinMatrix& weights,
                             const ConvParams& params);

// 2 * (match - P) - K_valid, with P the channel-pad bit count of one dot
// product and K_valid = kernel_h * kernel_w * channels.
std::int64_t MatchToDot(std::int64_t match, const ConvParams& params, std::uint32_t group_bits);

// Reshapes an M x (OH*OW) match matrix into a signed NHWC tensor.
FloatTensor MatchesToTensor(const MatchMatrix& matches, const ConvParams& params,
                            std::uint32_t group_bits, std::uint32_t out_h, std::uint32_t out_w);

}  // namespace xbnn

#endif  // XBNN_KERNELS_H_
