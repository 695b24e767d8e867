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

#include "xbnn/kernels.h"

#include <algorithm>
#include <array>

#include "xbnn/error.h"
#include "xbnn/layout.h"

namespace xbnn {
namespace {

constexpr BitWord kEvenBytes = 0x00FF00FF00FF00FFull;
constexpr std::size_t kChannelBlock = 4;

inline std::uint32_t SumU16Lanes(std::uint64_t lanes) {
  return static_cast<std::uint32_t>((lanes & 0xFFFF) + ((lanes >> 16) & 0xFFFF) +
                                    ((lanes >> 32) & 0xFFFF) + (lanes >> 48));
}

void CheckBgemmShapes(const BinMatrix& a, const BinMatrix& b) {
  Check(a.cols() == b.rows(), ErrorCode::kShapeMismatch,
        "bgemm: A has " + std::to_string(a.cols()) + " columns but B has " +
            std::to_string(b.rows()) + " rows");
  Check(a.vec_bits() == b.vec_bits(), ErrorCode::kShapeMismatch,
        "bgemm: vector widths differ (" + std::to_string(a.vec_bits()) + " vs " +
            std::to_string(b.vec_bits()) + ")");
}

}  // namespace

BinMatrix::BinMatrix(std::size_t rows, std::size_t cols, std::uint32_t vec_bits)
    : rows_(rows), cols_(cols), vec_bits_(vec_bits) {
  ValidateGroupBits(vec_bits);
  data_.assign(rows * cols * vec_words(), 0);
}

void ConvParams::Validate() const {
  Check(kernel_h >= 1 && kernel_w >= 1 && stride_h >= 1 && stride_w >= 1,
        ErrorCode::kInvalidArgument, "kernel and stride extents must be >= 1");
}

std::uint32_t ConvParams::OutputHeight(std::uint32_t in_h) const {
  Check(in_h + 2 * pad_h >= kernel_h, ErrorCode::kShapeMismatch,
        "kernel larger than padded input");
  return (in_h + 2 * pad_h - kernel_h) / stride_h + 1;
}

std::uint32_t ConvParams::OutputWidth(std::uint32_t in_w) const {
  Check(in_w + 2 * pad_w >= kernel_w, ErrorCode::kShapeMismatch,
        "kernel larger than padded input");
  return (in_w + 2 * pad_w - kernel_w) / stride_w + 1;
}

PackedBits XnorVec(const PackedBits& a, const PackedBits& b) {
  Check(a.logical_len == b.logical_len, ErrorCode::kShapeMismatch,
        "xnor: width mismatch " + std::to_string(a.logical_len) + " vs " +
            std::to_string(b.logical_len));
  PackedBits out;
  out.logical_len = a.logical_len;
  out.words.resize(a.words.size());
  for (std::size_t i = 0; i < out.words.size(); ++i) {
    const std::size_t used = a.logical_len - i * kWordBits;
    const BitWord mask = used >= kWordBits ? ~BitWord{0} : ((BitWord{1} << used) - 1);
    out.words[i] = ~(a.words[i] ^ b.words[i]) & mask;
  }
  return out;
}

std::vector<std::uint8_t> CntBytes(const PackedBits& v) {
  Check(v.logical_len % 8 == 0, ErrorCode::kInvalidArgument,
        "cnt: width must be a multiple of 8");
  std::vector<std::uint8_t> out(v.logical_len / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const BitWord counts = CntWord(v.words[i / 8]);
    out[i] = static_cast<std::uint8_t>((counts >> (8 * (i % 8))) & 0xFF);
  }
  return out;
}

std::uint64_t Addv(std::span<const std::uint8_t> bytes) {
  std::uint64_t sum = 0;
  for (std::uint8_t b : bytes) sum += b;
  return sum;
}

MatchMatrix Bgemm(const BinMatrix& a, const BinMatrix& b) {
  CheckBgemmShapes(a, b);
  MatchMatrix c{a.rows(), b.cols(), std::vector<std::uint32_t>(a.rows() * b.cols(), 0)};
  const std::size_t words = a.vec_words();
  for (std::size_t k = 0; k < a.cols(); ++k) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const BitWord* m = a.vec(i, k);
      std::uint32_t* row = c.data.data() + i * c.cols;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        const BitWord* n = b.vec(k, j);
        for (std::size_t w = 0; w < words; ++w) {
          const BitWord x = ~(m[w] ^ n[w]) & VecWordMask(a.vec_bits(), w);
          row[j] += AddvWord(CntWord(x));
        }
      }
    }
  }
  return c;
}

MatchMatrix BgemmNoAddv(const BinMatrix& a, const BinMatrix& b) {
  CheckBgemmShapes(a, b);
  MatchMatrix c{a.rows(), b.cols(), std::vector<std::uint32_t>(a.rows() * b.cols(), 0)};
  const std::size_t words = a.vec_words();
  for (std::size_t k = 0; k < a.cols(); ++k) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const BitWord* m = a.vec(i, k);
      std::uint32_t* row = c.data.data() + i * c.cols;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        const BitWord* n = b.vec(k, j);
        for (std::size_t w = 0; w < words; ++w) {
          const BitWord x = ~(m[w] ^ n[w]) & VecWordMask(a.vec_bits(), w);
          row[j] += static_cast<std::uint32_t>(CntWord(x));
        }
      }
    }
  }
  return c;
}

BinMatrix Im2ColPacked(const PackedTensor& input, const ConvParams& params) {
  params.Validate();
  const Dims& d = input.dims();
  Check(d.n == 1, ErrorCode::kShapeMismatch, "im2col expects a single image");
  const std::uint32_t out_h = params.OutputHeight(d.h);
  const std::uint32_t out_w = params.OutputWidth(d.w);
  const std::uint32_t groups = input.groups();
  const std::size_t wpg = input.words_per_group();

  BinMatrix cols(static_cast<std::size_t>(params.kernel_h) * params.kernel_w * groups,
                 static_cast<std::size_t>(out_h) * out_w, input.group_bits());
  for (std::uint32_t oy = 0; oy < out_h; ++oy)
    for (std::uint32_t ox = 0; ox < out_w; ++ox) {
      const std::size_t j = static_cast<std::size_t>(oy) * out_w + ox;
      for (std::uint32_t ky = 0; ky < params.kernel_h; ++ky)
        for (std::uint32_t kx = 0; kx < params.kernel_w; ++kx) {
          const std::int64_t iy = static_cast<std::int64_t>(oy) * params.stride_h + ky - params.pad_h;
          const std::int64_t ix = static_cast<std::int64_t>(ox) * params.stride_w + kx - params.pad_w;
          if (iy < 0 || ix < 0 || iy >= d.h || ix >= d.w) continue;  // stays all-zero
          for (std::uint32_t g = 0; g < groups; ++g) {
            const std::size_t k = (static_cast<std::size_t>(ky) * params.kernel_w + kx) * groups + g;
            const BitWord* src = input.group((static_cast<std::size_t>(g) * d.h + iy) * d.w + ix);
            std::copy(src, src + wpg, cols.vec(k, j));
          }
        }
    }
  return cols;
}

BinMatrix PackFilters(const FloatTensor& weights, std::uint32_t group_bits) {
  ValidateGroupBits(group_bits);
  const Dims& d = weights.dims();
  const std::uint32_t groups = (d.c + group_bits - 1) / group_bits;
  BinMatrix out(d.n, static_cast<std::size_t>(d.h) * d.w * groups, group_bits);
  for (std::uint32_t m = 0; m < d.n; ++m)
    for (std::uint32_t ky = 0; ky < d.h; ++ky)
      for (std::uint32_t kx = 0; kx < d.w; ++kx)
        for (std::uint32_t ch = 0; ch < d.c; ++ch) {
          if (!BinarizeBit(weights.at(m, ch, ky, kx))) continue;
          const std::size_t k = (static_cast<std::size_t>(ky) * d.w + kx) * groups + ch / group_bits;
          const std::uint32_t bit = ch % group_bits;
          out.vec(m, k)[bit / kWordBits] |= BitWord{1} << (bit % kWordBits);
        }
  return out;
}

MatchMatrix DirectConvMatches(const PackedTensor& input, const BinMatrix& weights,
                              const ConvParams& params, std::uint32_t n) {
  params.Validate();
  const Dims& d = input.dims();
  const std::uint32_t groups = input.groups();
  const std::uint32_t group_bits = input.group_bits();
  Check(n < d.n, ErrorCode::kIndexOutOfBounds, "image index out of bounds");
  Check(params.channels == d.c, ErrorCode::kShapeMismatch,
        "conv expects " + std::to_string(params.channels) + " input channels, got " +
            std::to_string(d.c));
  Check(weights.vec_bits() == group_bits, ErrorCode::kShapeMismatch,
        "weight vector width " + std::to_string(weights.vec_bits()) +
            " does not match input group width " + std::to_string(group_bits));
  const std::size_t depth = static_cast<std::size_t>(params.kernel_h) * params.kernel_w * groups;
  Check(weights.cols() == depth, ErrorCode::kShapeMismatch,
        "weight matrix has " + std::to_string(weights.cols()) + " columns, expected " +
            std::to_string(depth));
  const std::size_t wpg = input.words_per_group();
  Check(depth * wpg <= kMaxLaneAccumulations, ErrorCode::kReductionOverflow,
        "reduction overflow: " + std::to_string(depth * wpg) +
            " lane accumulations exceed capacity " + std::to_string(kMaxLaneAccumulations));

  const std::uint32_t out_h = params.OutputHeight(d.h);
  const std::uint32_t out_w = params.OutputWidth(d.w);
  const std::size_t out_channels = weights.rows();
  MatchMatrix out{out_channels, static_cast<std::size_t>(out_h) * out_w, {}};
  out.data.assign(out.rows * out.cols, 0);

  std::vector<BitWord> masks(wpg);
  for (std::size_t w = 0; w < wpg; ++w) masks[w] = VecWordMask(group_bits, w);
  const std::vector<BitWord> pad_group(wpg, 0);
  const std::size_t image_base = static_cast<std::size_t>(n) * groups;

  for (std::size_t m0 = 0; m0 < out_channels; m0 += kChannelBlock) {
    const std::size_t block = std::min(kChannelBlock, out_channels - m0);
    for (std::uint32_t oy = 0; oy < out_h; ++oy)
      for (std::uint32_t ox = 0; ox < out_w; ++ox) {
        std::array<std::uint64_t, kChannelBlock> even{};
        std::array<std::uint64_t, kChannelBlock> odd{};
        for (std::uint32_t ky = 0; ky < params.kernel_h; ++ky) {
          const std::int64_t iy = static_cast<std::int64_t>(oy) * params.stride_h + ky - params.pad_h;
          for (std::uint32_t kx = 0; kx < params.kernel_w; ++kx) {
            const std::int64_t ix =
                static_cast<std::int64_t>(ox) * params.stride_w + kx - params.pad_w;
            const bool inside = iy >= 0 && ix >= 0 && iy < d.h && ix < d.w;
            const std::size_t k0 = (static_cast<std::size_t>(ky) * params.kernel_w + kx) * groups;
            for (std::uint32_t g = 0; g < groups; ++g) {
              const BitWord* in =
                  inside ? input.group(((image_base + g) * d.h + iy) * d.w + ix) : pad_group.data();
              for (std::size_t w = 0; w < wpg; ++w) {
                const BitWord x = in[w];
                for (std::size_t b = 0; b < block; ++b) {
                  const BitWord counts = CntWord(~(x ^ weights.vec(m0 + b, k0 + g)[w]) & masks[w]);
                  even[b] += counts & kEvenBytes;
                  odd[b] += (counts >> 8) & kEvenBytes;
                }
              }
            }
          }
        }
        const std::size_t j = static_cast<std::size_t>(oy) * out_w + ox;
        for (std::size_t b = 0; b < block; ++b) {
          out.data[(m0 + b) * out.cols + j] = SumU16Lanes(even[b]) + SumU16Lanes(odd[b]);
        }
      }
  }
  return out;
}

std::int64_t MatchToDot(std::int64_t match, const ConvParams& params, std::uint32_t group_bits) {
  const std::int64_t taps = static_cast<std::int64_t>(params.kernel_h) * params.kernel_w;
  const std::int64_t groups = (params.channels + group_bits - 1) / group_bits;
  const std::int64_t pad_bits = taps * (groups * group_bits - params.channels);
  const std::int64_t valid = taps * params.channels;
  return 2 * (match - pad_bits) - valid;
}

FloatTensor MatchesToTensor(const MatchMatrix& matches, const ConvParams& params,
                            std::uint32_t group_bits, std::uint32_t out_h, std::uint32_t out_w) {
  Check(matches.cols == static_cast<std::size_t>(out_h) * out_w, ErrorCode::kShapeMismatch,
        "match matrix does not cover the output plane");
  FloatTensor out(Dims{1, static_cast<std::uint32_t>(matches.rows), out_h, out_w}, Layout::kNHWC);
  for (std::size_t m = 0; m < matches.rows; ++m)
    for (std::uint32_t oy = 0; oy < out_h; ++oy)
      for (std::uint32_t ox = 0; ox < out_w; ++ox) {
        const std::size_t j = static_cast<std::size_t>(oy) * out_w + ox;
        out.at(0, static_cast<std::uint32_t>(m), oy, ox) =
            static_cast<float>(MatchToDot(matches.at(m, j), params, group_bits));
      }
  return out;
}

FloatTensor BinaryDirectConv(const PackedTensor& input, const BinMatrix& weights,
                             const ConvParams& params) {
  const Dims& d = input.dims();
  const std::uint32_t out_h = params.OutputHeight(d.h);
  const std::uint32_t out_w = params.OutputWidth(d.w);
  FloatTensor out(Dims{d.n, static_cast<std::uint32_t>(weights.rows()), out_h, out_w},
                  Layout::kNHWC);
  for (std::uint32_t n = 0; n < d.n; ++n) {
    const MatchMatrix matches = DirectConvMatches(input, weights, params, n);
    for (std::size_t m = 0; m < matches.rows; ++m)
      for (std::uint32_t oy = 0; oy < out_h; ++oy)
        for (std::uint32_t ox = 0; ox < out_w; ++ox) {
          const std::size_t j = static_cast<std::size_t>(oy) * out_w + ox;
          out.at(n, static_cast<std::uint32_t>(m), oy, ox) =
              static_cast<float>(MatchToDot(matches.at(m, j), params, input.group_bits()));
        }
  }
  return out;
}

}  // namespace xbnn
