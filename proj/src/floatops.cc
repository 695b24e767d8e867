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

#include "xbnn/floatops.h"

#include <algorithm>
#include <bit>
#include <limits>

#include "xbnn/error.h"
#include "xbnn/layout.h"

namespace xbnn {
namespace {

FloatTensor ToNHWC(const FloatTensor& t) { return ConvertLayout(t, Layout::kNHWC); }

std::uint32_t PoolExtent(std::uint32_t in, std::uint32_t kernel, std::uint32_t stride,
                         std::uint32_t pad) {
  Check(kernel >= 1 && stride >= 1, ErrorCode::kInvalidArgument,
        "pool window and stride must be >= 1");
  Check(pad < kernel, ErrorCode::kInvalidArgument, "pool padding must be smaller than the window");
  Check(in + 2 * pad >= kernel, ErrorCode::kShapeMismatch,
        "pool window larger than padded input");
  return (in + 2 * pad - kernel) / stride + 1;
}

// Total order over non-NaN floats, -0 immediately below +0.
std::uint64_t OrderKey(float x) {
  const std::uint32_t u = std::bit_cast<std::uint32_t>(x);
  return (u >> 31) ? static_cast<std::uint32_t>(~u) : (u | 0x80000000u);
}

float FromOrderKey(std::uint64_t key) {
  const auto k = static_cast<std::uint32_t>(key);
  const std::uint32_t u = (k & 0x80000000u) ? (k & 0x7FFFFFFFu) : ~k;
  return std::bit_cast<float>(u);
}

template <typename Pred>
std::uint64_t FirstTrueKey(Pred pred) {
  std::uint64_t lo = OrderKey(-std::numeric_limits<float>::infinity());
  std::uint64_t hi = OrderKey(std::numeric_limits<float>::infinity()) + 1;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace

FloatTensor Conv2dF32(const FloatTensor& input, const FloatTensor& weights,
                      std::span<const float> bias, const ConvParams& params) {
  params.Validate();
  const FloatTensor in = ToNHWC(input);
  const Dims& d = in.dims();
  const Dims& wd = weights.dims();
  Check(wd.c == d.c, ErrorCode::kShapeMismatch,
        "conv weights expect " + std::to_string(wd.c) + " input channels, got " +
            std::to_string(d.c));
  Check(wd.h == params.kernel_h && wd.w == params.kernel_w, ErrorCode::kShapeMismatch,
        "conv weight extents " + wd.ToString() + " disagree with the kernel size");
  Check(bias.empty() || bias.size() == wd.n, ErrorCode::kShapeMismatch,
        "conv bias length " + std::to_string(bias.size()) + " != output channels " +
            std::to_string(wd.n));
  const std::uint32_t out_h = params.OutputHeight(d.h);
  const std::uint32_t out_w = params.OutputWidth(d.w);
  FloatTensor out(Dims{d.n, wd.n, out_h, out_w}, Layout::kNHWC);

  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t oy = 0; oy < out_h; ++oy)
      for (std::uint32_t ox = 0; ox < out_w; ++ox)
        for (std::uint32_t m = 0; m < wd.n; ++m) {
          float acc = 0.0f;
          for (std::uint32_t c = 0; c < d.c; ++c)
            for (std::uint32_t kx = 0; kx < params.kernel_w; ++kx) {
              const std::int64_t ix =
                  static_cast<std::int64_t>(ox) * params.stride_w + kx - params.pad_w;
              if (ix < 0 || ix >= d.w) continue;
              for (std::uint32_t ky = 0; ky < params.kernel_h; ++ky) {
                const std::int64_t iy =
                    static_cast<std::int64_t>(oy) * params.stride_h + ky - params.pad_h;
                if (iy < 0 || iy >= d.h) continue;
                acc += in.at(n, c, static_cast<std::uint32_t>(iy), static_cast<std::uint32_t>(ix)) *
                       weights.at(m, c, ky, kx);
              }
            }
          if (!bias.empty()) acc = acc + bias[m];
          out.at(n, m, oy, ox) = acc;
        }
  return out;
}

FloatTensor OracleBinaryConv(const FloatTensor& input, const FloatTensor& weights,
                             const ConvParams& params) {
  const FloatTensor in = SignOp(input);
  const Dims& d = in.dims();
  FloatTensor padded(Dims{d.n, d.c, d.h + 2 * params.pad_h, d.w + 2 * params.pad_w},
                     Layout::kNHWC);
  std::fill(padded.data().begin(), padded.data().end(), 1.0f);
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t h = 0; h < d.h; ++h)
        for (std::uint32_t w = 0; w < d.w; ++w)
          padded.at(n, c, h + params.pad_h, w + params.pad_w) = in.at(n, c, h, w);

  FloatTensor signed_weights = weights;
  for (float& v : signed_weights.data()) v = BinarizeBit(v) ? -1.0f : 1.0f;

  ConvParams unpadded = params;
  unpadded.pad_h = 0;
  unpadded.pad_w = 0;
  return Conv2dF32(padded, signed_weights, {}, unpadded);
}

FloatTensor SignOp(const FloatTensor& input) {
  FloatTensor out = ToNHWC(input);
  for (float& v : out.data()) v = BinarizeBit(v) ? -1.0f : 1.0f;
  return out;
}

void BatchNormParams::Validate(std::uint32_t channels) const {
  Check(scale.size() == channels && shift.size() == channels && mean.size() == channels &&
            variance.size() == channels,
        ErrorCode::kShapeMismatch,
        "batch norm parameters must have " + std::to_string(channels) + " entries");
  for (float v : variance) {
    Check(!(v < 0.0f), ErrorCode::kInvalidArgument, "batch norm variance must be non-negative");
  }
  Check(!(epsilon < 0.0f), ErrorCode::kInvalidArgument, "batch norm epsilon must be non-negative");
}

FloatTensor BatchNorm(const FloatTensor& input, const BatchNormParams& params) {
  FloatTensor out = ToNHWC(input);
  const std::uint32_t channels = out.dims().c;
  params.Validate(channels);
  std::vector<float> denom(channels);
  for (std::uint32_t c = 0; c < channels; ++c) {
    denom[c] = BatchNormDenominator(params.variance[c], params.epsilon);
  }
  std::vector<float>& data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t c = i % channels;
    data[i] = BatchNormValue(data[i], params.mean[c], denom[c], params.scale[c], params.shift[c]);
  }
  return out;
}

FusedBnSign::FusedBnSign(BatchNormParams params) : params_(std::move(params)) {
  const auto channels = static_cast<std::uint32_t>(params_.scale.size());
  params_.Validate(channels);
  channels_.resize(channels);
  for (std::uint32_t c = 0; c < channels; ++c) {
    Channel& ch = channels_[c];
    ch.denom = BatchNormDenominator(params_.variance[c], params_.epsilon);
    const float scale = params_.scale[c];
    const bool degenerate = !(ch.denom > 0.0f) || !std::isfinite(ch.denom) ||
                            !std::isfinite(scale) || scale == 0.0f ||
                            !std::isfinite(params_.mean[c]) || !std::isfinite(params_.shift[c]);
    if (degenerate) {
      ch.mode = Mode::kDirect;
      continue;
    }
    // Both zeros take the value of the smallest positive subnormal, which
    // keeps the predicate monotone over the key order.
    const auto negative_at = [&](std::uint64_t key) {
      float x = FromOrderKey(key);
      if (x == 0.0f) x = std::numeric_limits<float>::denorm_min();
      return BinarizeBit(
          BatchNormValue(x, params_.mean[c], ch.denom, scale, params_.shift[c]));
    };
    if (scale > 0.0f) {
      ch.mode = Mode::kBelowCut;
      ch.cut = FirstTrueKey([&](std::uint64_t k) { return !negative_at(k); });
    } else {
      ch.mode = Mode::kAtOrAboveCut;
      ch.cut = FirstTrueKey(negative_at);
    }
  }
}

bool FusedBnSign::NegativeBit(std::uint32_t channel, float x) const {
  const Channel& ch = channels_[channel];
  if (ch.mode == Mode::kDirect || x == 0.0f || std::isnan(x)) {
    return BinarizeBit(BatchNormValue(x, params_.mean[channel], ch.denom, params_.scale[channel],
                                      params_.shift[channel]));
  }
  const std::uint64_t key = OrderKey(x);
  return ch.mode == Mode::kBelowCut ? key < ch.cut : key >= ch.cut;
}

FloatTensor FusedBnSign::Apply(const FloatTensor& input) const {
  FloatTensor out = ToNHWC(input);
  const std::uint32_t channels = out.dims().c;
  Check(channels == channels_.size(), ErrorCode::kShapeMismatch,
        "fused batch norm expects " + std::to_string(channels_.size()) + " channels, got " +
            std::to_string(channels));
  std::vector<float>& data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = NegativeBit(static_cast<std::uint32_t>(i % channels), data[i]) ? -1.0f : 1.0f;
  }
  return out;
}

FloatTensor MaxPool(const FloatTensor& input, const PoolParams& params) {
  const FloatTensor in = ToNHWC(input);
  const Dims& d = in.dims();
  const std::uint32_t out_h = PoolExtent(d.h, params.kernel_h, params.stride_h, params.pad_h);
  const std::uint32_t out_w = PoolExtent(d.w, params.kernel_w, params.stride_w, params.pad_w);
  FloatTensor out(Dims{d.n, d.c, out_h, out_w}, Layout::kNHWC);
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t oy = 0; oy < out_h; ++oy)
      for (std::uint32_t ox = 0; ox < out_w; ++ox)
        for (std::uint32_t c = 0; c < d.c; ++c) {
          float best = -std::numeric_limits<float>::infinity();
          for (std::uint32_t ky = 0; ky < params.kernel_h; ++ky)
            for (std::uint32_t kx = 0; kx < params.kernel_w; ++kx) {
              const std::int64_t iy =
                  static_cast<std::int64_t>(oy) * params.stride_h + ky - params.pad_h;
              const std::int64_t ix =
                  static_cast<std::int64_t>(ox) * params.stride_w + kx - params.pad_w;
              if (iy < 0 || ix < 0 || iy >= d.h || ix >= d.w) continue;
              best = std::max(best, in.at(n, c, static_cast<std::uint32_t>(iy),
                                          static_cast<std::uint32_t>(ix)));
            }
          out.at(n, c, oy, ox) = best;
        }
  return out;
}

FloatTensor AvgPool(const FloatTensor& input, const PoolParams& params) {
  const FloatTensor in = ToNHWC(input);
  const Dims& d = in.dims();
  const std::uint32_t out_h = PoolExtent(d.h, params.kernel_h, params.stride_h, params.pad_h);
  const std::uint32_t out_w = PoolExtent(d.w, params.kernel_w, params.stride_w, params.pad_w);
  FloatTensor out(Dims{d.n, d.c, out_h, out_w}, Layout::kNHWC);
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t oy = 0; oy < out_h; ++oy)
      for (std::uint32_t ox = 0; ox < out_w; ++ox)
        for (std::uint32_t c = 0; c < d.c; ++c) {
          float sum = 0.0f;
          std::uint32_t taps = 0;
          for (std::uint32_t ky = 0; ky < params.kernel_h; ++ky)
            for (std::uint32_t kx = 0; kx < params.kernel_w; ++kx) {
              const std::int64_t iy =
                  static_cast<std::int64_t>(oy) * params.stride_h + ky - params.pad_h;
              const std::int64_t ix =
                  static_cast<std::int64_t>(ox) * params.stride_w + kx - params.pad_w;
              if (iy < 0 || ix < 0 || iy >= d.h || ix >= d.w) continue;
              sum += in.at(n, c, static_cast<std::uint32_t>(iy), static_cast<std::uint32_t>(ix));
              ++taps;
            }
          out.at(n, c, oy, ox) = sum / static_cast<float>(taps);
        }
  return out;
}

FloatTensor GlobalAvgPool(const FloatTensor& input) {
  const FloatTensor in = ToNHWC(input);
  const Dims& d = in.dims();
  Check(d.h * d.w > 0, ErrorCode::kShapeMismatch, "global pool over an empty plane");
  FloatTensor out(Dims{d.n, d.c, 1, 1}, Layout::kNHWC);
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t c = 0; c < d.c; ++c) {
      float sum = 0.0f;
      for (std::uint32_t h = 0; h < d.h; ++h)
        for (std::uint32_t w = 0; w < d.w; ++w) sum += in.at(n, c, h, w);
      out.at(n, c, 0, 0) = sum / static_cast<float>(d.h * d.w);
    }
  return out;
}

FloatTensor Relu(const FloatTensor& input) {
  FloatTensor out = ToNHWC(input);
  for (float& v : out.data()) v = v > 0.0f ? v : 0.0f;
  return out;
}

FloatTensor Add(const FloatTensor& a, const FloatTensor& b) {
  Check(a.dims() == b.dims(), ErrorCode::kShapeMismatch,
        "add operands differ: " + a.dims().ToString() + " vs " + b.dims().ToString());
  FloatTensor out = ToNHWC(a);
  const FloatTensor rhs = ToNHWC(b);
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += rhs.data()[i];
  return out;
}

FloatTensor AddBias(const FloatTensor& input, std::span<const float> bias) {
  FloatTensor out = ToNHWC(input);
  const std::uint32_t channels = out.dims().c;
  Check(bias.size() == channels, ErrorCode::kShapeMismatch,
        "bias length " + std::to_string(bias.size()) + " != channels " + std::to_string(channels));
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    out.data()[i] = out.data()[i] + bias[i % channels];
  }
  return out;
}

FloatTensor Flatten(const FloatTensor& input) {
  const FloatTensor nchw = ConvertLayout(input, Layout::kNCHW);
  const Dims& d = nchw.dims();
  return FloatTensor(Dims{d.n, d.c * d.h * d.w, 1, 1}, Layout::kNHWC, nchw.data());
}

FloatTensor FullyConnected(const FloatTensor& input, const FloatTensor& weights,
                           std::span<const float> bias) {
  const Dims& d = input.dims();
  const Dims& wd = weights.dims();
  Check(d.h == 1 && d.w == 1, ErrorCode::kShapeMismatch,
        "fully connected input must be flattened, got " + d.ToString());
  Check(wd.c == d.c && wd.h == 1 && wd.w == 1, ErrorCode::kShapeMismatch,
        "fully connected weights " + wd.ToString() + " do not match input " + d.ToString());
  Check(bias.empty() || bias.size() == wd.n, ErrorCode::kShapeMismatch,
        "fully connected bias length mismatch");
  FloatTensor out(Dims{d.n, wd.n, 1, 1}, Layout::kNHWC);
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t o = 0; o < wd.n; ++o) {
      float acc = 0.0f;
      for (std::uint32_t k = 0; k < d.c; ++k) acc += input.at(n, k, 0, 0) * weights.at(o, k, 0, 0);
      if (!bias.empty()) acc = acc + bias[o];
      out.at(n, o, 0, 0) = acc;
    }
  return out;
}

}  // namespace xbnn
