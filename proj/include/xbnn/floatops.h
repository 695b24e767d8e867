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

#ifndef XBNN_FLOATOPS_H_
#define XBNN_FLOATOPS_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "xbnn/kernels.h"
#include "xbnn/tensor.h"

namespace xbnn {

// All operators accept either layout and return NHWC.

// Cross-correlation with zero padding. `weights` holds OIHW filters; `bias`
// may be empty. Accumulation runs channel-outermost, then kernel column,
// then kernel row, and the bias is added to the finished sum.
FloatTensor Conv2dF32(const FloatTensor& input, const FloatTensor& weights,
                      std::span<const float> bias, const ConvParams& params);

// Ground truth for the binary kernels: +/-1 input and weights, +1.0 padding.
FloatTensor OracleBinaryConv(const FloatTensor& input, const FloatTensor& weights,
                             const ConvParams& params);

FloatTensor SignOp(const FloatTensor& input);

struct BatchNormParams {
  std::vector<float> scale;
  std::vector<float> shift;
  std::vector<float> mean;
  std::vector<float> variance;
  float epsilon = 1e-5f;

  void Validate(std::uint32_t channels) const;
};

inline float BatchNormDenominator(float variance, float epsilon) {
  return std::sqrt(variance + epsilon);
}
inline float BatchNormValue(float x, float mean, float denom, float scale, float shift) {
  return (x - mean) / denom * scale + shift;
}

FloatTensor BatchNorm(const FloatTensor& input, const BatchNormParams& params);

// Sign(BatchNorm(x)) as a per-channel comparison against a precomputed
// threshold. The batch-norm expression is monotone in x, so a single cut
// point on the float ordering reproduces the unfused bits exactly; zeros,
// NaN and degenerate channels fall back to evaluating the expression.
class FusedBnSign {
 public:
  explicit FusedBnSign(BatchNormParams params);

  FloatTensor Apply(const FloatTensor& input) const;
  bool NegativeBit(std::uint32_t channel, float x) const;

  const BatchNormParams& params() const { return params_; }

 private:
  enum class Mode : std::uint8_t { kDirect, kBelowCut, kAtOrAboveCut };
  struct Channel {
    Mode mode = Mode::kDirect;
    std::uint64_t cut = 0;  // key in the total order of non-NaN floats
    float denom = 1.0f;
  };

  BatchNormParams params_;
  std::vector<Channel> channels_;
};

struct PoolParams {
  std::uint32_t kernel_h = 1;
  std::uint32_t kernel_w = 1;
  std::uint32_t stride_h = 1;
  std::uint32_t stride_w = 1;
  std::uint32_t pad_h = 0;
  std::uint32_t pad_w = 0;
};

// Padding never wins the max.
FloatTensor MaxPool(const FloatTensor& input, const PoolParams& params);
// Divides by the number of in-image taps (padding excluded).
FloatTensor AvgPool(const FloatTensor& input, const PoolParams& params);
FloatTensor GlobalAvgPool(const FloatTensor& input);

FloatTensor Relu(const FloatTensor& input);
FloatTensor Add(const FloatTensor& a, const FloatTensor& b);
FloatTensor AddBias(const FloatTensor& input, std::span<const float> bias);

// (n, c, h, w) -> (n, c*h*w, 1, 1), flattening in NCHW order.
FloatTensor Flatten(const FloatTensor& input);

// input (n, k, 1, 1), weights (out, k, 1, 1) row-major, optional bias.
FloatTensor FullyConnected(const FloatTensor& input, const FloatTensor& weights,
                           std::span<const float> bias);

}  // namespace xbnn

#endif  // XBNN_FLOATOPS_H_
