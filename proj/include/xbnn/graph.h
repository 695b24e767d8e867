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

#ifndef XBNN_GRAPH_H_
#define XBNN_GRAPH_H_

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "xbnn/kernels.h"
#include "xbnn/tensor.h"

namespace xbnn {

// Values are part of the model file format.
enum class OpKind : std::uint8_t {
  kSign = 0,
  kBinaryConv = 1,
  kFloatConv = 2,
  kBatchNorm = 3,
  kRelu = 4,
  kMaxPool = 5,
  kAvgPool = 6,
  kGlobalAvgPool = 7,
  kAdd = 8,
  kFullyConnected = 9,
  kFlatten = 10,
  kBnSign = 11,
};

inline constexpr std::uint8_t kMaxOpKind = 11;

const char* OpKindName(OpKind op);

struct Attributes {
  std::array<std::uint32_t, 2> kernel{1, 1};
  std::array<std::uint32_t, 2> stride{1, 1};
  std::array<std::uint32_t, 2> pad{0, 0};
  float epsilon = 1e-5f;

  friend bool operator==(const Attributes&, const Attributes&) = default;
};

// Weight references per op:
//   BinaryConv      packed filter, optional bias
//   FloatConv       OIHW filter, optional bias
//   FullyConnected  (out, in, 1, 1) matrix, optional bias
//   BatchNorm/BnSign  scale, shift, mean, variance
struct Node {
  OpKind op = OpKind::kSign;
  std::string name;
  std::vector<std::string> inputs;
  std::string output;
  std::vector<std::string> weights;
  Attributes attrs;

  friend bool operator==(const Node&, const Node&) = default;
};

// Binary convolution filters packed as an M x (kh * kw * C1) BinMatrix in
// im2col column order.
struct PackedFilter {
  std::uint32_t out_channels = 0;
  std::uint32_t in_channels = 0;
  std::uint32_t kernel_h = 0;
  std::uint32_t kernel_w = 0;
  BinMatrix matrix;

  std::uint32_t group_bits() const { return matrix.vec_bits(); }
  std::uint32_t groups() const { return (in_channels + group_bits() - 1) / group_bits(); }
  // Serialized payload size: C2 / 8 bytes per channel group.
  std::uint64_t PayloadBytes() const {
    return static_cast<std::uint64_t>(out_channels) * kernel_h * kernel_w * groups() *
           (group_bits() / 8);
  }

  friend bool operator==(const PackedFilter&, const PackedFilter&) = default;
};

PackedFilter MakePackedFilter(const FloatTensor& oihw, std::uint32_t group_bits);

using Initializer = std::variant<FloatTensor, PackedFilter>;

struct NamedInitializer {
  std::string name;
  Initializer value;

  friend bool operator==(const NamedInitializer&, const NamedInitializer&) = default;
};

struct Graph {
  std::string input_name;
  Dims input_dims;
  std::vector<Node> nodes;
  std::vector<NamedInitializer> initializers;
  std::string output;

  const Initializer* FindInitializer(const std::string& name) const;

  // Checks name resolution, node order, weight kinds and attribute shapes.
  void Validate() const;

  friend bool operator==(const Graph&, const Graph&) = default;
};

inline constexpr std::uint32_t kFormatVersion = 1;

struct Model {
  std::uint32_t version = kFormatVersion;
  Graph graph;

  friend bool operator==(const Model&, const Model&) = default;
};

// Runs the graph in node order. Errors carry the failing node's name.
FloatTensor Execute(const Model& model, const FloatTensor& input);

}  // namespace xbnn

#endif  // XBNN_GRAPH_H_
