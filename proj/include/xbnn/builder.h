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

#ifndef XBNN_BUILDER_H_
#define XBNN_BUILDER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "xbnn/graph.h"

namespace xbnn {

// Appends nodes and initializers to a Graph with generated, unique names.
// Random parameters come from a seeded 64-bit Mersenne Twister mapped to
// floats by bit manipulation, so a seed reproduces identical weights.
class GraphBuilder {
 public:
  GraphBuilder(std::string input_name, Dims input_dims, std::uint64_t seed);

  const Dims& dims_of(const std::string& value) const;

  std::string Sign(const std::string& x);
  std::string BinaryConv(const std::string& x, std::uint32_t out_channels, std::uint32_t kernel,
                         std::uint32_t stride, std::uint32_t pad, std::uint32_t group_bits);
  std::string FloatConv(const std::string& x, std::uint32_t out_channels, std::uint32_t kernel,
                        std::uint32_t stride, std::uint32_t pad, bool bias);
  std::string BatchNorm(const std::string& x);
  std::string Relu(const std::string& x);
  std::string MaxPool(const std::string& x, std::uint32_t kernel, std::uint32_t stride,
                      std::uint32_t pad);
  std::string AvgPool(const std::string& x, std::uint32_t kernel, std::uint32_t stride,
                      std::uint32_t pad);
  std::string GlobalAvgPool(const std::string& x);
  std::string Flatten(const std::string& x);
  std::string FullyConnected(const std::string& x, std::uint32_t out_features);
  std::string Add(const std::string& a, const std::string& b);

  // Uniform in [lo, hi).
  float Uniform(float lo, float hi);
  float RandomSign();

  Graph Finish(const std::string& output);

 private:
  std::string Emit(OpKind op, std::vector<std::string> inputs, std::vector<std::string> weights,
                   Attributes attrs, Dims out_dims);
  std::string AddInitializer(const std::string& stem, Initializer value);

  Graph graph_;
  std::map<std::string, Dims> dims_;
  std::mt19937_64 rng_;
  std::size_t counter_ = 0;
};

// Builds the stem and returns the name of its output value.
using StemFn = std::function<std::string(GraphBuilder&, const std::string& input)>;

struct BiRealOptions {
  std::uint64_t seed = 0;
  std::uint32_t group_bits = 128;
  std::uint32_t input_size = 224;
  std::uint32_t num_classes = 1000;
  // Defaults to 7x7/2 conv, batch norm, relu, 3x3/2 max pool.
  StemFn stem;
};

// ResNet-18 topology where every 3x3 convolution is Sign -> BinaryConv ->
// BatchNorm with its own shortcut add. Downsampling shortcuts use a 2x2
// average pool followed by a 1x1 float convolution and batch norm.
Model BuildBiRealNet18(const BiRealOptions& options);

std::string DefaultStem(GraphBuilder& builder, const std::string& input);

}  // namespace xbnn

#endif  // XBNN_BUILDER_H_
