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

#ifndef XBNN_CONVERT_H_
#define XBNN_CONVERT_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xbnn/graph.h"
#include "xbnn/tensor.h"

namespace xbnn {

// JSON carrier for a graph built from ONNX operators:
//   {"inputs": [{"name", "dims"}], "initializers": [{"name", "dims", "values"}],
//    "nodes": [{"name", "op", "inputs", "outputs", "attributes"}], "output": name}
// Attributes are numbers or arrays of numbers.
struct InterchangeInput {
  std::string name;
  std::vector<std::uint32_t> dims;
};

struct InterchangeTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

struct InterchangeNode {
  std::string name;
  std::string op;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::vector<double>> attributes;

  // Integer attribute list, or `fallback` when absent.
  std::vector<std::int64_t> Ints(const std::string& key, std::vector<std::int64_t> fallback) const;
  double Number(const std::string& key, double fallback) const;
};

struct InterchangeGraph {
  std::vector<InterchangeInput> inputs;
  std::vector<InterchangeTensor> initializers;
  std::vector<InterchangeNode> nodes;
  std::string output;

  const InterchangeTensor* FindInitializer(const std::string& name) const;
};

// Errors name the JSON path of the offending element.
InterchangeGraph ParseInterchange(std::string_view text);
std::string SerializeInterchange(const InterchangeGraph& graph);

// Conv nodes whose data input comes from a Sign node and whose weight
// initializer holds only exact +/-1.0 values.
std::set<std::string> DetectBinaryConvs(const InterchangeGraph& graph);

struct ConvertOptions {
  std::uint32_t group_bits = 128;
  bool fuse_bn_sign = false;
};

struct InitializerReport {
  std::string name;
  std::uint64_t bytes_before = 0;
  std::uint64_t bytes_after = 0;
};

struct ConversionReport {
  std::vector<InitializerReport> initializers;
  double ratio = 1.0;
  std::vector<std::string> warnings;

  std::string ToJson() const;
};

struct Conversion {
  Model model;
  ConversionReport report;
};

Conversion ConvertModel(const InterchangeGraph& graph, const ConvertOptions& options = {});

// Evaluates the interchange graph directly with float operators. Detected
// binary convolutions use OracleBinaryConv (+1 spatial padding).
FloatTensor ReferenceEvaluate(const InterchangeGraph& graph, const FloatTensor& input);

// Inverse mapping: packed filters are expanded back to +/-1 Conv weights.
InterchangeGraph ExportInterchange(const Model& model);

}  // namespace xbnn

#endif  // XBNN_CONVERT_H_
