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

#ifndef XBNN_TESTS_SUPPORT_RANDOM_GRAPH_H_
#define XBNN_TESTS_SUPPORT_RANDOM_GRAPH_H_

#include <cstdint>
#include <set>
#include <string>

#include "json.hpp"
#include "xbnn/tensor.h"

namespace xbnn::testing {

// Single-input interchange document mixing Sign, Conv (binary and float),
// BatchNormalization, Relu, pools, residual Add and a Gemm head.
nlohmann::json RandomInterchangeGraph(std::uint64_t seed);

Dims InputDims(const nlohmann::json& doc);

// Names of Conv nodes fed by a Sign node whose weights are all exactly +-1.
std::set<std::string> BinaryConvNodes(const nlohmann::json& doc);

// Node-by-node evaluation with plain loops over NCHW data. Binary Conv nodes
// use integer xnor arithmetic with +1 spatial padding; everything else
// follows the float operator definitions in the same evaluation order as
// the engine. Returns an NCHW tensor.
FloatTensor EvaluateOracle(const nlohmann::json& doc, const FloatTensor& input);

}  // namespace xbnn::testing

#endif  // XBNN_TESTS_SUPPORT_RANDOM_GRAPH_H_
