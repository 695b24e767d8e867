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

#include "xbnn/convert.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"
#include "xbnn/error.h"
#include "xbnn/floatops.h"
#include "xbnn/layout.h"

namespace xbnn {
namespace {

using nlohmann::json;

struct OpArity {
  std::size_t min_inputs;
  std::size_t max_inputs;
};

const std::map<std::string, OpArity>& KnownOps() {
  static const std::map<std::string, OpArity> ops = {
      {"Sign", {1, 1}},          {"Conv", {2, 3}},        {"BatchNormalization", {5, 5}},
      {"Relu", {1, 1}},          {"MaxPool", {1, 1}},     {"AveragePool", {1, 1}},
      {"GlobalAveragePool", {1, 1}}, {"Add", {2, 2}},     {"Gemm", {2, 3}},
      {"Flatten", {1, 1}},
  };
  return ops;
}

// Inputs at these positions must name initializers.
bool IsWeightSlot(const std::string& op, std::size_t index) {
  if (op == "Conv" || op == "Gemm") return index >= 1;
  if (op == "BatchNormalization") return index >= 1;
  return false;
}

const json& Member(const json& obj, const char* key, const std::string& path) {
  Check(obj.is_object(), ErrorCode::kParse, path + ": expected an object");
  auto it = obj.find(key);
  Check(it != obj.end(), ErrorCode::kParse, path + "/" + key + ": missing");
  return *it;
}

std::string String(const json& v, const std::string& path) {
  Check(v.is_string(), ErrorCode::kParse, path + ": expected a string");
  return v.get<std::string>();
}

std::vector<std::uint32_t> DimList(const json& v, const std::string& path) {
  Check(v.is_array(), ErrorCode::kParse, path + ": expected an array of extents");
  std::vector<std::uint32_t> dims;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Check(v[i].is_number_unsigned() || (v[i].is_number_integer() && v[i].get<std::int64_t>() >= 0),
          ErrorCode::kParse, path + "/" + std::to_string(i) + ": expected a non-negative integer");
    const auto d = v[i].get<std::uint64_t>();
    Check(d <= 0xFFFFFFFFu, ErrorCode::kParse, path + "/" + std::to_string(i) + ": too large");
    dims.push_back(static_cast<std::uint32_t>(d));
  }
  return dims;
}

std::vector<std::string> NameList(const json& v, const std::string& path) {
  Check(v.is_array(), ErrorCode::kParse, path + ": expected an array of names");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < v.size(); ++i) names.push_back(String(v[i], path + "/" + std::to_string(i)));
  return names;
}

std::size_t Product(const std::vector<std::uint32_t>& dims) {
  std::size_t p = 1;
  for (std::uint32_t d : dims) p *= d;
  return p;
}

// Pads the extents with trailing 1s up to rank 4.
Dims ToDims(const std::vector<std::uint32_t>& dims) {
  std::uint32_t e[4] = {1, 1, 1, 1};
  for (std::size_t i = 0; i < dims.size() && i < 4; ++i) e[i] = dims[i];
  return Dims{e[0], e[1], e[2], e[3]};
}

FloatTensor ToTensor(const InterchangeTensor& t) {
  Check(t.dims.size() <= 4, ErrorCode::kUnsupportedAttribute,
        "initializer '" + t.name + "' has rank above 4");
  return FloatTensor(ToDims(t.dims), Layout::kNCHW, t.values);
}

std::string Where(const InterchangeNode& node) {
  return node.op + " node '" + node.name + "'";
}

void RequireEquals(const InterchangeNode& node, const std::string& key, double expected) {
  const double value = node.Number(key, expected);
  Check(value == expected, ErrorCode::kUnsupportedAttribute,
        Where(node) + ": unsupported " + key + " = " + std::to_string(value));
}

std::array<std::uint32_t, 2> Pair(const InterchangeNode& node, const std::string& key,
                                  std::vector<std::int64_t> fallback, std::int64_t minimum) {
  const std::vector<std::int64_t> v = node.Ints(key, std::move(fallback));
  Check(v.size() == 2, ErrorCode::kUnsupportedAttribute,
        Where(node) + ": " + key + " must have two entries");
  Check(v[0] >= minimum && v[1] >= minimum, ErrorCode::kUnsupportedAttribute,
        Where(node) + ": " + key + " out of range");
  return {static_cast<std::uint32_t>(v[0]), static_cast<std::uint32_t>(v[1])};
}

std::array<std::uint32_t, 2> SymmetricPads(const InterchangeNode& node) {
  const std::vector<std::int64_t> p = node.Ints("pads", {0, 0, 0, 0});
  Check(p.size() == 4, ErrorCode::kUnsupportedAttribute, Where(node) + ": pads must have four entries");
  Check(p[0] == p[2] && p[1] == p[3], ErrorCode::kUnsupportedAttribute,
        Where(node) + ": asymmetric pads are not supported");
  Check(p[0] >= 0 && p[1] >= 0, ErrorCode::kUnsupportedAttribute, Where(node) + ": negative pads");
  return {static_cast<std::uint32_t>(p[0]), static_cast<std::uint32_t>(p[1])};
}

void RequireUnitDilations(const InterchangeNode& node) {
  for (std::int64_t d : node.Ints("dilations", {1, 1})) {
    Check(d == 1, ErrorCode::kUnsupportedAttribute, Where(node) + ": dilation != 1 is not supported");
  }
}

Attributes ConvAttributes(const InterchangeNode& node, const InterchangeTensor& weight) {
  Check(weight.dims.size() == 4, ErrorCode::kUnsupportedAttribute,
        Where(node) + ": weight '" + weight.name + "' must be rank 4");
  RequireUnitDilations(node);
  RequireEquals(node, "group", 1);
  Attributes a;
  a.kernel = Pair(node, "kernel_shape",
                  {static_cast<std::int64_t>(weight.dims[2]), static_cast<std::int64_t>(weight.dims[3])},
                  1);
  Check(a.kernel[0] == weight.dims[2] && a.kernel[1] == weight.dims[3],
        ErrorCode::kUnsupportedAttribute, Where(node) + ": kernel_shape disagrees with the weight");
  a.stride = Pair(node, "strides", {1, 1}, 1);
  a.pad = SymmetricPads(node);
  return a;
}

Attributes PoolAttributes(const InterchangeNode& node) {
  RequireUnitDilations(node);
  RequireEquals(node, "ceil_mode", 0);
  if (node.op == "AveragePool") RequireEquals(node, "count_include_pad", 0);
  Check(node.attributes.count("kernel_shape") > 0, ErrorCode::kUnsupportedAttribute,
        Where(node) + ": kernel_shape is required");
  Attributes a;
  a.kernel = Pair(node, "kernel_shape", {}, 1);
  a.stride = Pair(node, "strides", {1, 1}, 1);
  a.pad = SymmetricPads(node);
  return a;
}

ConvParams ToConvParams(const Attributes& a, std::uint32_t channels) {
  return ConvParams{a.kernel[0], a.kernel[1], a.stride[0], a.stride[1], a.pad[0], a.pad[1], channels};
}

PoolParams ToPoolParams(const Attributes& a) {
  return PoolParams{a.kernel[0], a.kernel[1], a.stride[0], a.stride[1], a.pad[0], a.pad[1]};
}

struct GemmWeights {
  FloatTensor matrix;  // (N, K, 1, 1)
  bool transposed = false;
};

GemmWeights GemmMatrix(const InterchangeNode& node, const InterchangeTensor& b) {
  RequireEquals(node, "alpha", 1);
  RequireEquals(node, "beta", 1);
  RequireEquals(node, "transA", 0);
  const double trans_b = node.Number("transB", 0);
  Check(trans_b == 0 || trans_b == 1, ErrorCode::kUnsupportedAttribute,
        Where(node) + ": transB must be 0 or 1");
  Check(b.dims.size() == 2, ErrorCode::kUnsupportedAttribute,
        Where(node) + ": weight '" + b.name + "' must be rank 2");
  if (trans_b == 1) {
    return {FloatTensor(Dims{b.dims[0], b.dims[1], 1, 1}, Layout::kNCHW, b.values), false};
  }
  const std::uint32_t k = b.dims[0];
  const std::uint32_t n = b.dims[1];
  FloatTensor t(Dims{n, k, 1, 1}, Layout::kNCHW);
  for (std::uint32_t i = 0; i < k; ++i)
    for (std::uint32_t j = 0; j < n; ++j) t.at(j, i, 0, 0) = b.values[static_cast<std::size_t>(i) * n + j];
  return {std::move(t), true};
}

const InterchangeTensor& Weight(const InterchangeGraph& g, const InterchangeNode& node,
                                std::size_t index) {
  const InterchangeTensor* t = g.FindInitializer(node.inputs[index]);
  Check(t != nullptr, ErrorCode::kUnresolvedName,
        Where(node) + ": input '" + node.inputs[index] + "' must be an initializer");
  return *t;
}

bool IsPlusMinusOne(const InterchangeTensor& t) {
  return std::all_of(t.values.begin(), t.values.end(),
                     [](float v) { return v == 1.0f || v == -1.0f; });
}

std::uint64_t FloatBytes(const FloatTensor& t) { return static_cast<std::uint64_t>(t.data().size()) * 4; }

}  // namespace

std::vector<std::int64_t> InterchangeNode::Ints(const std::string& key,
                                                std::vector<std::int64_t> fallback) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return fallback;
  std::vector<std::int64_t> out;
  for (double v : it->second) {
    Check(v == std::floor(v), ErrorCode::kUnsupportedAttribute,
          op + " node '" + name + "': attribute " + key + " must be integral");
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

double InterchangeNode::Number(const std::string& key, double fallback) const {
  auto it = attributes.find(key);
  if (it == attributes.end()) return fallback;
  Check(it->second.size() == 1, ErrorCode::kUnsupportedAttribute,
        op + " node '" + name + "': attribute " + key + " must be a scalar");
  return it->second[0];
}

const InterchangeTensor* InterchangeGraph::FindInitializer(const std::string& name) const {
  for (const InterchangeTensor& t : initializers) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

InterchangeGraph ParseInterchange(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kParse, std::string("malformed JSON: ") + e.what());
  }
  Check(doc.is_object(), ErrorCode::kParse, "/: expected an object");

  InterchangeGraph g;
  std::map<std::string, std::string> defined;  // name -> JSON path of definition

  const json& inputs = Member(doc, "inputs", "");
  Check(inputs.is_array() && inputs.size() == 1, ErrorCode::kParse,
        "/inputs: expected exactly one graph input");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string path = "/inputs/" + std::to_string(i);
    InterchangeInput in;
    in.name = String(Member(inputs[i], "name", path), path + "/name");
    in.dims = DimList(Member(inputs[i], "dims", path), path + "/dims");
    Check(in.dims.size() == 4 && Product(in.dims) > 0, ErrorCode::kParse,
          path + "/dims: expected four positive extents (n, c, h, w)");
    Check(defined.emplace(in.name, path).second, ErrorCode::kParse, path + ": duplicate name '" + in.name + "'");
    g.inputs.push_back(std::move(in));
  }

  if (doc.contains("initializers")) {
    const json& inits = doc["initializers"];
    Check(inits.is_array(), ErrorCode::kParse, "/initializers: expected an array");
    for (std::size_t i = 0; i < inits.size(); ++i) {
      const std::string path = "/initializers/" + std::to_string(i);
      InterchangeTensor t;
      t.name = String(Member(inits[i], "name", path), path + "/name");
      t.dims = DimList(Member(inits[i], "dims", path), path + "/dims");
      const json& values = Member(inits[i], "values", path);
      Check(values.is_array(), ErrorCode::kParse, path + "/values: expected an array");
      t.values.reserve(values.size());
      for (std::size_t k = 0; k < values.size(); ++k) {
        Check(values[k].is_number(), ErrorCode::kParse,
              path + "/values/" + std::to_string(k) + ": expected a number");
        t.values.push_back(values[k].get<float>());
      }
      Check(t.values.size() == Product(t.dims), ErrorCode::kParse,
            path + "/values: " + std::to_string(t.values.size()) + " values for " +
                std::to_string(Product(t.dims)) + " elements");
      Check(defined.emplace(t.name, path).second, ErrorCode::kParse,
            path + ": duplicate name '" + t.name + "'");
      g.initializers.push_back(std::move(t));
    }
  }

  const json& nodes = Member(doc, "nodes", "");
  Check(nodes.is_array(), ErrorCode::kParse, "/nodes: expected an array");
  std::set<std::string> node_names;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "/nodes/" + std::to_string(i);
    const json& jn = nodes[i];
    InterchangeNode node;
    node.op = String(Member(jn, "op", path), path + "/op");
    node.name = jn.contains("name") ? String(jn["name"], path + "/name")
                                    : node.op + "_" + std::to_string(i);
    Check(node_names.insert(node.name).second, ErrorCode::kParse,
          path + "/name: duplicate node name '" + node.name + "'");
    auto known = KnownOps().find(node.op);
    Check(known != KnownOps().end(), ErrorCode::kUnknownOp,
          path + "/op: unknown op '" + node.op + "' in node '" + node.name + "'");
    node.inputs = NameList(Member(jn, "inputs", path), path + "/inputs");
    node.outputs = NameList(Member(jn, "outputs", path), path + "/outputs");
    Check(node.inputs.size() >= known->second.min_inputs &&
              node.inputs.size() <= known->second.max_inputs,
          ErrorCode::kParse, path + "/inputs: wrong input count for " + Where(node));
    Check(node.outputs.size() == 1, ErrorCode::kParse,
          path + "/outputs: " + Where(node) + " must have exactly one output");
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const std::string& name = node.inputs[k];
      const std::string ipath = path + "/inputs/" + std::to_string(k);
      Check(defined.count(name) > 0, ErrorCode::kUnresolvedName,
            ipath + ": unresolved name '" + name + "' in node '" + node.name + "'");
      const bool is_init = g.FindInitializer(name) != nullptr;
      Check(is_init == IsWeightSlot(node.op, k), ErrorCode::kParse,
            ipath + ": '" + name + "' must " + (is_init ? "not " : "") + "be an initializer for " +
                Where(node));
    }
    if (jn.contains("attributes")) {
      const json& attrs = jn["attributes"];
      Check(attrs.is_object(), ErrorCode::kParse, path + "/attributes: expected an object");
      for (auto it = attrs.begin(); it != attrs.end(); ++it) {
        const std::string apath = path + "/attributes/" + it.key();
        std::vector<double> values;
        if (it->is_number()) {
          values.push_back(it->get<double>());
        } else {
          Check(it->is_array(), ErrorCode::kParse, apath + ": expected a number or array");
          for (const json& v : *it) {
            Check(v.is_number(), ErrorCode::kParse, apath + ": expected numbers");
            values.push_back(v.get<double>());
          }
        }
        node.attributes.emplace(it.key(), std::move(values));
      }
    }
    Check(defined.emplace(node.outputs[0], path).second, ErrorCode::kParse,
          path + "/outputs/0: '" + node.outputs[0] + "' is already defined");
    g.nodes.push_back(std::move(node));
  }

  g.output = String(Member(doc, "output", ""), "/output");
  Check(defined.count(g.output) > 0 && g.FindInitializer(g.output) == nullptr,
        ErrorCode::kUnresolvedName, "/output: unresolved name '" + g.output + "'");
  return g;
}

std::string SerializeInterchange(const InterchangeGraph& g) {
  json doc;
  doc["inputs"] = json::array();
  for (const InterchangeInput& in : g.inputs) doc["inputs"].push_back({{"name", in.name}, {"dims", in.dims}});
  doc["initializers"] = json::array();
  for (const InterchangeTensor& t : g.initializers) {
    doc["initializers"].push_back({{"name", t.name}, {"dims", t.dims}, {"values", t.values}});
  }
  doc["nodes"] = json::array();
  for (const InterchangeNode& n : g.nodes) {
    json attrs = json::object();
    for (const auto& [key, values] : n.attributes) attrs[key] = values;
    doc["nodes"].push_back({{"name", n.name},
                            {"op", n.op},
                            {"inputs", n.inputs},
                            {"outputs", n.outputs},
                            {"attributes", attrs}});
  }
  doc["output"] = g.output;
  return doc.dump(1);
}

std::set<std::string> DetectBinaryConvs(const InterchangeGraph& g) {
  std::unordered_map<std::string, const InterchangeNode*> producer;
  for (const InterchangeNode& n : g.nodes) producer[n.outputs[0]] = &n;
  std::set<std::string> found;
  for (const InterchangeNode& n : g.nodes) {
    if (n.op != "Conv") continue;
    auto it = producer.find(n.inputs[0]);
    const bool binary_input = it != producer.end() && it->second->op == "Sign";
    const InterchangeTensor* w = g.FindInitializer(n.inputs[1]);
    if (binary_input && w != nullptr && IsPlusMinusOne(*w)) found.insert(n.name);
  }
  return found;
}

std::string ConversionReport::ToJson() const {
  json doc;
  doc["initializers"] = json::array();
  for (const InitializerReport& r : initializers) {
    doc["initializers"].push_back(
        {{"name", r.name}, {"bytes_before", r.bytes_before}, {"bytes_after", r.bytes_after}});
  }
  doc["ratio"] = ratio;
  doc["warnings"] = warnings;
  return doc.dump(2);
}

Conversion ConvertModel(const InterchangeGraph& g, const ConvertOptions& options) {
  ValidateGroupBits(options.group_bits);
  Check(g.inputs.size() == 1, ErrorCode::kInvalidArgument, "exactly one graph input is required");
  const std::set<std::string> binary = DetectBinaryConvs(g);

  std::unordered_map<std::string, std::size_t> producer;
  std::unordered_map<std::string, std::size_t> consumers;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    producer[g.nodes[i].outputs[0]] = i;
    for (const std::string& in : g.nodes[i].inputs) ++consumers[in];
  }
  ++consumers[g.output];

  // BN nodes absorbed into the Sign that consumes them.
  std::set<std::size_t> fused_bn;
  std::unordered_map<std::size_t, std::size_t> sign_to_bn;
  if (options.fuse_bn_sign) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const InterchangeNode& n = g.nodes[i];
      if (n.op != "Sign") continue;
      auto it = producer.find(n.inputs[0]);
      if (it == producer.end()) continue;
      const InterchangeNode& bn = g.nodes[it->second];
      if (bn.op == "BatchNormalization" && consumers[bn.outputs[0]] == 1) {
        fused_bn.insert(it->second);
        sign_to_bn[i] = it->second;
      }
    }
  }

  Conversion result;
  Graph& graph = result.model.graph;
  graph.input_name = g.inputs[0].name;
  graph.input_dims = ToDims(g.inputs[0].dims);
  graph.output = g.output;

  // One runtime initializer per (source initializer, form).
  std::map<std::pair<std::string, std::string>, std::string> emitted;
  std::map<std::string, std::uint64_t> bytes_after;
  std::set<std::string> taken;
  const auto emit = [&](const std::string& source, const std::string& form, auto make) {
    auto key = std::make_pair(source, form);
    if (auto it = emitted.find(key); it != emitted.end()) return it->second;
    std::string name = taken.count(source) ? source + "#" + form : source;
    Initializer value = make();
    bytes_after[source] += std::holds_alternative<FloatTensor>(value)
                               ? FloatBytes(std::get<FloatTensor>(value))
                               : std::get<PackedFilter>(value).PayloadBytes();
    graph.initializers.push_back({name, std::move(value)});
    taken.insert(name);
    emitted.emplace(key, name);
    return name;
  };
  const auto emit_float = [&](const InterchangeTensor& t) {
    return emit(t.name, "f32", [&] { return Initializer(ToTensor(t)); });
  };

  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (fused_bn.count(i)) continue;
    const InterchangeNode& n = g.nodes[i];
    Node node;
    node.name = n.name;
    node.output = n.outputs[0];
    node.inputs = {n.inputs[0]};

    if (n.op == "Sign") {
      auto fused = sign_to_bn.find(i);
      if (fused == sign_to_bn.end()) {
        node.op = OpKind::kSign;
      } else {
        const InterchangeNode& bn = g.nodes[fused->second];
        node.op = OpKind::kBnSign;
        node.inputs = {bn.inputs[0]};
        for (std::size_t k = 1; k < 5; ++k) node.weights.push_back(emit_float(Weight(g, bn, k)));
        node.attrs.epsilon = static_cast<float>(bn.Number("epsilon", 1e-5));
      }
    } else if (n.op == "Conv") {
      const InterchangeTensor& w = Weight(g, n, 1);
      node.attrs = ConvAttributes(n, w);
      if (binary.count(n.name)) {
        node.op = OpKind::kBinaryConv;
        node.weights.push_back(emit(w.name, "packed" + std::to_string(options.group_bits), [&] {
          return Initializer(MakePackedFilter(ToTensor(w), options.group_bits));
        }));
        if (node.attrs.pad[0] > 0 || node.attrs.pad[1] > 0) {
          result.report.warnings.push_back(
              "Conv node '" + n.name +
              "': binary convolution pads with +1 instead of 0, border outputs differ from a "
              "zero-padded float convolution");
        }
      } else {
        node.op = OpKind::kFloatConv;
        node.weights.push_back(emit_float(w));
      }
      if (n.inputs.size() == 3) {
        const InterchangeTensor& b = Weight(g, n, 2);
        Check(b.values.size() == w.dims[0], ErrorCode::kShapeMismatch,
              Where(n) + ": bias length does not match output channels");
        node.weights.push_back(emit_float(b));
      }
    } else if (n.op == "BatchNormalization") {
      node.op = OpKind::kBatchNorm;
      for (std::size_t k = 1; k < 5; ++k) node.weights.push_back(emit_float(Weight(g, n, k)));
      node.attrs.epsilon = static_cast<float>(n.Number("epsilon", 1e-5));
    } else if (n.op == "Relu") {
      node.op = OpKind::kRelu;
    } else if (n.op == "MaxPool" || n.op == "AveragePool") {
      node.op = n.op == "MaxPool" ? OpKind::kMaxPool : OpKind::kAvgPool;
      node.attrs = PoolAttributes(n);
    } else if (n.op == "GlobalAveragePool") {
      node.op = OpKind::kGlobalAvgPool;
    } else if (n.op == "Add") {
      node.op = OpKind::kAdd;
      node.inputs = n.inputs;
    } else if (n.op == "Flatten") {
      RequireEquals(n, "axis", 1);
      node.op = OpKind::kFlatten;
    } else if (n.op == "Gemm") {
      const InterchangeTensor& b = Weight(g, n, 1);
      GemmWeights gw = GemmMatrix(n, b);
      node.op = OpKind::kFullyConnected;
      node.weights.push_back(emit(b.name, gw.transposed ? "transposed" : "f32",
                                  [&] { return Initializer(gw.matrix); }));
      if (n.inputs.size() == 3) {
        const InterchangeTensor& c = Weight(g, n, 2);
        Check(c.values.size() == gw.matrix.dims().n, ErrorCode::kShapeMismatch,
              Where(n) + ": bias length does not match output features");
        node.weights.push_back(emit(c.name, "vector", [&] {
          return Initializer(FloatTensor(Dims{gw.matrix.dims().n, 1, 1, 1}, Layout::kNCHW, c.values));
        }));
      }
    } else {
      Fail(ErrorCode::kUnknownOp, "unknown op '" + n.op + "' in node '" + n.name + "'");
    }
    graph.nodes.push_back(std::move(node));
  }

  std::uint64_t total_before = 0;
  std::uint64_t total_after = 0;
  for (const InterchangeTensor& t : g.initializers) {
    InitializerReport r{t.name, static_cast<std::uint64_t>(t.values.size()) * 4, bytes_after[t.name]};
    if (r.bytes_after == 0) {
      result.report.warnings.push_back("initializer '" + t.name + "' is unused and was dropped");
    }
    total_before += r.bytes_before;
    total_after += r.bytes_after;
    result.report.initializers.push_back(std::move(r));
  }
  result.report.ratio =
      total_after == 0 ? 1.0 : static_cast<double>(total_before) / static_cast<double>(total_after);

  graph.Validate();
  return result;
}

FloatTensor ReferenceEvaluate(const InterchangeGraph& g, const FloatTensor& input) {
  Check(g.inputs.size() == 1, ErrorCode::kInvalidArgument, "exactly one graph input is required");
  Check(input.dims() == ToDims(g.inputs[0].dims), ErrorCode::kShapeMismatch,
        "input dims " + input.dims().ToString() + " do not match graph input");
  const std::set<std::string> binary = DetectBinaryConvs(g);

  std::unordered_map<std::string, FloatTensor> values;
  values.emplace(g.inputs[0].name, ConvertLayout(input, Layout::kNHWC));
  for (const InterchangeNode& n : g.nodes) {
    const FloatTensor& x = values.at(n.inputs[0]);
    FloatTensor y;
    if (n.op == "Sign") {
      y = SignOp(x);
    } else if (n.op == "Conv") {
      const InterchangeTensor& w = Weight(g, n, 1);
      const ConvParams p = ToConvParams(ConvAttributes(n, w), x.dims().c);
      std::vector<float> bias;
      if (n.inputs.size() == 3) bias = Weight(g, n, 2).values;
      if (binary.count(n.name)) {
        y = OracleBinaryConv(x, ToTensor(w), p);
        if (!bias.empty()) y = AddBias(y, bias);
      } else {
        y = Conv2dF32(x, ToTensor(w), bias, p);
      }
    } else if (n.op == "BatchNormalization") {
      BatchNormParams p{Weight(g, n, 1).values, Weight(g, n, 2).values, Weight(g, n, 3).values,
                        Weight(g, n, 4).values, static_cast<float>(n.Number("epsilon", 1e-5))};
      y = BatchNorm(x, p);
    } else if (n.op == "Relu") {
      y = Relu(x);
    } else if (n.op == "MaxPool") {
      y = MaxPool(x, ToPoolParams(PoolAttributes(n)));
    } else if (n.op == "AveragePool") {
      y = AvgPool(x, ToPoolParams(PoolAttributes(n)));
    } else if (n.op == "GlobalAveragePool") {
      y = GlobalAvgPool(x);
    } else if (n.op == "Add") {
      y = Add(x, values.at(n.inputs[1]));
    } else if (n.op == "Flatten") {
      y = Flatten(x);
    } else if (n.op == "Gemm") {
      const GemmWeights gw = GemmMatrix(n, Weight(g, n, 1));
      std::vector<float> bias;
      if (n.inputs.size() == 3) bias = Weight(g, n, 2).values;
      y = FullyConnected(x, gw.matrix, bias);
    } else {
      Fail(ErrorCode::kUnknownOp, "unknown op '" + n.op + "'");
    }
    values.insert_or_assign(n.outputs[0], std::move(y));
  }
  return values.at(g.output);
}

InterchangeGraph ExportInterchange(const Model& model) {
  const Graph& graph = model.graph;
  InterchangeGraph g;
  const Dims& d = graph.input_dims;
  g.inputs.push_back({graph.input_name, {d.n, d.c, d.h, d.w}});
  g.output = graph.output;

  std::set<std::string> exported;
  // Weights take the rank their first consumer expects.
  const auto export_weight = [&](const std::string& name, std::size_t rank) {
    if (!exported.insert(name).second) return;
    const Initializer* init = graph.FindInitializer(name);
    InterchangeTensor t;
    t.name = name;
    if (const auto* f = std::get_if<PackedFilter>(init)) {
      t.dims = {f->out_channels, f->in_channels, f->kernel_h, f->kernel_w};
      const std::uint32_t groups = f->groups();
      for (std::uint32_t m = 0; m < f->out_channels; ++m)
        for (std::uint32_t c = 0; c < f->in_channels; ++c)
          for (std::uint32_t ky = 0; ky < f->kernel_h; ++ky)
            for (std::uint32_t kx = 0; kx < f->kernel_w; ++kx) {
              const std::size_t k = (static_cast<std::size_t>(ky) * f->kernel_w + kx) * groups +
                                    c / f->group_bits();
              const std::uint32_t bit = c % f->group_bits();
              const bool negative = (f->matrix.vec(m, k)[bit / kWordBits] >> (bit % kWordBits)) & 1u;
              t.values.push_back(negative ? -1.0f : 1.0f);
            }
    } else {
      const FloatTensor nchw = ConvertLayout(std::get<FloatTensor>(*init), Layout::kNCHW);
      const Dims& td = nchw.dims();
      const std::uint32_t all[4] = {td.n, td.c, td.h, td.w};
      if (rank == 1) {
        t.dims = {static_cast<std::uint32_t>(td.count())};
      } else {
        t.dims.assign(all, all + rank);
      }
      t.values = nchw.data();
    }
    g.initializers.push_back(std::move(t));
  };

  const auto geometry = [](const Attributes& a) {
    return std::map<std::string, std::vector<double>>{
        {"kernel_shape", {double(a.kernel[0]), double(a.kernel[1])}},
        {"strides", {double(a.stride[0]), double(a.stride[1])}},
        {"pads", {double(a.pad[0]), double(a.pad[1]), double(a.pad[0]), double(a.pad[1])}}};
  };

  for (const Node& node : graph.nodes) {
    InterchangeNode n;
    n.name = node.name;
    n.inputs = node.inputs;
    n.outputs = {node.output};
    switch (node.op) {
      case OpKind::kSign: n.op = "Sign"; break;
      case OpKind::kRelu: n.op = "Relu"; break;
      case OpKind::kGlobalAvgPool: n.op = "GlobalAveragePool"; break;
      case OpKind::kAdd: n.op = "Add"; break;
      case OpKind::kFlatten: n.op = "Flatten"; break;
      case OpKind::kMaxPool:
        n.op = "MaxPool";
        n.attributes = geometry(node.attrs);
        break;
      case OpKind::kAvgPool:
        n.op = "AveragePool";
        n.attributes = geometry(node.attrs);
        break;
      case OpKind::kBinaryConv:
      case OpKind::kFloatConv:
        n.op = "Conv";
        n.attributes = geometry(node.attrs);
        export_weight(node.weights[0], 4);
        if (node.weights.size() == 2) export_weight(node.weights[1], 1);
        n.inputs.insert(n.inputs.end(), node.weights.begin(), node.weights.end());
        break;
      case OpKind::kFullyConnected:
        n.op = "Gemm";
        n.attributes["transB"] = {1};
        export_weight(node.weights[0], 2);
        if (node.weights.size() == 2) export_weight(node.weights[1], 1);
        n.inputs.insert(n.inputs.end(), node.weights.begin(), node.weights.end());
        break;
      case OpKind::kBatchNorm:
      case OpKind::kBnSign: {
        InterchangeNode bn;
        bn.op = "BatchNormalization";
        bn.name = node.op == OpKind::kBnSign ? node.name + "/bn" : node.name;
        bn.inputs = node.inputs;
        for (const std::string& w : node.weights) {
          export_weight(w, 1);
          bn.inputs.push_back(w);
        }
        bn.attributes["epsilon"] = {static_cast<double>(node.attrs.epsilon)};
        if (node.op == OpKind::kBatchNorm) {
          bn.outputs = {node.output};
          n = std::move(bn);
          break;
        }
        bn.outputs = {node.output + "/bn"};
        n.op = "Sign";
        n.inputs = bn.outputs;
        g.nodes.push_back(std::move(bn));
        break;
      }
    }
    g.nodes.push_back(std::move(n));
  }
  return g;
}

}  // namespace xbnn
