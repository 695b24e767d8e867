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

#include "xbnn/graph.h"

#include <set>
#include <unordered_map>

#include "xbnn/error.h"
#include "xbnn/floatops.h"
#include "xbnn/layout.h"

namespace xbnn {
namespace {

std::string Where(const Node& node) {
  return "node '" + node.name + "' (" + OpKindName(node.op) + ")";
}

bool HasConvGeometry(OpKind op) {
  return op == OpKind::kBinaryConv || op == OpKind::kFloatConv || op == OpKind::kMaxPool ||
         op == OpKind::kAvgPool;
}

struct WeightArity {
  std::size_t min = 0;
  std::size_t max = 0;
};

WeightArity ArityOf(OpKind op) {
  switch (op) {
    case OpKind::kBinaryConv:
    case OpKind::kFloatConv:
    case OpKind::kFullyConnected:
      return {1, 2};
    case OpKind::kBatchNorm:
    case OpKind::kBnSign:
      return {4, 4};
    default:
      return {0, 0};
  }
}

const FloatTensor& FloatWeight(const Graph& graph, const Node& node, std::size_t index) {
  const Initializer* init = graph.FindInitializer(node.weights[index]);
  Check(init != nullptr, ErrorCode::kMissingInitializer,
        Where(node) + ": missing initializer '" + node.weights[index] + "'");
  const auto* tensor = std::get_if<FloatTensor>(init);
  Check(tensor != nullptr, ErrorCode::kMalformedModel,
        Where(node) + ": initializer '" + node.weights[index] + "' must be a float tensor");
  return *tensor;
}

const PackedFilter& PackedWeight(const Graph& graph, const Node& node) {
  const Initializer* init = graph.FindInitializer(node.weights[0]);
  Check(init != nullptr, ErrorCode::kMissingInitializer,
        Where(node) + ": missing initializer '" + node.weights[0] + "'");
  const auto* filter = std::get_if<PackedFilter>(init);
  Check(filter != nullptr, ErrorCode::kMalformedModel,
        Where(node) + ": binary convolution weight '" + node.weights[0] + "' is not packed");
  return *filter;
}

BatchNormParams BatchNormOf(const Graph& graph, const Node& node) {
  BatchNormParams p;
  p.scale = FloatWeight(graph, node, 0).data();
  p.shift = FloatWeight(graph, node, 1).data();
  p.mean = FloatWeight(graph, node, 2).data();
  p.variance = FloatWeight(graph, node, 3).data();
  p.epsilon = node.attrs.epsilon;
  return p;
}

ConvParams ConvParamsOf(const Node& node, std::uint32_t channels) {
  ConvParams p;
  p.kernel_h = node.attrs.kernel[0];
  p.kernel_w = node.attrs.kernel[1];
  p.stride_h = node.attrs.stride[0];
  p.stride_w = node.attrs.stride[1];
  p.pad_h = node.attrs.pad[0];
  p.pad_w = node.attrs.pad[1];
  p.channels = channels;
  return p;
}

PoolParams PoolParamsOf(const Node& node) {
  return PoolParams{node.attrs.kernel[0], node.attrs.kernel[1], node.attrs.stride[0],
                    node.attrs.stride[1], node.attrs.pad[0],    node.attrs.pad[1]};
}

std::span<const float> OptionalBias(const Graph& graph, const Node& node) {
  if (node.weights.size() < 2) return {};
  return FloatWeight(graph, node, 1).data();
}

FloatTensor RunNode(const Graph& graph, const Node& node,
                    const std::vector<const FloatTensor*>& in) {
  switch (node.op) {
    case OpKind::kSign:
      return SignOp(*in[0]);
    case OpKind::kBinaryConv: {
      const PackedFilter& filter = PackedWeight(graph, node);
      const Dims& d = in[0]->dims();
      Check(d.c == filter.in_channels, ErrorCode::kShapeMismatch,
            "input has " + std::to_string(d.c) + " channels, filter expects " +
                std::to_string(filter.in_channels));
      const PackedTensor packed = PackToNC1HWC2(*in[0], filter.group_bits());
      FloatTensor out = BinaryDirectConv(packed, filter.matrix, ConvParamsOf(node, d.c));
      const auto bias = OptionalBias(graph, node);
      return bias.empty() ? out : AddBias(out, bias);
    }
    case OpKind::kFloatConv:
      return Conv2dF32(*in[0], FloatWeight(graph, node, 0), OptionalBias(graph, node),
                       ConvParamsOf(node, in[0]->dims().c));
    case OpKind::kBatchNorm:
      return BatchNorm(*in[0], BatchNormOf(graph, node));
    case OpKind::kBnSign:
      return FusedBnSign(BatchNormOf(graph, node)).Apply(*in[0]);
    case OpKind::kRelu:
      return Relu(*in[0]);
    case OpKind::kMaxPool:
      return MaxPool(*in[0], PoolParamsOf(node));
    case OpKind::kAvgPool:
      return AvgPool(*in[0], PoolParamsOf(node));
    case OpKind::kGlobalAvgPool:
      return GlobalAvgPool(*in[0]);
    case OpKind::kAdd:
      return Add(*in[0], *in[1]);
    case OpKind::kFullyConnected:
      return FullyConnected(*in[0], FloatWeight(graph, node, 0), OptionalBias(graph, node));
    case OpKind::kFlatten:
      return Flatten(*in[0]);
  }
  Fail(ErrorCode::kMalformedModel, "unknown op kind");
}

}  // namespace

const char* OpKindName(OpKind op) {
  switch (op) {
    case OpKind::kSign: return "Sign";
    case OpKind::kBinaryConv: return "BinaryConv";
    case OpKind::kFloatConv: return "FloatConv";
    case OpKind::kBatchNorm: return "BatchNorm";
    case OpKind::kRelu: return "Relu";
    case OpKind::kMaxPool: return "MaxPool";
    case OpKind::kAvgPool: return "AvgPool";
    case OpKind::kGlobalAvgPool: return "GlobalAvgPool";
    case OpKind::kAdd: return "Add";
    case OpKind::kFullyConnected: return "FullyConnected";
    case OpKind::kFlatten: return "Flatten";
    case OpKind::kBnSign: return "BnSign";
  }
  return "Unknown";
}

PackedFilter MakePackedFilter(const FloatTensor& oihw, std::uint32_t group_bits) {
  const Dims& d = oihw.dims();
  return PackedFilter{d.n, d.c, d.h, d.w, PackFilters(oihw, group_bits)};
}

const Initializer* Graph::FindInitializer(const std::string& name) const {
  for (const NamedInitializer& init : initializers) {
    if (init.name == name) return &init.value;
  }
  return nullptr;
}

void Graph::Validate() const {
  Check(!input_name.empty(), ErrorCode::kMalformedModel, "graph input has no name");
  Check(input_dims.count() > 0, ErrorCode::kMalformedModel,
        "graph input dims " + input_dims.ToString() + " are empty");

  std::set<std::string> init_names;
  for (const NamedInitializer& init : initializers) {
    Check(init_names.insert(init.name).second, ErrorCode::kMalformedModel,
          "duplicate initializer '" + init.name + "'");
  }
  std::set<std::string> values{input_name};
  std::set<std::string> node_names;
  for (const Node& node : nodes) {
    Check(node_names.insert(node.name).second, ErrorCode::kMalformedModel,
          "duplicate node name '" + node.name + "'");
    const std::size_t arity = node.op == OpKind::kAdd ? 2 : 1;
    Check(node.inputs.size() == arity, ErrorCode::kMalformedModel,
          Where(node) + ": expects " + std::to_string(arity) + " inputs");
    for (const std::string& name : node.inputs) {
      Check(values.count(name) > 0, ErrorCode::kUnresolvedName,
            Where(node) + ": input '" + name + "' is not produced before this node");
    }
    const WeightArity wa = ArityOf(node.op);
    Check(node.weights.size() >= wa.min && node.weights.size() <= wa.max,
          ErrorCode::kMalformedModel, Where(node) + ": wrong number of weight references");
    if (HasConvGeometry(node.op)) {
      const Attributes& a = node.attrs;
      Check(a.kernel[0] >= 1 && a.kernel[1] >= 1 && a.stride[0] >= 1 && a.stride[1] >= 1,
            ErrorCode::kMalformedModel, Where(node) + ": kernel and stride must be >= 1");
    }
    switch (node.op) {
      case OpKind::kBinaryConv: {
        const PackedFilter& f = PackedWeight(*this, node);
        Check(f.kernel_h == node.attrs.kernel[0] && f.kernel_w == node.attrs.kernel[1],
              ErrorCode::kMalformedModel, Where(node) + ": kernel attribute disagrees with filter");
        if (node.weights.size() == 2) {
          Check(FloatWeight(*this, node, 1).data().size() == f.out_channels,
                ErrorCode::kMalformedModel, Where(node) + ": bias length mismatch");
        }
        break;
      }
      case OpKind::kFloatConv: {
        const Dims& d = FloatWeight(*this, node, 0).dims();
        Check(d.h == node.attrs.kernel[0] && d.w == node.attrs.kernel[1],
              ErrorCode::kMalformedModel, Where(node) + ": kernel attribute disagrees with filter");
        if (node.weights.size() == 2) {
          Check(FloatWeight(*this, node, 1).data().size() == d.n, ErrorCode::kMalformedModel,
                Where(node) + ": bias length mismatch");
        }
        break;
      }
      case OpKind::kFullyConnected: {
        const Dims& d = FloatWeight(*this, node, 0).dims();
        Check(d.h == 1 && d.w == 1, ErrorCode::kMalformedModel,
              Where(node) + ": weight must be (out, in, 1, 1)");
        if (node.weights.size() == 2) {
          Check(FloatWeight(*this, node, 1).data().size() == d.n, ErrorCode::kMalformedModel,
                Where(node) + ": bias length mismatch");
        }
        break;
      }
      case OpKind::kBatchNorm:
      case OpKind::kBnSign: {
        const std::size_t channels = FloatWeight(*this, node, 0).data().size();
        for (std::size_t i = 1; i < 4; ++i) {
          Check(FloatWeight(*this, node, i).data().size() == channels, ErrorCode::kMalformedModel,
                Where(node) + ": batch norm parameter lengths differ");
        }
        break;
      }
      default:
        break;
    }
    Check(values.insert(node.output).second && init_names.count(node.output) == 0,
          ErrorCode::kMalformedModel, Where(node) + ": output '" + node.output + "' redefined");
  }
  Check(values.count(output) > 0, ErrorCode::kUnresolvedName,
        "graph output '" + output + "' is never produced");
}

FloatTensor Execute(const Model& model, const FloatTensor& input) {
  const Graph& graph = model.graph;
  Check(input.dims() == graph.input_dims, ErrorCode::kShapeMismatch,
        "input dims " + input.dims().ToString() + " do not match model input " +
            graph.input_dims.ToString());

  std::unordered_map<std::string, std::size_t> last_use;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    for (const std::string& name : graph.nodes[i].inputs) last_use[name] = i;
  }

  std::unordered_map<std::string, FloatTensor> values;
  values.emplace(graph.input_name, ConvertLayout(input, Layout::kNHWC));
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const Node& node = graph.nodes[i];
    std::vector<const FloatTensor*> in;
    for (const std::string& name : node.inputs) {
      auto it = values.find(name);
      Check(it != values.end(), ErrorCode::kUnresolvedName,
            Where(node) + ": input '" + name + "' is not available");
      in.push_back(&it->second);
    }
    FloatTensor out;
    try {
      out = RunNode(graph, node, in);
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.rfind("node '", 0) == 0) throw;
      throw Error(e.code(), Where(node) + ": " + what);
    }
    for (const std::string& name : node.inputs) {
      if (last_use[name] == i && name != graph.output) values.erase(name);
    }
    values.insert_or_assign(node.output, std::move(out));
  }
  auto it = values.find(graph.output);
  Check(it != values.end(), ErrorCode::kUnresolvedName,
        "graph output '" + graph.output + "' was not produced");
  return std::move(it->second);
}

}  // namespace xbnn
