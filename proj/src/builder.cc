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

#include "xbnn/builder.h"

#include "xbnn/error.h"

namespace xbnn {
namespace {

std::uint32_t ConvExtent(std::uint32_t in, std::uint32_t kernel, std::uint32_t stride,
                         std::uint32_t pad) {
  Check(in + 2 * pad >= kernel, ErrorCode::kShapeMismatch, "kernel larger than padded input");
  return (in + 2 * pad - kernel) / stride + 1;
}

Attributes Geometry(std::uint32_t kernel, std::uint32_t stride, std::uint32_t pad) {
  Attributes a;
  a.kernel = {kernel, kernel};
  a.stride = {stride, stride};
  a.pad = {pad, pad};
  return a;
}

}  // namespace

GraphBuilder::GraphBuilder(std::string input_name, Dims input_dims, std::uint64_t seed)
    : rng_(seed) {
  graph_.input_name = std::move(input_name);
  graph_.input_dims = input_dims;
  dims_[graph_.input_name] = input_dims;
}

const Dims& GraphBuilder::dims_of(const std::string& value) const {
  auto it = dims_.find(value);
  Check(it != dims_.end(), ErrorCode::kUnresolvedName, "unknown value '" + value + "'");
  return it->second;
}

float GraphBuilder::Uniform(float lo, float hi) {
  const float unit = static_cast<float>(rng_() >> 40) * 0x1.0p-24f;
  return lo + (hi - lo) * unit;
}

float GraphBuilder::RandomSign() { return (rng_() >> 63) ? -1.0f : 1.0f; }

std::string GraphBuilder::AddInitializer(const std::string& stem, Initializer value) {
  std::string name = stem + "_" + std::to_string(counter_++);
  graph_.initializers.push_back({name, std::move(value)});
  return name;
}

std::string GraphBuilder::Emit(OpKind op, std::vector<std::string> inputs,
                               std::vector<std::string> weights, Attributes attrs,
                               Dims out_dims) {
  Node node;
  node.op = op;
  node.name = std::string(OpKindName(op)) + "_" + std::to_string(counter_++);
  node.inputs = std::move(inputs);
  node.output = node.name + ":out";
  node.weights = std::move(weights);
  node.attrs = attrs;
  dims_[node.output] = out_dims;
  graph_.nodes.push_back(node);
  return node.output;
}

std::string GraphBuilder::Sign(const std::string& x) {
  return Emit(OpKind::kSign, {x}, {}, {}, dims_of(x));
}

std::string GraphBuilder::BinaryConv(const std::string& x, std::uint32_t out_channels,
                                     std::uint32_t kernel, std::uint32_t stride,
                                     std::uint32_t pad, std::uint32_t group_bits) {
  const Dims in = dims_of(x);
  FloatTensor w(Dims{out_channels, in.c, kernel, kernel}, Layout::kNCHW);
  for (float& v : w.data()) v = RandomSign();
  const std::string filter = AddInitializer("binary_filter", MakePackedFilter(w, group_bits));
  const Dims out{in.n, out_channels, ConvExtent(in.h, kernel, stride, pad),
                 ConvExtent(in.w, kernel, stride, pad)};
  return Emit(OpKind::kBinaryConv, {x}, {filter}, Geometry(kernel, stride, pad), out);
}

std::string GraphBuilder::FloatConv(const std::string& x, std::uint32_t out_channels,
                                    std::uint32_t kernel, std::uint32_t stride, std::uint32_t pad,
                                    bool bias) {
  const Dims in = dims_of(x);
  const float scale = 1.0f / static_cast<float>(in.c * kernel * kernel);
  FloatTensor w(Dims{out_channels, in.c, kernel, kernel}, Layout::kNCHW);
  for (float& v : w.data()) v = Uniform(-scale, scale);
  std::vector<std::string> weights{AddInitializer("conv_weight", std::move(w))};
  if (bias) {
    FloatTensor b(Dims{out_channels, 1, 1, 1}, Layout::kNCHW);
    for (float& v : b.data()) v = Uniform(-0.1f, 0.1f);
    weights.push_back(AddInitializer("conv_bias", std::move(b)));
  }
  const Dims out{in.n, out_channels, ConvExtent(in.h, kernel, stride, pad),
                 ConvExtent(in.w, kernel, stride, pad)};
  return Emit(OpKind::kFloatConv, {x}, std::move(weights), Geometry(kernel, stride, pad), out);
}

std::string GraphBuilder::BatchNorm(const std::string& x) {
  const Dims in = dims_of(x);
  const auto make = [&](const char* stem, float lo, float hi) {
    FloatTensor t(Dims{in.c, 1, 1, 1}, Layout::kNCHW);
    for (float& v : t.data()) v = Uniform(lo, hi);
    return AddInitializer(stem, std::move(t));
  };
  std::vector<std::string> weights{make("bn_scale", 0.5f, 1.5f), make("bn_shift", -0.1f, 0.1f),
                                   make("bn_mean", -0.1f, 0.1f), make("bn_var", 0.5f, 1.5f)};
  return Emit(OpKind::kBatchNorm, {x}, std::move(weights), {}, in);
}

std::string GraphBuilder::Relu(const std::string& x) {
  return Emit(OpKind::kRelu, {x}, {}, {}, dims_of(x));
}

std::string GraphBuilder::MaxPool(const std::string& x, std::uint32_t kernel,
                                  std::uint32_t stride, std::uint32_t pad) {
  const Dims in = dims_of(x);
  const Dims out{in.n, in.c, ConvExtent(in.h, kernel, stride, pad),
                 ConvExtent(in.w, kernel, stride, pad)};
  return Emit(OpKind::kMaxPool, {x}, {}, Geometry(kernel, stride, pad), out);
}

std::string GraphBuilder::AvgPool(const std::string& x, std::uint32_t kernel,
                                  std::uint32_t stride, std::uint32_t pad) {
  const Dims in = dims_of(x);
  const Dims out{in.n, in.c, ConvExtent(in.h, kernel, stride, pad),
                 ConvExtent(in.w, kernel, stride, pad)};
  return Emit(OpKind::kAvgPool, {x}, {}, Geometry(kernel, stride, pad), out);
}

std::string GraphBuilder::GlobalAvgPool(const std::string& x) {
  const Dims in = dims_of(x);
  return Emit(OpKind::kGlobalAvgPool, {x}, {}, {}, Dims{in.n, in.c, 1, 1});
}

std::string GraphBuilder::Flatten(const std::string& x) {
  const Dims in = dims_of(x);
  return Emit(OpKind::kFlatten, {x}, {}, {}, Dims{in.n, in.c * in.h * in.w, 1, 1});
}

std::string GraphBuilder::FullyConnected(const std::string& x, std::uint32_t out_features) {
  const Dims in = dims_of(x);
  const float scale = 1.0f / static_cast<float>(in.c);
  FloatTensor w(Dims{out_features, in.c, 1, 1}, Layout::kNCHW);
  for (float& v : w.data()) v = Uniform(-scale, scale);
  FloatTensor b(Dims{out_features, 1, 1, 1}, Layout::kNCHW);
  for (float& v : b.data()) v = Uniform(-0.1f, 0.1f);
  std::vector<std::string> weights{AddInitializer("fc_weight", std::move(w)),
                                   AddInitializer("fc_bias", std::move(b))};
  return Emit(OpKind::kFullyConnected, {x}, std::move(weights), {},
              Dims{in.n, out_features, 1, 1});
}

std::string GraphBuilder::Add(const std::string& a, const std::string& b) {
  Check(dims_of(a) == dims_of(b), ErrorCode::kShapeMismatch, "add operand shapes differ");
  return Emit(OpKind::kAdd, {a, b}, {}, {}, dims_of(a));
}

Graph GraphBuilder::Finish(const std::string& output) {
  graph_.output = output;
  graph_.Validate();
  return graph_;
}

std::string DefaultStem(GraphBuilder& b, const std::string& input) {
  std::string x = b.FloatConv(input, 64, 7, 2, 3, false);
  x = b.BatchNorm(x);
  x = b.Relu(x);
  return b.MaxPool(x, 3, 2, 1);
}

Model BuildBiRealNet18(const BiRealOptions& options) {
  GraphBuilder b("input", Dims{1, 3, options.input_size, options.input_size}, options.seed);
  std::string x = options.stem ? options.stem(b, "input") : DefaultStem(b, "input");

  // One binary unit: its own shortcut around Sign -> 3x3 BinaryConv -> BN.
  const auto unit = [&](const std::string& in, std::uint32_t out_channels,
                        std::uint32_t stride) {
    const std::uint32_t in_channels = b.dims_of(in).c;
    std::string y = b.Sign(in);
    y = b.BinaryConv(y, out_channels, 3, stride, 1, options.group_bits);
    y = b.BatchNorm(y);
    std::string shortcut = in;
    if (stride != 1 || in_channels != out_channels) {
      if (stride != 1) shortcut = b.AvgPool(shortcut, stride, stride, 0);
      shortcut = b.FloatConv(shortcut, out_channels, 1, 1, 0, false);
      shortcut = b.BatchNorm(shortcut);
    }
    return b.Add(y, shortcut);
  };

  const std::uint32_t widths[4] = {64, 128, 256, 512};
  for (int stage = 0; stage < 4; ++stage) {
    for (int block = 0; block < 2; ++block) {
      const std::uint32_t stride = (stage > 0 && block == 0) ? 2 : 1;
      x = unit(x, widths[stage], stride);
      x = unit(x, widths[stage], 1);
    }
  }
  x = b.GlobalAvgPool(x);
  x = b.Flatten(x);
  x = b.FullyConnected(x, options.num_classes);
  return Model{kFormatVersion, b.Finish(x)};
}

}  // namespace xbnn
