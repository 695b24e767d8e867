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

#include "support/random_graph.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "support/oracles.h"

namespace xbnn::testing {
namespace {

using nlohmann::json;

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  json Build() {
    c_ = 1 + Below(12);
    h_ = 5 + Below(8);
    w_ = 5 + Below(8);
    doc_["inputs"] = json::array({{{"name", "x"}, {"dims", {1, c_, h_, w_}}}});
    doc_["initializers"] = json::array();
    doc_["nodes"] = json::array();
    cur_ = "x";

    const std::uint32_t steps = 3 + Below(5);
    for (std::uint32_t s = 0; s < steps; ++s) {
      switch (Below(8)) {
        case 0: BinaryConv(false); break;
        case 1: BinaryConv(true); break;
        case 2: FloatConv(); break;
        case 3: cur_ = BatchNorm(cur_); break;
        case 4: cur_ = Node("Relu", {cur_}, json::object()); break;
        case 5: Pool(); break;
        case 6: Residual(); break;
        default: BinaryConv(true); break;
      }
    }
    switch (Below(3)) {
      case 0:
        cur_ = Node("GlobalAveragePool", {cur_}, json::object());
        h_ = w_ = 1;
        Head();
        break;
      case 1:
        Head();
        break;
      default:
        break;
    }
    doc_["output"] = cur_;
    return doc_;
  }

 private:
  std::uint32_t Below(std::uint32_t n) { return static_cast<std::uint32_t>(rng_() % n); }
  float Uniform(float lo, float hi) { return RandomFloat(rng_, lo, hi); }

  std::string Init(const std::vector<std::uint32_t>& dims, std::vector<float> values) {
    const std::string name = "w" + std::to_string(counter_++);
    doc_["initializers"].push_back({{"name", name}, {"dims", dims}, {"values", values}});
    return name;
  }

  std::vector<float> Values(std::size_t count, float lo, float hi) {
    std::vector<float> v(count);
    for (float& x : v) x = Uniform(lo, hi);
    return v;
  }

  std::vector<float> Signs(std::size_t count) {
    std::vector<float> v(count);
    for (float& x : v) x = (rng_() & 1) ? -1.0f : 1.0f;
    return v;
  }

  std::string Node(const std::string& op, const std::vector<std::string>& inputs, json attrs) {
    const std::string name = op + "_" + std::to_string(counter_++);
    const std::string out = name + ":0";
    doc_["nodes"].push_back(
        {{"name", name}, {"op", op}, {"inputs", inputs}, {"outputs", {out}}, {"attributes", attrs}});
    return out;
  }

  std::string BatchNorm(const std::string& x) {
    std::vector<float> variance = Values(c_, 0.05f, 2.0f);
    std::vector<float> scale = Values(c_, -2.0f, 2.0f);
    if (Below(4) == 0) scale[0] = 0.0f;
    const std::string s = Init({c_}, scale);
    const std::string b = Init({c_}, Values(c_, -1.0f, 1.0f));
    const std::string m = Init({c_}, Values(c_, -1.0f, 1.0f));
    const std::string v = Init({c_}, variance);
    json attrs = json::object();
    if (Below(2)) attrs["epsilon"] = static_cast<double>(Uniform(1e-6f, 1e-2f));
    return Node("BatchNormalization", {x, s, b, m, v}, attrs);
  }

  // Picks kernel, stride and pad that keep the output at least 1x1.
  bool Geometry(std::uint32_t* k, std::uint32_t* s, std::uint32_t* p) {
    *k = Below(2) ? 3 : 1;
    *s = 1 + Below(2);
    *p = *k == 3 ? Below(2) : 0;
    return h_ + 2 * *p >= *k && w_ + 2 * *p >= *k;
  }

  void Conv(const std::string& x, bool binary_weights, std::uint32_t k, std::uint32_t s,
            std::uint32_t p, std::uint32_t out) {
    const std::size_t count = static_cast<std::size_t>(out) * c_ * k * k;
    const std::string w =
        Init({out, c_, k, k}, binary_weights ? Signs(count) : Values(count, -1.0f, 1.0f));
    std::vector<std::string> inputs = {x, w};
    if (Below(2)) inputs.push_back(Init({out}, Values(out, -2.0f, 2.0f)));
    json attrs = {{"kernel_shape", {k, k}}, {"strides", {s, s}}, {"pads", {p, p, p, p}}};
    if (Below(3) == 0) {
      attrs["dilations"] = {1, 1};
      attrs["group"] = 1;
    }
    cur_ = Node("Conv", inputs, attrs);
    c_ = out;
    h_ = (h_ + 2 * p - k) / s + 1;
    w_ = (w_ + 2 * p - k) / s + 1;
  }

  std::uint32_t OutChannels() { return Below(6) == 0 ? 60 + Below(100) : 1 + Below(24); }

  void BinaryConv(bool with_bn) {
    std::uint32_t k, s, p;
    if (!Geometry(&k, &s, &p)) return;
    std::string x = with_bn ? BatchNorm(cur_) : cur_;
    x = Node("Sign", {x}, json::object());
    Conv(x, true, k, s, p, OutChannels());
  }

  void FloatConv() {
    std::uint32_t k, s, p;
    if (!Geometry(&k, &s, &p)) return;
    std::string x = cur_;
    if (Below(2)) x = Node("Sign", {x}, json::object());
    Conv(x, false, k, s, p, 1 + Below(16));
  }

  void Pool() {
    const std::uint32_t k = 2 + Below(2);
    const std::uint32_t s = 1 + Below(2);
    const std::uint32_t p = Below(2);
    if (h_ + 2 * p < k || w_ + 2 * p < k) return;
    const bool max = Below(2);
    json attrs = {{"kernel_shape", {k, k}}, {"strides", {s, s}}, {"pads", {p, p, p, p}}};
    if (!max) attrs["count_include_pad"] = 0;
    cur_ = Node(max ? "MaxPool" : "AveragePool", {cur_}, attrs);
    h_ = (h_ + 2 * p - k) / s + 1;
    w_ = (w_ + 2 * p - k) / s + 1;
  }

  void Residual() {
    const std::string shortcut = cur_;
    const std::string sign = Node("Sign", {cur_}, json::object());
    Conv(sign, true, 3, 1, 1, c_);
    const std::string branch = BatchNorm(cur_);
    cur_ = Node("Add", {shortcut, branch}, json::object());
  }

  void Head() {
    if (h_ * w_ != 1 || Below(2)) cur_ = Node("Flatten", {cur_}, {{"axis", 1}});
    const std::uint32_t k = c_ * h_ * w_;
    const std::uint32_t n = 1 + Below(10);
    const bool trans_b = Below(2);
    const std::string b = trans_b ? Init({n, k}, Values(static_cast<std::size_t>(n) * k, -1.0f, 1.0f))
                                  : Init({k, n}, Values(static_cast<std::size_t>(n) * k, -1.0f, 1.0f));
    std::vector<std::string> inputs = {cur_, b};
    if (Below(2)) inputs.push_back(Init({n}, Values(n, -1.0f, 1.0f)));
    json attrs = {{"transB", trans_b ? 1 : 0}};
    if (Below(2)) attrs["alpha"] = 1.0;
    cur_ = Node("Gemm", inputs, attrs);
    c_ = n;
    h_ = w_ = 1;
  }

  Rng rng_;
  json doc_;
  std::string cur_;
  std::uint32_t c_ = 0, h_ = 0, w_ = 0;
  std::size_t counter_ = 0;
};

std::vector<double> Attr(const json& node, const char* key, std::vector<double> fallback) {
  if (!node.contains("attributes") || !node["attributes"].contains(key)) return fallback;
  const json& v = node["attributes"][key];
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

struct Weight {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

std::map<std::string, Weight> Weights(const json& doc) {
  std::map<std::string, Weight> out;
  for (const json& t : doc["initializers"]) {
    out[t["name"]] = Weight{t["dims"].get<std::vector<std::uint32_t>>(),
                            t["values"].get<std::vector<float>>()};
  }
  return out;
}

std::map<std::string, std::string> Producers(const json& doc) {
  std::map<std::string, std::string> out;
  for (const json& n : doc["nodes"]) out[n["outputs"][0]] = n["op"];
  return out;
}

ConvParams Geometry(const json& node, std::uint32_t kh, std::uint32_t kw, std::uint32_t c) {
  const std::vector<double> k = Attr(node, "kernel_shape", {double(kh), double(kw)});
  const std::vector<double> s = Attr(node, "strides", {1, 1});
  const std::vector<double> p = Attr(node, "pads", {0, 0, 0, 0});
  return ConvParams{static_cast<std::uint32_t>(k[0]), static_cast<std::uint32_t>(k[1]),
                    static_cast<std::uint32_t>(s[0]), static_cast<std::uint32_t>(s[1]),
                    static_cast<std::uint32_t>(p[0]), static_cast<std::uint32_t>(p[1]), c};
}

FloatTensor Pool(const FloatTensor& x, const ConvParams& p, bool max) {
  const Dims& d = x.dims();
  const std::uint32_t oh = (d.h + 2 * p.pad_h - p.kernel_h) / p.stride_h + 1;
  const std::uint32_t ow = (d.w + 2 * p.pad_w - p.kernel_w) / p.stride_w + 1;
  FloatTensor out(Dims{d.n, d.c, oh, ow}, Layout::kNCHW);
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t y = 0; y < oh; ++y)
        for (std::uint32_t xo = 0; xo < ow; ++xo) {
          float acc = max ? -std::numeric_limits<float>::infinity() : 0.0f;
          std::uint32_t taps = 0;
          for (std::uint32_t ky = 0; ky < p.kernel_h; ++ky)
            for (std::uint32_t kx = 0; kx < p.kernel_w; ++kx) {
              const long iy = static_cast<long>(y * p.stride_h + ky) - p.pad_h;
              const long ix = static_cast<long>(xo * p.stride_w + kx) - p.pad_w;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(d.h) || ix >= static_cast<long>(d.w)) {
                continue;
              }
              const float v = x.at(n, c, static_cast<std::uint32_t>(iy), static_cast<std::uint32_t>(ix));
              if (max) {
                acc = v > acc ? v : acc;
              } else {
                acc += v;
              }
              ++taps;
            }
          out.at(n, c, y, xo) = max ? acc : acc / static_cast<float>(taps);
        }
  return out;
}

FloatTensor Eval(const json& node, const std::map<std::string, FloatTensor>& values,
                 const std::map<std::string, Weight>& weights,
                 const std::set<std::string>& binary) {
  const std::string op = node["op"];
  const std::vector<std::string> in = node["inputs"];
  const FloatTensor& x = values.at(in[0]);
  const Dims& d = x.dims();
  FloatTensor out(d, Layout::kNCHW);
  auto& o = out.data();
  const auto& xv = x.data();

  if (op == "Sign") {
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::signbit(xv[i]) ? -1.0f : 1.0f;
  } else if (op == "Relu") {
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = xv[i] > 0.0f ? xv[i] : 0.0f;
  } else if (op == "Add") {
    const auto& yv = values.at(in[1]).data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = xv[i] + yv[i];
  } else if (op == "BatchNormalization") {
    const auto& s = weights.at(in[1]).values;
    const auto& b = weights.at(in[2]).values;
    const auto& m = weights.at(in[3]).values;
    const auto& v = weights.at(in[4]).values;
    const float eps = static_cast<float>(Attr(node, "epsilon", {1e-5})[0]);
    for (std::uint32_t n = 0; n < d.n; ++n)
      for (std::uint32_t c = 0; c < d.c; ++c) {
        const float denom = std::sqrt(v[c] + eps);
        for (std::uint32_t h = 0; h < d.h; ++h)
          for (std::uint32_t w = 0; w < d.w; ++w) {
            out.at(n, c, h, w) = (x.at(n, c, h, w) - m[c]) / denom * s[c] + b[c];
          }
      }
  } else if (op == "Conv") {
    const Weight& wt = weights.at(in[1]);
    const FloatTensor filt(Dims{wt.dims[0], wt.dims[1], wt.dims[2], wt.dims[3]}, Layout::kNCHW,
                           wt.values);
    const ConvParams p = Geometry(node, wt.dims[2], wt.dims[3], d.c);
    std::vector<float> bias;
    if (in.size() == 3) bias = weights.at(in[2]).values;
    if (binary.count(node["name"])) {
      const IntTensor dots = BinaryConvOracle(x, filt, p);
      out = FloatTensor(dots.dims, Layout::kNCHW);
      for (std::size_t i = 0; i < dots.data.size(); ++i) {
        float v = static_cast<float>(dots.data[i]);
        if (!bias.empty()) v = v + bias[(i / (dots.dims.h * dots.dims.w)) % dots.dims.c];
        out.data()[i] = v;
      }
    } else {
      out = NaiveConvF32(x, filt, bias, p);
    }
  } else if (op == "MaxPool" || op == "AveragePool") {
    const std::vector<double> k = Attr(node, "kernel_shape", {});
    out = Pool(x, Geometry(node, static_cast<std::uint32_t>(k[0]), static_cast<std::uint32_t>(k[1]), d.c),
               op == "MaxPool");
  } else if (op == "GlobalAveragePool") {
    out = FloatTensor(Dims{d.n, d.c, 1, 1}, Layout::kNCHW);
    for (std::uint32_t n = 0; n < d.n; ++n)
      for (std::uint32_t c = 0; c < d.c; ++c) {
        float sum = 0.0f;
        for (std::uint32_t h = 0; h < d.h; ++h)
          for (std::uint32_t w = 0; w < d.w; ++w) sum += x.at(n, c, h, w);
        out.at(n, c, 0, 0) = sum / static_cast<float>(d.h * d.w);
      }
  } else if (op == "Flatten") {
    out = FloatTensor(Dims{d.n, d.c * d.h * d.w, 1, 1}, Layout::kNCHW, xv);
  } else if (op == "Gemm") {
    const Weight& b = weights.at(in[1]);
    const bool trans_b = Attr(node, "transB", {0})[0] != 0;
    const std::uint32_t k = d.c * d.h * d.w;
    const std::uint32_t nout = trans_b ? b.dims[0] : b.dims[1];
    out = FloatTensor(Dims{d.n, nout, 1, 1}, Layout::kNCHW);
    for (std::uint32_t n = 0; n < d.n; ++n)
      for (std::uint32_t j = 0; j < nout; ++j) {
        float acc = 0.0f;
        for (std::uint32_t i = 0; i < k; ++i) {
          const float bij = trans_b ? b.values[static_cast<std::size_t>(j) * k + i]
                                    : b.values[static_cast<std::size_t>(i) * nout + j];
          acc += xv[static_cast<std::size_t>(n) * k + i] * bij;
        }
        if (in.size() == 3) acc = acc + weights.at(in[2]).values[j];
        out.at(n, j, 0, 0) = acc;
      }
  } else {
    throw std::runtime_error("oracle: unsupported op " + op);
  }
  return out;
}

}  // namespace

nlohmann::json RandomInterchangeGraph(std::uint64_t seed) { return Generator(seed).Build(); }

Dims InputDims(const nlohmann::json& doc) {
  const auto d = doc["inputs"][0]["dims"].get<std::vector<std::uint32_t>>();
  return Dims{d[0], d[1], d[2], d[3]};
}

std::set<std::string> BinaryConvNodes(const nlohmann::json& doc) {
  const auto producers = Producers(doc);
  const auto weights = Weights(doc);
  std::set<std::string> out;
  for (const json& n : doc["nodes"]) {
    if (n["op"] != "Conv") continue;
    auto p = producers.find(n["inputs"][0]);
    if (p == producers.end() || p->second != "Sign") continue;
    auto w = weights.find(n["inputs"][1]);
    if (w == weights.end()) continue;
    if (std::all_of(w->second.values.begin(), w->second.values.end(),
                    [](float v) { return v == 1.0f || v == -1.0f; })) {
      out.insert(n["name"]);
    }
  }
  return out;
}

FloatTensor EvaluateOracle(const nlohmann::json& doc, const FloatTensor& input) {
  const auto weights = Weights(doc);
  const auto binary = BinaryConvNodes(doc);
  std::map<std::string, FloatTensor> values;
  FloatTensor nchw(input.dims(), Layout::kNCHW);
  const Dims& d = input.dims();
  for (std::uint32_t n = 0; n < d.n; ++n)
    for (std::uint32_t c = 0; c < d.c; ++c)
      for (std::uint32_t h = 0; h < d.h; ++h)
        for (std::uint32_t w = 0; w < d.w; ++w) nchw.at(n, c, h, w) = input.at(n, c, h, w);
  values.emplace(doc["inputs"][0]["name"], std::move(nchw));
  for (const json& node : doc["nodes"]) {
    values.insert_or_assign(node["outputs"][0].get<std::string>(), Eval(node, values, weights, binary));
  }
  return values.at(doc["output"]);
}

}  // namespace xbnn::testing
