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

#include "xbnn/model_io.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "xbnn/error.h"
#include "xbnn/layout.h"

namespace xbnn {
namespace {

constexpr char kMagic[4] = {'D', 'A', 'B', 'N'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8;
constexpr std::size_t kTrailerBytes = 4;

enum AttrKey : std::uint8_t { kKernel = 1, kStride = 2, kPad = 3, kEpsilon = 4 };
enum InitKind : std::uint8_t { kFloat32 = 0, kPackedBits = 1 };

class ByteWriter {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void I32(std::int32_t v) { U32(static_cast<std::uint32_t>(v)); }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void Raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string section)
      : bytes_(bytes), section_(std::move(section)) {}

  std::uint8_t U8() { return Take(1)[0]; }
  std::uint32_t U32() {
    const auto b = Take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t U64() {
    const auto b = Take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  float F32() { return std::bit_cast<float>(U32()); }
  std::span<const std::uint8_t> Take(std::size_t n) {
    Check(n <= bytes_.size() - pos_, ErrorCode::kMalformedModel,
          section_ + " section overruns its declared length");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& section() const { return section_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string section_;
};

class StringTable {
 public:
  std::uint32_t Intern(const std::string& s) {
    auto [it, inserted] = index_.emplace(s, static_cast<std::uint32_t>(strings_.size()));
    if (inserted) strings_.push_back(s);
    return it->second;
  }
  const std::vector<std::string>& strings() const { return strings_; }

 private:
  std::map<std::string, std::uint32_t> index_;
  std::vector<std::string> strings_;
};

bool HasGeometry(OpKind op) {
  return op == OpKind::kBinaryConv || op == OpKind::kFloatConv || op == OpKind::kMaxPool ||
         op == OpKind::kAvgPool;
}

bool HasEpsilon(OpKind op) { return op == OpKind::kBatchNorm || op == OpKind::kBnSign; }

void WritePair(ByteWriter& w, AttrKey key, std::int32_t a, std::int32_t b, std::int32_t c,
               std::int32_t d) {
  w.U8(key);
  w.I32(a);
  w.I32(b);
  w.I32(c);
  w.I32(d);
}

void WriteDims(ByteWriter& w, const Dims& d) {
  w.U8(4);
  w.U32(d.n);
  w.U32(d.c);
  w.U32(d.h);
  w.U32(d.w);
}

Dims ReadDims(ByteReader& r) {
  const std::uint8_t rank = r.U8();
  Check(rank == 4, ErrorCode::kMalformedModel, "only rank-4 extents are supported");
  Dims d;
  d.n = r.U32();
  d.c = r.U32();
  d.h = r.U32();
  d.w = r.U32();
  return d;
}

std::vector<std::uint8_t> WriteGraphSection(const Graph& g, StringTable& strings) {
  ByteWriter w;
  w.U32(static_cast<std::uint32_t>(g.nodes.size()));
  for (const Node& node : g.nodes) {
    w.U8(static_cast<std::uint8_t>(node.op));
    w.U32(strings.Intern(node.name));
    w.U32(static_cast<std::uint32_t>(node.inputs.size()));
    for (const std::string& s : node.inputs) w.U32(strings.Intern(s));
    w.U32(strings.Intern(node.output));
    w.U32(static_cast<std::uint32_t>(node.weights.size()));
    for (const std::string& s : node.weights) w.U32(strings.Intern(s));

    const Attributes& a = node.attrs;
    if (HasGeometry(node.op)) {
      w.U8(3);
      WritePair(w, kKernel, a.kernel[0], a.kernel[1], 0, 0);
      WritePair(w, kStride, a.stride[0], a.stride[1], 0, 0);
      WritePair(w, kPad, a.pad[0], a.pad[1], a.pad[0], a.pad[1]);
    } else if (HasEpsilon(node.op)) {
      w.U8(1);
      w.U8(kEpsilon);
      w.F32(a.epsilon);
    } else {
      w.U8(0);
    }
  }
  w.U32(static_cast<std::uint32_t>(strings.strings().size()));
  for (const std::string& s : strings.strings()) {
    w.U32(static_cast<std::uint32_t>(s.size()));
    w.Raw({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  }
  w.U32(strings.Intern(g.input_name));
  WriteDims(w, g.input_dims);
  w.U32(strings.Intern(g.output));
  return std::move(w.bytes());
}

std::vector<std::uint8_t> WriteWeightSection(const Graph& g, StringTable& strings) {
  ByteWriter w;
  w.U32(static_cast<std::uint32_t>(g.initializers.size()));
  for (const NamedInitializer& init : g.initializers) {
    w.U32(strings.Intern(init.name));
    if (const auto* t = std::get_if<FloatTensor>(&init.value)) {
      w.U8(kFloat32);
      WriteDims(w, t->dims());
      const FloatTensor nchw = ConvertLayout(*t, Layout::kNCHW);
      for (float v : nchw.data()) w.F32(v);
    } else {
      const auto& f = std::get<PackedFilter>(init.value);
      w.U8(kPackedBits);
      WriteDims(w, Dims{f.out_channels, f.in_channels, f.kernel_h, f.kernel_w});
      w.U32(f.group_bits());
      const std::size_t group_bytes = f.group_bits() / 8;
      for (std::size_t m = 0; m < f.matrix.rows(); ++m)
        for (std::size_t k = 0; k < f.matrix.cols(); ++k) {
          const BitWord* vec = f.matrix.vec(m, k);
          for (std::size_t b = 0; b < group_bytes; ++b) {
            w.U8(static_cast<std::uint8_t>(vec[b / 8] >> (8 * (b % 8))));
          }
        }
    }
  }
  return std::move(w.bytes());
}

// Node as stored: names are string-table indices, resolved once the table
// (which follows the nodes) has been read.
struct StoredNode {
  Node node;
  std::uint32_t name = 0;
  std::vector<std::uint32_t> inputs;
  std::uint32_t output = 0;
  std::vector<std::uint32_t> weights;
};

std::uint32_t CountField(ByteReader& r) {
  const std::uint32_t count = r.U32();
  Check(count <= (1u << 24), ErrorCode::kMalformedModel, "implausible element count");
  return count;
}

StoredNode ReadNode(ByteReader& r) {
  StoredNode stored;
  Node& node = stored.node;
  const std::uint8_t op = r.U8();
  Check(op <= kMaxOpKind, ErrorCode::kMalformedModel, "unknown op code " + std::to_string(op));
  node.op = static_cast<OpKind>(op);
  stored.name = r.U32();
  stored.inputs.resize(CountField(r));
  for (auto& i : stored.inputs) i = r.U32();
  stored.output = r.U32();
  stored.weights.resize(CountField(r));
  for (auto& i : stored.weights) i = r.U32();

  const std::uint8_t attrs = r.U8();
  for (std::uint8_t i = 0; i < attrs; ++i) {
    const std::uint8_t key = r.U8();
    if (key == kEpsilon) {
      node.attrs.epsilon = r.F32();
      continue;
    }
    Check(key == kKernel || key == kStride || key == kPad, ErrorCode::kMalformedModel,
          "unknown attribute key " + std::to_string(key));
    std::int32_t v[4];
    for (auto& x : v) x = r.I32();
    Check(v[0] >= 0 && v[1] >= 0, ErrorCode::kMalformedModel, "negative attribute value");
    std::array<std::uint32_t, 2> pair{static_cast<std::uint32_t>(v[0]),
                                      static_cast<std::uint32_t>(v[1])};
    if (key == kKernel) node.attrs.kernel = pair;
    if (key == kStride) node.attrs.stride = pair;
    if (key == kPad) {
      Check(v[2] == v[0] && v[3] == v[1], ErrorCode::kMalformedModel,
            "asymmetric padding is not supported");
      node.attrs.pad = pair;
    }
  }
  return stored;
}

const std::string& Lookup(const std::vector<std::string>& strings, std::uint32_t index) {
  Check(index < strings.size(), ErrorCode::kMalformedModel,
        "string index " + std::to_string(index) + " out of range");
  return strings[index];
}

PackedFilter ReadPackedFilter(ByteReader& r) {
  const Dims d = ReadDims(r);
  const std::uint32_t group_bits = r.U32();
  Check(group_bits >= 8 && group_bits % 8 == 0, ErrorCode::kMalformedModel,
        "invalid group width " + std::to_string(group_bits));
  Check(d.count() > 0, ErrorCode::kMalformedModel, "packed filter has empty extents");
  PackedFilter f;
  f.out_channels = d.n;
  f.in_channels = d.c;
  f.kernel_h = d.h;
  f.kernel_w = d.w;
  const std::uint32_t groups = (d.c + group_bits - 1) / group_bits;
  const std::uint64_t payload =
      static_cast<std::uint64_t>(d.n) * d.h * d.w * groups * (group_bits / 8);
  Check(payload <= r.remaining(), ErrorCode::kMalformedModel,
        "packed filter is larger than the weight section");
  f.matrix = BinMatrix(d.n, static_cast<std::size_t>(d.h) * d.w * groups, group_bits);
  const std::size_t group_bytes = group_bits / 8;
  const std::uint32_t last_group_channels = d.c - (groups - 1) * group_bits;
  for (std::size_t m = 0; m < f.matrix.rows(); ++m)
    for (std::size_t k = 0; k < f.matrix.cols(); ++k) {
      BitWord* vec = f.matrix.vec(m, k);
      const auto bytes = r.Take(group_bytes);
      for (std::size_t b = 0; b < group_bytes; ++b) {
        vec[b / 8] |= static_cast<BitWord>(bytes[b]) << (8 * (b % 8));
      }
      if (k % groups == groups - 1) {
        for (std::uint32_t bit = last_group_channels; bit < group_bits; ++bit) {
          Check(((vec[bit / kWordBits] >> (bit % kWordBits)) & 1u) == 0,
                ErrorCode::kMalformedModel, "packed filter has non-zero channel padding bits");
        }
      }
    }
  return f;
}

}  // namespace

std::vector<std::uint8_t> SerializeModel(const Model& model) {
  model.graph.Validate();
  StringTable strings;
  // Initializer names are interned first so that the table written in the
  // graph section covers the weight section too.
  for (const NamedInitializer& init : model.graph.initializers) strings.Intern(init.name);
  const std::vector<std::uint8_t> graph = WriteGraphSection(model.graph, strings);
  const std::vector<std::uint8_t> weights = WriteWeightSection(model.graph, strings);

  ByteWriter w;
  w.Raw({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
  w.U32(model.version);
  w.U32(static_cast<std::uint32_t>(graph.size()));
  w.U64(weights.size());
  w.Raw(graph);
  w.Raw(weights);
  w.U32(static_cast<std::uint32_t>(crc32(0L, w.bytes().data(), static_cast<uInt>(w.bytes().size()))));
  return std::move(w.bytes());
}

Model DeserializeModel(std::span<const std::uint8_t> bytes) {
  Check(bytes.size() >= 4, ErrorCode::kTruncated, "truncated payload: file shorter than magic");
  Check(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorCode::kBadMagic, "bad magic");
  Check(bytes.size() >= kHeaderBytes, ErrorCode::kTruncated, "truncated payload: short header");
  ByteReader header(bytes.subspan(4, kHeaderBytes - 4), "header");
  const std::uint32_t version = header.U32();
  Check(version == kFormatVersion, ErrorCode::kUnsupportedVersion,
        "unsupported version " + std::to_string(version));
  const std::uint64_t graph_len = header.U32();
  const std::uint64_t weight_len = header.U64();
  const std::uint64_t expected = kHeaderBytes + graph_len + weight_len + kTrailerBytes;
  Check(weight_len < (std::uint64_t{1} << 48) && bytes.size() >= expected, ErrorCode::kTruncated,
        "truncated payload: expected " + std::to_string(expected) + " bytes, got " +
            std::to_string(bytes.size()));
  Check(bytes.size() == expected, ErrorCode::kMalformedModel, "trailing bytes after checksum");

  const std::size_t body = static_cast<std::size_t>(expected - kTrailerBytes);
  ByteReader trailer(bytes.subspan(body, kTrailerBytes), "trailer");
  const std::uint32_t stored_crc = trailer.U32();
  const auto actual_crc = static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(body)));
  Check(stored_crc == actual_crc, ErrorCode::kChecksumMismatch, "checksum mismatch");

  Model model;
  model.version = version;
  Graph& g = model.graph;

  ByteReader r(bytes.subspan(kHeaderBytes, static_cast<std::size_t>(graph_len)), "graph");
  std::vector<StoredNode> stored(CountField(r));
  for (StoredNode& s : stored) s = ReadNode(r);
  std::vector<std::string> strings(CountField(r));
  for (std::string& s : strings) {
    const auto chars = r.Take(r.U32());
    s.assign(chars.begin(), chars.end());
  }
  g.input_name = Lookup(strings, r.U32());
  g.input_dims = ReadDims(r);
  g.output = Lookup(strings, r.U32());
  Check(r.done(), ErrorCode::kMalformedModel, "unused bytes in graph section");
  for (StoredNode& s : stored) {
    Node node = std::move(s.node);
    node.name = Lookup(strings, s.name);
    node.output = Lookup(strings, s.output);
    for (std::uint32_t i : s.inputs) node.inputs.push_back(Lookup(strings, i));
    for (std::uint32_t i : s.weights) node.weights.push_back(Lookup(strings, i));
    g.nodes.push_back(std::move(node));
  }

  ByteReader wr(bytes.subspan(kHeaderBytes + static_cast<std::size_t>(graph_len),
                              static_cast<std::size_t>(weight_len)),
                "weight");
  const std::uint32_t init_count = CountField(wr);
  for (std::uint32_t i = 0; i < init_count; ++i) {
    NamedInitializer init;
    init.name = Lookup(strings, wr.U32());
    const std::uint8_t kind = wr.U8();
    if (kind == kFloat32) {
      const Dims d = ReadDims(wr);
      Check(d.count() * 4 <= wr.remaining(), ErrorCode::kMalformedModel,
            "initializer '" + init.name + "' is larger than the weight section");
      std::vector<float> data(d.count());
      for (float& v : data) v = wr.F32();
      init.value = FloatTensor(d, Layout::kNCHW, std::move(data));
    } else if (kind == kPackedBits) {
      init.value = ReadPackedFilter(wr);
    } else {
      Fail(ErrorCode::kMalformedModel, "unknown initializer kind " + std::to_string(kind));
    }
    g.initializers.push_back(std::move(init));
  }
  Check(wr.done(), ErrorCode::kMalformedModel, "unused bytes in weight section");

  g.Validate();
  return model;
}

std::vector<std::uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check(in.good(), ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  Check(!in.bad(), ErrorCode::kIo, "error reading '" + path + "'");
  return bytes;
}

void WriteFileBytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Check(out.good(), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  Check(out.good(), ErrorCode::kIo, "error writing '" + path + "'");
}

void SaveModel(const Model& model, const std::string& path) {
  WriteFileBytes(path, SerializeModel(model));
}

Model LoadModel(const std::string& path) { return DeserializeModel(ReadFileBytes(path)); }

std::vector<std::uint8_t> SerializeRawTensor(const FloatTensor& tensor) {
  const FloatTensor nhwc = ConvertLayout(tensor, Layout::kNHWC);
  ByteWriter w;
  w.U32(nhwc.dims().n);
  w.U32(nhwc.dims().c);
  w.U32(nhwc.dims().h);
  w.U32(nhwc.dims().w);
  for (float v : nhwc.data()) w.F32(v);
  return std::move(w.bytes());
}

FloatTensor ReadRawTensor(const std::string& path) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  Check(bytes.size() >= 16, ErrorCode::kIo, "truncated input file '" + path + "'");
  ByteReader r(bytes, "tensor");
  Dims d;
  d.n = r.U32();
  d.c = r.U32();
  d.h = r.U32();
  d.w = r.U32();
  const std::uint64_t needed = 16 + static_cast<std::uint64_t>(d.count()) * 4;
  Check(bytes.size() >= needed, ErrorCode::kIo,
        "truncated input file '" + path + "': dims " + d.ToString() + " need " +
            std::to_string(needed) + " bytes, file has " + std::to_string(bytes.size()));
  Check(bytes.size() == needed, ErrorCode::kShapeMismatch,
        "input file '" + path + "' has trailing bytes after dims " + d.ToString());
  std::vector<float> data(d.count());
  for (float& v : data) v = r.F32();
  return FloatTensor(d, Layout::kNHWC, std::move(data));
}

void WriteRawTensor(const FloatTensor& tensor, const std::string& path) {
  WriteFileBytes(path, SerializeRawTensor(tensor));
}

}  // namespace xbnn
