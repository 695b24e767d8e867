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

#include "xbnn/bench.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "xbnn/bitpack.h"
#include "xbnn/builder.h"
#include "xbnn/error.h"
#include "xbnn/graph.h"
#include "xbnn/kernels.h"
#include "xbnn/layout.h"

namespace xbnn {
namespace {

struct Variant {
  std::string name;
  std::function<void()> run;
};

std::uint64_t MedianNs(const std::function<void()>& fn, std::uint32_t repeat) {
  fn();  // warm-up
  std::vector<std::uint64_t> samples;
  samples.reserve(repeat);
  for (std::uint32_t i = 0; i < repeat; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count()));
  }
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return std::max<std::uint64_t>(samples[samples.size() / 2], 1);
}

// First variant is the baseline.
void TimeCase(BenchReport& report, const BenchOptions& options, const std::string& suite,
              const std::string& case_name, const std::string& config,
              const std::vector<Variant>& variants) {
  std::uint64_t baseline = 0;
  for (const Variant& v : variants) {
    BenchRecord r;
    r.suite = suite;
    r.case_name = case_name;
    r.variant = v.name;
    r.config = config;
    r.repetitions = options.repeat;
    r.median_ns = MedianNs(v.run, options.repeat);
    if (baseline == 0) baseline = r.median_ns;
    r.ratio = static_cast<double>(baseline) / static_cast<double>(r.median_ns);
    report.records.push_back(std::move(r));
  }
}

FloatTensor RandomTensor(const Dims& dims, std::mt19937_64& rng) {
  FloatTensor t(dims, Layout::kNHWC);
  for (float& v : t.data()) v = static_cast<float>((rng() >> 40) * 0x1p-24) * 2.0f - 1.0f;
  return t;
}

FloatTensor RandomSigns(const Dims& dims, std::mt19937_64& rng) {
  FloatTensor t(dims, Layout::kNCHW);
  for (float& v : t.data()) v = (rng() & 1) ? -1.0f : 1.0f;
  return t;
}

void PackingSuite(BenchReport& report, const BenchOptions& options, std::mt19937_64& rng) {
  const bool small = options.sizes == "small";
  const std::vector<std::uint32_t> sides = small ? std::vector<std::uint32_t>{8, 16}
                                                 : std::vector<std::uint32_t>{32, 64, 128};
  const std::vector<std::uint32_t> channels = small ? std::vector<std::uint32_t>{64, 128}
                                                    : std::vector<std::uint32_t>{64, 128, 256};
  for (std::uint32_t s : sides) {
    for (std::uint32_t c : channels) {
      const FloatTensor t = RandomTensor(Dims{1, c, s, s}, rng);
      const std::size_t pixels = static_cast<std::size_t>(s) * s;
      std::vector<PackedBits> naive(pixels);
      std::vector<PackedBits> gathered(pixels);
      const auto slice = [&](std::size_t p) {
        return std::span<const float>(t.data().data() + p * c, c);
      };
      auto run_naive = [&] {
        for (std::size_t p = 0; p < pixels; ++p) naive[p] = PackNaive(slice(p));
      };
      auto run_signbits = [&] {
        for (std::size_t p = 0; p < pixels; ++p) gathered[p] = PackSignBits(slice(p));
      };
      run_naive();
      run_signbits();
      const std::string name = "hw" + std::to_string(s) + "x" + std::to_string(s) + "_c" + std::to_string(c);
      Check(naive == gathered, ErrorCode::kBenchMismatch, "packing " + name + ": variants disagree");
      TimeCase(report, options, "packing", name, "1x" + std::to_string(c) + "x" + std::to_string(s) + "x" + std::to_string(s),
               {{"naive", run_naive}, {"signbits", run_signbits}});
    }
  }
}

void ConvSuite(BenchReport& report, const BenchOptions& options, std::mt19937_64& rng) {
  using Shape = std::pair<std::uint32_t, std::uint32_t>;  // channels, spatial
  const std::vector<Shape> shapes = options.sizes == "small"
                                        ? std::vector<Shape>{{64, 8}, {128, 4}}
                                        : std::vector<Shape>{{64, 56}, {128, 28}, {256, 14}, {512, 7}};
  for (const auto& [c, s] : shapes) {
    const ConvParams params{3, 3, 1, 1, 1, 1, c};
    const PackedTensor input = PackToNC1HWC2(RandomTensor(Dims{1, c, s, s}, rng), kDefaultGroupBits);
    const BinMatrix filters = PackFilters(RandomSigns(Dims{c, c, 3, 3}, rng), kDefaultGroupBits);
    const std::uint32_t oh = params.OutputHeight(s);
    const std::uint32_t ow = params.OutputWidth(s);

    MatchMatrix via_gemm;
    MatchMatrix via_no_addv;
    MatchMatrix via_direct;
    auto run_bgemm = [&] { via_gemm = Bgemm(filters, Im2ColPacked(input, params)); };
    auto run_no_addv = [&] { via_no_addv = BgemmNoAddv(filters, Im2ColPacked(input, params)); };
    auto run_direct = [&] { via_direct = DirectConvMatches(input, filters, params); };
    run_bgemm();
    run_direct();
    const std::string name = "c" + std::to_string(c) + "_s" + std::to_string(s) + "_k3";
    Check(MatchesToTensor(via_gemm, params, kDefaultGroupBits, oh, ow).data() ==
              MatchesToTensor(via_direct, params, kDefaultGroupBits, oh, ow).data(),
          ErrorCode::kBenchMismatch, "conv " + name + ": bgemm and direct convolution disagree");
    TimeCase(report, options, "conv", name,
             "1x" + std::to_string(c) + "x" + std::to_string(s) + "x" + std::to_string(s) + " 3x3/1 p1",
             {{"bgemm", run_bgemm},
              {"bgemm_no_addv (non-inference)", run_no_addv},
              {"binary_direct_conv", run_direct}});
  }
}

void NetSuite(BenchReport& report, const BenchOptions& options, std::mt19937_64& rng) {
  BiRealOptions net;
  net.seed = options.seed;
  net.input_size = options.sizes == "small" ? 64 : 224;
  const Model model = BuildBiRealNet18(net);
  const FloatTensor input = RandomTensor(model.graph.input_dims, rng);
  FloatTensor out;
  TimeCase(report, options, "net", "bireal18_" + std::to_string(net.input_size),
           model.graph.input_dims.ToString(), {{"execute", [&] { out = Execute(model, input); }}});
}

}  // namespace

std::string BenchReport::ToCsv() const {
  std::string csv = std::string(kBenchCsvHeader) + "\n";
  char ratio[32];
  for (const BenchRecord& r : records) {
    std::snprintf(ratio, sizeof(ratio), "%.4f", r.ratio);
    csv += r.suite + "," + r.case_name + "," + r.variant + "," + std::to_string(r.median_ns) + "," +
           ratio + "\n";
  }
  return csv;
}

BenchReport RunBenchmark(const BenchOptions& options) {
  Check(options.repeat >= 1, ErrorCode::kInvalidArgument, "repeat must be at least 1");
  Check(options.sizes == "default" || options.sizes == "small", ErrorCode::kInvalidArgument,
        "unknown size preset '" + options.sizes + "'");
  std::mt19937_64 rng(options.seed);
  BenchReport report;
  if (options.suite == "packing") {
    PackingSuite(report, options, rng);
  } else if (options.suite == "conv") {
    ConvSuite(report, options, rng);
  } else if (options.suite == "net") {
    NetSuite(report, options, rng);
  } else {
    Fail(ErrorCode::kInvalidArgument, "unknown suite '" + options.suite + "'");
  }
  return report;
}

}  // namespace xbnn
