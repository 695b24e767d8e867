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

#ifndef XBNN_BENCH_H_
#define XBNN_BENCH_H_

#include <cstdint>
#include <string>
#include <vector>

namespace xbnn {

struct BenchRecord {
  std::string suite;
  std::string case_name;
  std::string variant;
  std::string config;
  std::uint32_t repetitions = 0;
  std::uint64_t median_ns = 0;
  double ratio = 1.0;  // baseline median / this median
};

struct BenchReport {
  std::vector<BenchRecord> records;

  // suite,case,variant,median_ns,ratio
  std::string ToCsv() const;
};

struct BenchOptions {
  std::string suite = "packing";  // packing | conv | net
  std::uint32_t repeat = 50;
  std::string sizes = "default";  // default | small
  std::uint64_t seed = 0;
};

inline constexpr const char* kBenchCsvHeader = "suite,case,variant,median_ns,ratio";

// Variants of each case are cross-checked for equal output before any timing;
// a mismatch raises kBenchMismatch.
BenchReport RunBenchmark(const BenchOptions& options);

}  // namespace xbnn

#endif  // XBNN_BENCH_H_
