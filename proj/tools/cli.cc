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

// xbnn command-line front end: convert, run, bench, bireal.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "xbnn/c_api.h"

namespace {

int Report(xbnn_status status) {
  if (status == XBNN_OK) return 0;
  std::fprintf(stderr, "xbnn: %s: %s\n", xbnn_status_string(status), xbnn_last_error());
  return status == XBNN_IO ? 2 : 1;
}

bool SeedFromEnv(std::uint64_t* seed) {
  const char* text = std::getenv("BNN_SEED");
  if (text == nullptr || *text == '\0') return true;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text, &end, 0);
  if (errno != 0 || *end != '\0' || text[0] == '-') {
    std::fprintf(stderr, "xbnn: BNN_SEED is not an unsigned 64-bit integer: '%s'\n", text);
    return false;
  }
  *seed = v;
  return true;
}

int Convert(const std::string& input, const std::string& output, std::uint32_t c2, bool fuse) {
  const std::string report = output + ".report.json";
  return Report(xbnn_convert_file(input.c_str(), output.c_str(), report.c_str(), c2, fuse ? 1 : 0));
}

int Run(const std::string& model_path, const std::string& input_path, const std::string& output) {
  xbnn_model* model = nullptr;
  if (int rc = Report(xbnn_model_load(model_path.c_str(), &model))) return rc;
  xbnn_tensor* input = nullptr;
  xbnn_tensor* result = nullptr;
  int rc = Report(xbnn_tensor_load(input_path.c_str(), &input));
  if (rc == 0) rc = Report(xbnn_model_execute(model, input, &result));
  if (rc == 0) {
    rc = Report(xbnn_tensor_save(result, output.empty() ? "/dev/stdout" : output.c_str()));
  }
  xbnn_tensor_free(result);
  xbnn_tensor_free(input);
  xbnn_model_free(model);
  return rc;
}

void PrintCsv(const char* csv, void*) { std::fputs(csv, stdout); }

int Bench(const std::string& suite, std::uint32_t repeat, const std::string& sizes) {
  std::uint64_t seed = 0;
  if (!SeedFromEnv(&seed)) return 1;
  return Report(xbnn_bench(suite.c_str(), repeat, sizes.c_str(), seed, PrintCsv, nullptr));
}

int BiReal(const std::string& output, std::uint64_t seed, std::uint32_t c2, std::uint32_t size) {
  xbnn_model* model = nullptr;
  int rc = Report(xbnn_model_build_bireal18(seed, c2, size, &model));
  if (rc == 0) rc = Report(xbnn_model_save(model, output.c_str()));
  xbnn_model_free(model);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary neural network inference engine"};
  app.require_subcommand(1);

  std::string input, output, model_path;
  std::uint32_t c2 = 128;
  bool fuse = false;
  auto* convert = app.add_subcommand("convert", "Convert an interchange JSON graph to a packed model");
  convert->add_option("input", input, "Interchange JSON file")->required();
  convert->add_option("output", output, "Model file to write")->required();
  convert->add_option("--c2", c2, "Channel group width in bits")->capture_default_str();
  convert->add_flag("--fuse-bn-sign", fuse, "Fold BatchNormalization+Sign pairs into thresholds");

  auto* run = app.add_subcommand("run", "Execute a model on a raw tensor file");
  run->add_option("model", model_path, "Model file")->required();
  run->add_option("input", input, "Raw tensor file")->required();
  run->add_option("--output", output, "Output tensor file (default: stdout)");

  std::string suite = "packing", sizes = "default";
  std::uint32_t repeat = 50;
  auto* bench = app.add_subcommand("bench", "Time kernel variants and print CSV");
  bench->add_option("--suite", suite, "packing, conv or net")->capture_default_str();
  bench->add_option("--repeat", repeat, "Timed repetitions per variant")->capture_default_str();
  bench->add_option("--sizes", sizes, "Size preset: default or small")->capture_default_str();

  std::uint64_t seed = 0;
  std::uint32_t input_size = 224;
  auto* bireal = app.add_subcommand("bireal", "Write a random-weight Bi-Real-Net-18 model");
  bireal->add_option("output", output, "Model file to write")->required();
  bireal->add_option("--seed", seed, "Weight seed")->capture_default_str();
  bireal->add_option("--c2", c2, "Channel group width in bits")->capture_default_str();
  bireal->add_option("--input-size", input_size, "Square input side")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*convert) return Convert(input, output, c2, fuse);
  if (*run) return Run(model_path, input, output);
  if (*bench) return Bench(suite, repeat, sizes);
  return BiReal(output, seed, c2, input_size);
}
