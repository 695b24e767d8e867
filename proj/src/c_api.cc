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

#include "xbnn/c_api.h"

#include <new>
#include <string>

#include "xbnn/bench.h"
#include "xbnn/builder.h"
#include "xbnn/convert.h"
#include "xbnn/error.h"
#include "xbnn/graph.h"
#include "xbnn/model_io.h"

static_assert(static_cast<int>(xbnn::ErrorCode::kMalformedModel) == XBNN_MALFORMED_MODEL);
static_assert(static_cast<int>(xbnn::ErrorCode::kIo) == XBNN_IO);
static_assert(static_cast<int>(xbnn::ErrorCode::kBenchMismatch) == XBNN_BENCH_MISMATCH);

struct xbnn_model {
  xbnn::Model model;
};

struct xbnn_tensor {
  xbnn::FloatTensor tensor;
};

namespace {

thread_local std::string last_error;

template <typename Fn>
xbnn_status Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return XBNN_OK;
  } catch (const xbnn::Error& e) {
    last_error = e.what();
    return static_cast<xbnn_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return XBNN_INTERNAL;
}

void RequireArg(bool ok, const char* what) {
  xbnn::Check(ok, xbnn::ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

void DimsOut(const xbnn::Dims& d, uint32_t dims[4]) {
  dims[0] = d.n;
  dims[1] = d.c;
  dims[2] = d.h;
  dims[3] = d.w;
}

}  // namespace

extern "C" {

const char* xbnn_version(void) { return "1.0.0"; }

const char* xbnn_last_error(void) { return last_error.c_str(); }

const char* xbnn_status_string(xbnn_status status) {
  switch (status) {
    case XBNN_OK: return "ok";
    case XBNN_INVALID_ARGUMENT: return "invalid argument";
    case XBNN_SHAPE_MISMATCH: return "shape mismatch";
    case XBNN_INDEX_OUT_OF_BOUNDS: return "index out of bounds";
    case XBNN_REDUCTION_OVERFLOW: return "reduction overflow";
    case XBNN_MISSING_INITIALIZER: return "missing initializer";
    case XBNN_BAD_MAGIC: return "bad magic";
    case XBNN_UNSUPPORTED_VERSION: return "unsupported version";
    case XBNN_TRUNCATED: return "truncated";
    case XBNN_CHECKSUM_MISMATCH: return "checksum mismatch";
    case XBNN_MALFORMED_MODEL: return "malformed model";
    case XBNN_PARSE: return "parse error";
    case XBNN_UNKNOWN_OP: return "unknown op";
    case XBNN_UNRESOLVED_NAME: return "unresolved name";
    case XBNN_UNSUPPORTED_ATTRIBUTE: return "unsupported attribute";
    case XBNN_IO: return "i/o error";
    case XBNN_BENCH_MISMATCH: return "benchmark mismatch";
    case XBNN_INTERNAL: return "internal error";
  }
  return "unknown status";
}

xbnn_status xbnn_tensor_create(const uint32_t dims[4], const float* data, xbnn_tensor** out) {
  return Guard([&] {
    RequireArg(dims != nullptr && out != nullptr, "dims and out");
    const xbnn::Dims d{dims[0], dims[1], dims[2], dims[3]};
    xbnn::FloatTensor t(d, xbnn::Layout::kNHWC);
    if (data != nullptr) t.data().assign(data, data + d.count());
    *out = new xbnn_tensor{std::move(t)};
  });
}

void xbnn_tensor_free(xbnn_tensor* tensor) { delete tensor; }

void xbnn_tensor_dims(const xbnn_tensor* tensor, uint32_t dims[4]) {
  DimsOut(tensor->tensor.dims(), dims);
}

size_t xbnn_tensor_size(const xbnn_tensor* tensor) { return tensor->tensor.data().size(); }

const float* xbnn_tensor_data(const xbnn_tensor* tensor) { return tensor->tensor.data().data(); }

xbnn_status xbnn_tensor_load(const char* path, xbnn_tensor** out) {
  return Guard([&] {
    RequireArg(path != nullptr && out != nullptr, "path and out");
    *out = new xbnn_tensor{xbnn::ReadRawTensor(path)};
  });
}

xbnn_status xbnn_tensor_save(const xbnn_tensor* tensor, const char* path) {
  return Guard([&] {
    RequireArg(tensor != nullptr && path != nullptr, "tensor and path");
    xbnn::WriteRawTensor(tensor->tensor, path);
  });
}

xbnn_status xbnn_model_load(const char* path, xbnn_model** out) {
  return Guard([&] {
    RequireArg(path != nullptr && out != nullptr, "path and out");
    *out = new xbnn_model{xbnn::LoadModel(path)};
  });
}

xbnn_status xbnn_model_save(const xbnn_model* model, const char* path) {
  return Guard([&] {
    RequireArg(model != nullptr && path != nullptr, "model and path");
    xbnn::SaveModel(model->model, path);
  });
}

void xbnn_model_free(xbnn_model* model) { delete model; }

void xbnn_model_input_dims(const xbnn_model* model, uint32_t dims[4]) {
  DimsOut(model->model.graph.input_dims, dims);
}

xbnn_status xbnn_model_execute(const xbnn_model* model, const xbnn_tensor* input,
                               xbnn_tensor** out) {
  return Guard([&] {
    RequireArg(model != nullptr && input != nullptr && out != nullptr, "model, input and out");
    *out = new xbnn_tensor{xbnn::Execute(model->model, input->tensor)};
  });
}

xbnn_status xbnn_model_build_bireal18(uint64_t seed, uint32_t group_bits, uint32_t input_size,
                                      xbnn_model** out) {
  return Guard([&] {
    RequireArg(out != nullptr, "out");
    xbnn::BiRealOptions options;
    options.seed = seed;
    options.group_bits = group_bits;
    options.input_size = input_size;
    *out = new xbnn_model{xbnn::BuildBiRealNet18(options)};
  });
}

xbnn_status xbnn_convert_file(const char* json_path, const char* model_path,
                              const char* report_path, uint32_t group_bits, int fuse_bn_sign) {
  return Guard([&] {
    RequireArg(json_path != nullptr && model_path != nullptr && report_path != nullptr, "paths");
    const std::vector<std::uint8_t> bytes = xbnn::ReadFileBytes(json_path);
    const xbnn::InterchangeGraph graph =
        xbnn::ParseInterchange(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    xbnn::ConvertOptions options;
    options.group_bits = group_bits;
    options.fuse_bn_sign = fuse_bn_sign != 0;
    const xbnn::Conversion result = xbnn::ConvertModel(graph, options);
    xbnn::SaveModel(result.model, model_path);
    const std::string report = result.report.ToJson() + "\n";
    xbnn::WriteFileBytes(report_path, std::span(reinterpret_cast<const std::uint8_t*>(report.data()),
                                                report.size()));
  });
}

xbnn_status xbnn_bench(const char* suite, uint32_t repeat, const char* sizes, uint64_t seed,
                       xbnn_bench_sink sink, void* user) {
  return Guard([&] {
    RequireArg(suite != nullptr && sizes != nullptr && sink != nullptr, "suite, sizes and sink");
    xbnn::BenchOptions options;
    options.suite = suite;
    options.repeat = repeat;
    options.sizes = sizes;
    options.seed = seed;
    const std::string csv = xbnn::RunBenchmark(options).ToCsv();
    sink(csv.c_str(), user);
  });
}

}  // extern "C"
