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

#ifndef XBNN_C_API_H_
#define XBNN_C_API_H_

#include <stddef.h>
#include <stdint.h>

#if defined(XBNN_BUILDING_LIBRARY)
#define XBNN_API __attribute__((visibility("default")))
#else
#define XBNN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct xbnn_model xbnn_model;
typedef struct xbnn_tensor xbnn_tensor;

// Values match xbnn::ErrorCode.
typedef enum xbnn_status {
  XBNN_OK = 0,
  XBNN_INVALID_ARGUMENT = 1,
  XBNN_SHAPE_MISMATCH = 2,
  XBNN_INDEX_OUT_OF_BOUNDS = 3,
  XBNN_REDUCTION_OVERFLOW = 4,
  XBNN_MISSING_INITIALIZER = 5,
  XBNN_BAD_MAGIC = 6,
  XBNN_UNSUPPORTED_VERSION = 7,
  XBNN_TRUNCATED = 8,
  XBNN_CHECKSUM_MISMATCH = 9,
  XBNN_MALFORMED_MODEL = 10,
  XBNN_PARSE = 11,
  XBNN_UNKNOWN_OP = 12,
  XBNN_UNRESOLVED_NAME = 13,
  XBNN_UNSUPPORTED_ATTRIBUTE = 14,
  XBNN_IO = 15,
  XBNN_BENCH_MISMATCH = 16,
  XBNN_INTERNAL = 99,
} xbnn_status;

XBNN_API const char* xbnn_version(void);
// Message of the last failed call on this thread; "" if none.
XBNN_API const char* xbnn_last_error(void);
XBNN_API const char* xbnn_status_string(xbnn_status status);

// dims are (n, c, h, w); data is NHWC and may be NULL for zeros.
XBNN_API xbnn_status xbnn_tensor_create(const uint32_t dims[4], const float* data, xbnn_tensor** out);
XBNN_API void xbnn_tensor_free(xbnn_tensor* tensor);
XBNN_API void xbnn_tensor_dims(const xbnn_tensor* tensor, uint32_t dims[4]);
XBNN_API size_t xbnn_tensor_size(const xbnn_tensor* tensor);
XBNN_API const float* xbnn_tensor_data(const xbnn_tensor* tensor);
XBNN_API xbnn_status xbnn_tensor_load(const char* path, xbnn_tensor** out);
XBNN_API xbnn_status xbnn_tensor_save(const xbnn_tensor* tensor, const char* path);

XBNN_API xbnn_status xbnn_model_load(const char* path, xbnn_model** out);
XBNN_API xbnn_status xbnn_model_save(const xbnn_model* model, const char* path);
XBNN_API void xbnn_model_free(xbnn_model* model);
XBNN_API void xbnn_model_input_dims(const xbnn_model* model, uint32_t dims[4]);
XBNN_API xbnn_status xbnn_model_execute(const xbnn_model* model, const xbnn_tensor* input,
                                        xbnn_tensor** out);
XBNN_API xbnn_status xbnn_model_build_bireal18(uint64_t seed, uint32_t group_bits,
                                               uint32_t input_size, xbnn_model** out);

// Converts an interchange JSON file; the report JSON goes to report_path.
XBNN_API xbnn_status xbnn_convert_file(const char* json_path, const char* model_path,
                                       const char* report_path, uint32_t group_bits,
                                       int fuse_bn_sign);

// Receives the complete CSV report.
typedef void (*xbnn_bench_sink)(const char* csv, void* user);
XBNN_API xbnn_status xbnn_bench(const char* suite, uint32_t repeat, const char* sizes, uint64_t seed,
                                xbnn_bench_sink sink, void* user);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // XBNN_C_API_H_
