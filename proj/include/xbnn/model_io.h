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

#ifndef XBNN_MODEL_IO_H_
#define XBNN_MODEL_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xbnn/graph.h"

namespace xbnn {

// Little-endian "DABN" container:
//   magic[4] | u32 version | u32 graph_len | u64 weight_len
//   graph section | weight section | u32 crc32(all preceding bytes)
std::vector<std::uint8_t> SerializeModel(const Model& model);
Model DeserializeModel(std::span<const std::uint8_t> bytes);

void SaveModel(const Model& model, const std::string& path);
Model LoadModel(const std::string& path);

// Raw tensor file: u32 n, c, h, w followed by NHWC f32 values.
std::vector<std::uint8_t> SerializeRawTensor(const FloatTensor& tensor);
FloatTensor ReadRawTensor(const std::string& path);
void WriteRawTensor(const FloatTensor& tensor, const std::string& path);

std::vector<std::uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace xbnn

#endif  // XBNN_MODEL_IO_H_
