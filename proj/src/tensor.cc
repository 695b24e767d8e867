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

#include "xbnn/tensor.h"

#include <sstream>

#include "xbnn/error.h"

namespace xbnn {

std::string Dims::ToString() const {
  std::ostringstream os;
  os << "(" << n << ", " << c << ", " << h << ", " << w << ")";
  return os.str();
}

FloatTensor::FloatTensor(Dims dims, Layout layout)
    : dims_(dims), layout_(layout), data_(dims.count(), 0.0f) {}

FloatTensor::FloatTensor(Dims dims, Layout layout, std::vector<float> data)
    : dims_(dims), layout_(layout), data_(std::move(data)) {
  Check(data_.size() == dims_.count(), ErrorCode::kShapeMismatch,
        "tensor data has " + std::to_string(data_.size()) + " elements, dims " +
            dims_.ToString() + " need " + std::to_string(dims_.count()));
}

void ValidateGroupBits(std::uint32_t group_bits) {
  Check(group_bits >= 8 && group_bits % 8 == 0, ErrorCode::kInvalidArgument,
        "invalid group width " + std::to_string(group_bits));
}

PackedTensor::PackedTensor(Dims dims, std::uint32_t group_bits)
    : dims_(dims), group_bits_(group_bits) {
  ValidateGroupBits(group_bits);
  groups_ = (dims.c + group_bits - 1) / group_bits;
  data_.assign(group_count() * words_per_group(), 0);
}

}  // namespace xbnn
