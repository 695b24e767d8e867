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

#ifndef XBNN_ERROR_H_
#define XBNN_ERROR_H_

#include <stdexcept>
#include <string>

namespace xbnn {

// Values are shared with the C API status codes in c_api.h.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kIndexOutOfBounds = 3,
  kReductionOverflow = 4,
  kMissingInitializer = 5,
  kBadMagic = 6,
  kUnsupportedVersion = 7,
  kTruncated = 8,
  kChecksumMismatch = 9,
  kMalformedModel = 10,
  kParse = 11,
  kUnknownOp = 12,
  kUnresolvedName = 13,
  kUnsupportedAttribute = 14,
  kIo = 15,
  kBenchMismatch = 16,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Check(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) Fail(code, message);
}

}  // namespace xbnn

#endif  // XBNN_ERROR_H_
