// Copyright 2026 The vcd Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vcd {

enum class ErrorCode {
  kIo,
  kBadMagic,
  kVersionMismatch,
  kTruncatedPayload,
  kNonFinite,
  kInvariant,
  kDimensionMismatch,
  kZeroRow,
  kEmptyInput,
  kRankDeficient,
  kParse,
  kInfeasible,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io error";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kTruncatedPayload: return "truncated payload";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kInvariant: return "invariant violation";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kZeroRow: return "zero row";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kRankDeficient: return "rank deficient";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kInfeasible: return "infeasible config";
  }
  return "unknown";
}

// Every failure in the library surfaces as this exception; code() tells the
// cases apart without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // what() without the error-kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace vcd
