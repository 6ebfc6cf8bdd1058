// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The starcf Authors

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace starcf {

enum class ErrorCode {
  kInvalidConfig,
  kZeroDistance,
  kNonSquareN,
  kSideMismatch,
  kCholeskyFailure,
  kSingularPsi,
  kSingularR,
  kUOutOfRange,
  kNoFeasiblePoint,
  kIo,
  kVerification,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kZeroDistance: return "ZeroDistance";
    case ErrorCode::kNonSquareN: return "NonSquareN";
    case ErrorCode::kSideMismatch: return "SideMismatch";
    case ErrorCode::kCholeskyFailure: return "CholeskyFailure";
    case ErrorCode::kSingularPsi: return "SingularPsi";
    case ErrorCode::kSingularR: return "SingularR";
    case ErrorCode::kUOutOfRange: return "UOutOfRange";
    case ErrorCode::kNoFeasiblePoint: return "NoFeasiblePoint";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kVerification: return "Verification";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace starcf
