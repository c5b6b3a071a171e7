// Copyright 2026 The cnwv Authors. All Rights Reserved.
//
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

namespace cnwv {

/// Every failure the library can report. The numeric values double as the
/// CLI's process exit codes, so they must stay stable.
enum class ErrorCode : int {
  InvalidArgument = 10,
  DimensionMismatch = 11,
  EmptySubset = 12,
  ConvergenceFailure = 13,
  NotPositiveSemidefinite = 14,
  InvalidAperture = 15,
  InvalidD = 16,
  InvalidFactors = 17,

  Io = 20,
  MalformedHeader = 21,
  TruncatedRecord = 22,
  MalformedRecord = 23,
  InconsistentDim = 24,
  NonFiniteValue = 25,
  UnencodableToken = 26,
  MalformedLine = 27,
  EmptyDataset = 28,

  LengthMismatch = 30,
  DegenerateInput = 31,
  ZeroVector = 32,
  AllTokensOov = 33,
  MissingTruth = 34,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::InvalidAperture: return "InvalidAperture";
    case ErrorCode::InvalidD: return "InvalidD";
    case ErrorCode::InvalidFactors: return "InvalidFactors";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InconsistentDim: return "InconsistentDim";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnencodableToken: return "UnencodableToken";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::AllTokensOov: return "AllTokensOov";
    case ErrorCode::MissingTruth: return "MissingTruth";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cnwv
