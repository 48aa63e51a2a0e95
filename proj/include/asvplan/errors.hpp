// Copyright 2026 The asvplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace asvplan {

/// Failure categories surfaced by the planner. The CLI maps these onto exit
/// codes.
enum class ErrorKind {
  kInvalidInput,
  kSeedBoxBlocked,
  kNoPathFound,
  kInfeasibleBox,
  kNonFiniteEvaluation,
  kFrontEndFailed,
  kCorridorFailed,
  kSegmentInfeasible,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "InvalidInput";
    case ErrorKind::kSeedBoxBlocked: return "SeedBoxBlocked";
    case ErrorKind::kNoPathFound: return "NoPathFound";
    case ErrorKind::kInfeasibleBox: return "InfeasibleBox";
    case ErrorKind::kNonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorKind::kFrontEndFailed: return "FrontEndFailed";
    case ErrorKind::kCorridorFailed: return "CorridorFailed";
    case ErrorKind::kSegmentInfeasible: return "SegmentInfeasible";
  }
  return "Unknown";
}

class PlanningError : public std::runtime_error {
 public:
  PlanningError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace asvplan
