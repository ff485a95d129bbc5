// Copyright 2026 The PairRank Authors.
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

#ifndef PAIRRANK_ERROR_H_
#define PAIRRANK_ERROR_H_

#include <stdexcept>
#include <string>

namespace pairrank {

enum class ErrorCode {
  kInvalidArgument,
  kDisconnectedGraph,
  kUnboundedLikelihood,
  kUndefinedDrawWidth,
  kInsufficientAnchors,
  kOutOfOrder,
  kParse,
  kVersionMismatch,
  kDuplicateWord,
  kMissingOutcome,
  kIo,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kUnboundedLikelihood: return "UnboundedLikelihood";
    case ErrorCode::kUndefinedDrawWidth: return "UndefinedDrawWidth";
    case ErrorCode::kInsufficientAnchors: return "InsufficientAnchors";
    case ErrorCode::kOutOfOrder: return "OutOfOrder";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kDuplicateWord: return "DuplicateWord";
    case ErrorCode::kMissingOutcome: return "MissingOutcome";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

// All library failures are reported through this exception type; `code()`
// lets callers (CLI, HTTP service) map failures to exit codes or statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  // Message without the code prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace pairrank

#endif  // PAIRRANK_ERROR_H_
