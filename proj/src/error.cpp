// Copyright 2026 The synther Authors.
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

#include "synther/error.hpp"

namespace synther {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kUnavailableData: return "unavailable-data";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kInvalidState: return "invalid-state";
    case ErrorCode::kInvalidDomain: return "invalid-domain";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kUndefinedMetric: return "undefined-metric";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace synther
