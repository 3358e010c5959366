/**
 * Copyright 2026 The SILF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "silf/error.hpp"

namespace silf {

const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kArgument: return "argument";
    case ErrorCode::kCapacity: return "capacity";
    case ErrorCode::kScalabilityExceeded: return "scalability-exceeded";
    case ErrorCode::kDoubleReclaim: return "double-reclaim";
    case ErrorCode::kStaleModel: return "stale-model";
    case ErrorCode::kState: return "state";
    case ErrorCode::kUndefinedCorrelation: return "undefined-correlation";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

void Fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

}  // namespace silf
