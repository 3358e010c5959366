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

#ifndef SILF_ERROR_HPP_
#define SILF_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace silf {

enum class ErrorCode {
  kShape,
  kArgument,
  kCapacity,
  kScalabilityExceeded,
  kDoubleReclaim,
  kStaleModel,
  kState,
  kUndefinedCorrelation,
  kParse,
  kValidation,
  kFormat,
  kIo,
};

const char *ErrorCodeName(ErrorCode code);

// Every failure raised by the core library. The code drives the C API status
// and the CLI exit code; the message is single-line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string &message);

}  // namespace silf

#endif  // SILF_ERROR_HPP_
