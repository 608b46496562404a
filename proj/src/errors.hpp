/**
 * Copyright 2026 The FedReID-Sim Authors
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

#ifndef FEDREID_ERRORS_HPP_
#define FEDREID_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fedreid {

// Every failure inside the core raises an Error carrying one of these codes.
// The C API maps them one-to-one onto fr_status values, so keep the numbering
// in sync with include/fedreid/fedreid.h.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDimension = 2,
  kEmptyAggregation = 3,
  kDegenerateVector = 4,
  kSelection = 5,
  kLabel = 6,
  kDivergence = 7,
  kBatchSize = 8,
  kConfig = 9,
  kPartition = 10,
  kDistillation = 11,
  kAggregation = 12,
  kIo = 13,
  kFormat = 14,
  kRuntime = 15,
};

const char *ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

}  // namespace fedreid

#endif  // FEDREID_ERRORS_HPP_
