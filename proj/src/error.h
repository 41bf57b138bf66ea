// Copyright 2026 The Coadapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COADAPT_ERROR_H_
#define COADAPT_ERROR_H_

#include <stdexcept>
#include <string>

namespace coadapt {

// Values mirror coadapt_status in the public C header.
enum class ErrorCode {
  kOk = 0,
  kInvalidArgument = 1,
  kDomain = 2,
  kDegenerate = 3,
  kNoOptimum = 4,
  kNoEquilibrium = 5,
  kInfeasiblePolicy = 6,
  kSingular = 7,
  kDesignInfeasible = 8,
  kConjectureUndefined = 9,
  kPairing = 10,
  kIo = 11,
  kParse = 12,
  kReplay = 13,
  kState = 14,
  kInternal = 15,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace coadapt

#endif  // COADAPT_ERROR_H_
