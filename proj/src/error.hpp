// src/error.hpp

// Copyright 2026 The FCM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FCM_ERROR_HPP_
#define FCM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fcm {

// Mirrors fcm_status in the C API one-to-one (minus FCM_OK).
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kParse = 3,
  kNetwork = 4,
  kTimeout = 5,
  kBadResponse = 6,
  kOutOfRange = 7,
  kNumeric = 8,
  kGuardTripped = 9,
  kInternal = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}

inline void Require(bool cond, const std::string &what) {
  if (!cond) Fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace fcm

#endif  // FCM_ERROR_HPP_
