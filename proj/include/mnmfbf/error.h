// include/mnmfbf/error.h

// Copyright 2026 The mnmfbf Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MNMFBF_ERROR_H_
#define MNMFBF_ERROR_H_

#include <stdexcept>
#include <string>

namespace mnmfbf {

enum class ErrorKind {
  kInvalidInput,
  kConfiguration,
  kDegenerateMatrix,
  kSingularMatrix,
  kEstimationFailure,
  kNumericalFailure,
  kIo,
};

const char *ErrorKindName(ErrorKind kind);

// All library failures are reported through this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Re-throws `e` with the pipeline stage prepended to its message.
[[noreturn]] void RethrowInStage(const Error &e, const std::string &stage);

}  // namespace mnmfbf

#endif  // MNMFBF_ERROR_H_
