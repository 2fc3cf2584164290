// include/mnmfbf/cli.h

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

// The mnmfbf command line: enhance, stream, simulate, evaluate.

#ifndef MNMFBF_CLI_H_
#define MNMFBF_CLI_H_

#include <ostream>

#include "mnmfbf/error.h"

namespace mnmfbf {

enum ExitCode {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIo = 3,
  kExitNumerical = 4,
};

ExitCode ExitCodeFor(ErrorKind kind);

int RunCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace mnmfbf

#endif  // MNMFBF_CLI_H_
