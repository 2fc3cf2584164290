// include/mnmfbf/parallel.h

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

#ifndef MNMFBF_PARALLEL_H_
#define MNMFBF_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace mnmfbf {

// Worker count for ParallelFor; 1 runs everything on the calling thread.
void SetNumThreads(int n);
int NumThreads();

// Runs body(i) for i in [0, n). Every caller writes only to slots owned by
// index i and reduces across i serially afterwards, so results do not depend
// on the worker count. The first exception thrown by a body is rethrown.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)> &body);

}  // namespace mnmfbf

#endif  // MNMFBF_PARALLEL_H_
