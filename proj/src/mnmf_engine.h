// src/mnmf_engine.h

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

// Per-frequency kernels shared by the offline and online MNMF updates.

#ifndef MNMFBF_MNMF_ENGINE_H_
#define MNMFBF_MNMF_ENGINE_H_

#include <cstddef>

#include "mnmfbf/mnmf.h"
#include "small_hpd.h"

namespace mnmfbf {
namespace engine {

struct BinBuffers {
  Eigen::MatrixXd gpack;  // packed G_nf, M*M x N
  Eigen::MatrixXd yinv;   // packed Y_ft^-1, M*M x T
  Eigen::MatrixXd bb;     // packed Y^-1 X Y^-1 = b b^H with b = Y^-1 x
  double cost = 0.0;      // sum_t x^H Y^-1 x + log det Y
};

// Assembles Y_ft for every frame of bin f and fills `out`.
void BinPass(const MnmfParams &p, const Spectrogram &x, std::size_t h_offset,
             std::size_t f, BinBuffers *out);

// a(n, t) = tr(Y^-1 X Y^-1 G_nf), c(n, t) = tr(Y^-1 G_nf).
void FactorStats(const MnmfParams &p, const Spectrogram &x, std::size_t h_offset,
                 std::size_t f, BinBuffers *buf, Eigen::MatrixXd *a, Eigen::MatrixXd *c);

// UpdateV that also returns the cost of the parameters it started from.
void UpdateVImpl(MnmfParams *p, const Spectrogram &x, std::size_t h_offset,
                 const UpdateContext &ctx, double *cost_before);

}  // namespace engine
}  // namespace mnmfbf

#endif  // MNMFBF_MNMF_ENGINE_H_
