// include/mnmfbf/ilrma.h

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

// Independent low-rank matrix analysis: determined BSS (sources = channels)
// with an NMF source-variance model and iterative-projection demixing
// updates. Used to initialize the MNMF spatial covariances.

#ifndef MNMFBF_ILRMA_H_
#define MNMFBF_ILRMA_H_

#include <cstdint>
#include <vector>

#include "mnmfbf/hermitian.h"
#include "mnmfbf/stft.h"

namespace mnmfbf {

// Per frequency an M x N matrix W_f whose column n is the demixing filter
// w_nf; separated sources are s_ft = W_f^H x_ft.
struct DemixingMatrixField {
  std::vector<CMatrix> w;
};

struct IlrmaSourceModel {
  Eigen::MatrixXd basis;       // K x F
  Eigen::MatrixXd activation;  // K x T
};

struct IlrmaConfig {
  int bases = 2;
  int iterations = 50;
  std::uint64_t seed = 0;
  // Channel used for projection-back scaling.
  int reference = 0;
  // Apply projection-back after the last iteration.
  bool project_back = true;
  // Record the negative log-likelihood before and after each iteration.
  bool track_objective = false;
};

struct IlrmaResult {
  DemixingMatrixField demixing;
  std::vector<IlrmaSourceModel> sources;
  // objective[0] is the initial value, objective[i] after iteration i.
  std::vector<double> objective;
  // True when any weighted covariance needed diagonal loading.
  bool regularized = false;
};

IlrmaResult IlrmaRun(const Spectrogram &x, const IlrmaConfig &config);

// sum_{n,f,t} [|w_nf^H x_ft|^2 / r_nft + log r_nft] - 2 T sum_f log|det W_f|
double IlrmaObjective(const Spectrogram &x, const DemixingMatrixField &w,
                      const std::vector<IlrmaSourceModel> &sources);

// G_f = W_f^-H for every f; column n of G_f is the steering vector of
// source n. Throws kSingularMatrix when some W_f is not invertible.
std::vector<CMatrix> MixingFromDemixing(const DemixingMatrixField &w);

}  // namespace mnmfbf

#endif  // MNMFBF_ILRMA_H_
