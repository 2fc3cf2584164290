// include/mnmfbf/spatial.h

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

// MNMF initialization from ILRMA and an empirical-SCM speech anchor, and
// extraction of speech/noise spatial covariances and steering vectors from
// fitted parameters.

#ifndef MNMFBF_SPATIAL_H_
#define MNMFBF_SPATIAL_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mnmfbf/hermitian.h"
#include "mnmfbf/ilrma.h"
#include "mnmfbf/mnmf.h"
#include "mnmfbf/stft.h"

namespace mnmfbf {

// Identity loading added to g g^H when building the initial G_nf.
struct EpsilonPolicy {
  enum class Mode {
    kRelative,  // epsilon = value * tr(g g^H) / M
    kAbsolute,  // epsilon = value
  };
  Mode mode = Mode::kRelative;
  double value = 0.01;

  double Epsilon(const CVector &g) const;
};

// Principal eigenvector of (1/T) sum_t X_ft for every f, phase anchored at
// channel 0.
std::vector<CVector> SpeechAnchor(const Spectrogram &x);

struct SpatialInit {
  MatrixField g;              // N * F, index n * F + f
  int matched_ilrma_source;   // ILRMA column that became source 0
};

// Builds G_nf = g_nf g_nf^H + epsilon I for n < sources from the ILRMA mixing
// matrices. The ILRMA column most similar to the speech anchor (mean |cosine|
// over f) is replaced by the anchor scaled to that column's norm and moved to
// index 0; the remaining columns keep their order. sources <= M.
SpatialInit InitSpatial(const Spectrogram &x, const IlrmaResult &ilrma,
                        int sources, const EpsilonPolicy &policy = {});

// Full MNMF initialization: ILRMA, InitSpatial, then V, H, Z uniform in
// [0.1, 1) with V rescaled per f so that sum_t tr Y_ft = sum_t tr X_ft.
MnmfParams InitializeParams(const Spectrogram &x, const MnmfConfig &config,
                            const EpsilonPolicy &policy = {});

// Fills activation columns [h_offset, h_offset + x.frames()) with uniform
// [0.1, 1) values, each column scaled so that sum_f tr Y_ft = sum_f tr X_ft.
void InitBatchActivations(MnmfParams *p, const Spectrogram &x, std::size_t h_offset,
                          std::uint64_t seed);

// Speech/noise SCMs. The per-f fields are frame averages; the per-(f, t)
// fields cover `frames` frames and are indexed f * frames + t.
struct SpatialEstimates {
  std::size_t bins = 0;
  std::size_t frames = 0;
  ScmField p_f, q_f;
  ScmField p_ft, q_ft;  // empty unless time-variant SCMs were requested

  bool has_time_variant() const { return !p_ft.empty(); }
};

// P_ft = sum_k v_kf h_kt z_sk G_sf for the speech source s, Q_ft the same over
// n != s, for activation columns [first, first + count). P_f and Q_f average
// over those columns.
SpatialEstimates ExtractScms(const MnmfParams &p, int speech_source, std::size_t first,
                             std::size_t count, bool time_variant);
SpatialEstimates ExtractScms(const MnmfParams &p, int speech_source = 0,
                             bool time_variant = true);

enum class TimeMode { kTimeVariant, kTimeInvariant };

struct SteeringEstimates {
  std::vector<CVector> p;  // unit norm, phase anchored at channel 0
  Eigen::VectorXd lambda;  // ||P||_F
};

// Principal eigenvectors of P_f (time-invariant) or P_ft (time-variant).
// Throws kDegenerateMatrix naming the bin when P has no positive eigenvalue.
SteeringEstimates ExtractSteering(const SpatialEstimates &est, TimeMode mode);

}  // namespace mnmfbf

#endif  // MNMFBF_SPATIAL_H_
