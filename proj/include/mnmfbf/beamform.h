// include/mnmfbf/beamform.h

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

// Full-rank MWF, rank-1 MWF and MVDR beamformers, each time-variant or
// time-invariant, plus reference-channel selection and filtering.

#ifndef MNMFBF_BEAMFORM_H_
#define MNMFBF_BEAMFORM_H_

#include <optional>
#include <string>
#include <vector>

#include "mnmfbf/hermitian.h"
#include "mnmfbf/spatial.h"
#include "mnmfbf/stft.h"

namespace mnmfbf {

enum class BeamformerFamily { kFullRankWf, kRank1Wf, kMvdr };

// "wf", "wf1", "mv".
const char *FamilyName(BeamformerFamily family);
BeamformerFamily ParseFamily(const std::string &name);
const char *TimeModeName(TimeMode mode);

struct BeamformerSpec {
  BeamformerFamily family = BeamformerFamily::kFullRankWf;
  TimeMode time_mode = TimeMode::kTimeInvariant;
  std::optional<int> reference;  // unset: automatic selection
};

// One M-vector per f (time-invariant) or per (f, t), indexed f * frames + t.
struct BeamformerFilterField {
  TimeMode mode = TimeMode::kTimeInvariant;
  int reference = 0;
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<CVector> w;

  const CVector &at(std::size_t f, std::size_t t) const {
    return mode == TimeMode::kTimeInvariant ? w[f] : w[f * frames + t];
  }
};

// Closed forms for one bin. Q (and P + Q) receive 1e-10 tr / M diagonal
// loading before inversion.
// w = (P + Q)^-1 P u_m
CVector FullRankWfFilter(const HermitianMatrix &p, const HermitianMatrix &q, int reference);
// w = Q^-1 p (p^H Q^-1 p + 1 / lambda)^-1 p^H u_m
CVector Rank1WfFilter(const CVector &steering, double lambda, const HermitianMatrix &q,
                      int reference);
// w = Q^-1 p (p^H Q^-1 p)^-1 p^H u_m
CVector MvdrFilter(const CVector &steering, const HermitianMatrix &q, int reference);

// Builds the filter for `reference`. Time-invariant filters use P_f, Q_f and
// `steering` of the per-f speech SCMs; time-variant full-rank filters use
// P_ft, Q_ft, and time-variant rank-1/MVDR filters combine the per-f
// steering and lambda with Q_ft. `steering` may be null for the full-rank
// family. Throws kSingularMatrix naming the bin on persistent singularity.
BeamformerFilterField BuildFilter(const BeamformerSpec &spec, int reference,
                                  const SpatialEstimates &est,
                                  const SteeringEstimates *steering);

// Adds sum w^H P w and sum w^H Q w of `w` over its bins to *num and *den.
void AccumulateSnr(const BeamformerFilterField &w, const SpatialEstimates &est,
                   double *num, double *den);
// Relative difference below which two reference SNRs count as tied.
inline constexpr double kSnrTieTolerance = 1e-9;

// argmax_m num[m] / den[m], ties (within kSnrTieTolerance) to the lowest
// index. A zero denominator counts as +inf when num[m] > 0 and as 0 when the
// candidate passes no energy at all.
int ArgmaxSnr(const std::vector<double> &num, const std::vector<double> &den);
// candidates[m] is the filter built for reference m.
int SelectReference(const std::vector<BeamformerFilterField> &candidates,
                    const SpatialEstimates &est);

// Builds candidates for every channel when spec.reference is unset, selects
// one and returns its filter.
BeamformerFilterField BuildFilterAuto(const BeamformerSpec &spec, const SpatialEstimates &est,
                                      const SteeringEstimates *steering);

// s_ft = w^H x_ft; a single-channel spectrogram with x's metadata.
Spectrogram ApplyFilter(const BeamformerFilterField &w, const Spectrogram &x);

}  // namespace mnmfbf

#endif  // MNMFBF_BEAMFORM_H_
