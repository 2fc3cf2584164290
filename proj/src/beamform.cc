// src/beamform.cc

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

#include "mnmfbf/beamform.h"

#include <cmath>
#include <limits>
#include <string>

#include "mnmfbf/error.h"
#include "mnmfbf/parallel.h"

namespace mnmfbf {

namespace {

void CheckReference(int reference, Eigen::Index m) {
  if (reference < 0 || reference >= m)
    throw Error(ErrorKind::kInvalidInput,
                "reference channel " + std::to_string(reference) + " out of range");
}

// Solves A w = b for Hermitian PSD A after diagonal loading; falls back to
// the eigenvalue-floored inverse when the Cholesky factorization fails.
CVector LoadedSolve(const CMatrix &a, const CVector &b) {
  const Eigen::Index m = a.rows();
  CMatrix loaded = 0.5 * (a + a.adjoint());
  const double tr = loaded.diagonal().real().sum();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw Error(ErrorKind::kSingularMatrix, "matrix to invert has no positive trace");
  loaded.diagonal().array() += 1e-10 * tr / static_cast<double>(m);
  Eigen::LLT<CMatrix> llt(loaded);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  return Inverse(HermitianMatrix::Symmetrized(loaded)).matrix() * b;
}

}  // namespace

const char *FamilyName(BeamformerFamily family) {
  switch (family) {
    case BeamformerFamily::kFullRankWf: return "wf";
    case BeamformerFamily::kRank1Wf: return "wf1";
    case BeamformerFamily::kMvdr: return "mv";
  }
  return "?";
}

BeamformerFamily ParseFamily(const std::string &name) {
  if (name == "wf") return BeamformerFamily::kFullRankWf;
  if (name == "wf1") return BeamformerFamily::kRank1Wf;
  if (name == "mv") return BeamformerFamily::kMvdr;
  throw Error(ErrorKind::kConfiguration, "unknown beamformer '" + name + "' (wf, wf1, mv)");
}

const char *TimeModeName(TimeMode mode) {
  return mode == TimeMode::kTimeVariant ? "time-variant" : "time-invariant";
}

CVector FullRankWfFilter(const HermitianMatrix &p, const HermitianMatrix &q, int reference) {
  if (p.dim() != q.dim()) throw Error(ErrorKind::kInvalidInput, "P and Q differ in size");
  CheckReference(reference, p.dim());
  return LoadedSolve(p.matrix() + q.matrix(), p.matrix().col(reference));
}

CVector Rank1WfFilter(const CVector &steering, double lambda, const HermitianMatrix &q,
                      int reference) {
  if (steering.size() != q.dim())
    throw Error(ErrorKind::kInvalidInput, "steering vector and Q differ in size");
  CheckReference(reference, q.dim());
  if (!(lambda > 0.0))
    throw Error(ErrorKind::kInvalidInput, "speech power must be positive");
  const CVector qp = LoadedSolve(q.matrix(), steering);
  const double denom = steering.dot(qp).real() + 1.0 / lambda;
  return qp * (std::conj(steering(reference)) / denom);
}

CVector MvdrFilter(const CVector &steering, const HermitianMatrix &q, int reference) {
  if (steering.size() != q.dim())
    throw Error(ErrorKind::kInvalidInput, "steering vector and Q differ in size");
  CheckReference(reference, q.dim());
  const CVector qp = LoadedSolve(q.matrix(), steering);
  const double denom = steering.dot(qp).real();
  if (!(denom > 0.0))
    throw Error(ErrorKind::kSingularMatrix, "MVDR normalization is not positive");
  return qp * (std::conj(steering(reference)) / denom);
}

BeamformerFilterField BuildFilter(const BeamformerSpec &spec, int reference,
                                  const SpatialEstimates &est,
                                  const SteeringEstimates *steering) {
  const bool tv = spec.time_mode == TimeMode::kTimeVariant;
  if (tv && !est.has_time_variant())
    throw Error(ErrorKind::kInvalidInput, "time-variant filters need per-frame SCMs");
  if (spec.family != BeamformerFamily::kFullRankWf &&
      (!steering || steering->p.size() != est.bins))
    throw Error(ErrorKind::kInvalidInput, "rank-1 and MVDR filters need per-f steering");
  BeamformerFilterField out;
  out.mode = spec.time_mode;
  out.reference = reference;
  out.bins = est.bins;
  out.frames = tv ? est.frames : 1;
  out.w.resize(out.bins * out.frames);
  ParallelFor(est.bins, [&](std::size_t f) {
    for (std::size_t t = 0; t < out.frames; ++t) {
      const std::size_t i = tv ? f * est.frames + t : f;
      try {
        const HermitianMatrix q = tv ? est.q_ft.Get(i) : est.q_f.Get(f);
        switch (spec.family) {
          case BeamformerFamily::kFullRankWf: {
            const HermitianMatrix p = tv ? est.p_ft.Get(i) : est.p_f.Get(f);
            out.w[i] = FullRankWfFilter(p, q, reference);
            break;
          }
          case BeamformerFamily::kRank1Wf:
            out.w[i] = Rank1WfFilter(steering->p[f], steering->lambda(f), q, reference);
            break;
          case BeamformerFamily::kMvdr:
            out.w[i] = MvdrFilter(steering->p[f], q, reference);
            break;
        }
      } catch (const Error &e) {
        if (e.kind() == ErrorKind::kInvalidInput) throw;
        const std::string where = tv ? "(f=" + std::to_string(f) + ", t=" + std::to_string(t) + ")"
                                     : "f=" + std::to_string(f);
        throw Error(ErrorKind::kSingularMatrix,
                    "filter construction failed at bin " + where + ": " + e.what());
      }
      if (!out.w[i].allFinite())
        throw Error(ErrorKind::kNumericalFailure,
                    "non-finite filter at bin f=" + std::to_string(f));
    }
  });
  return out;
}

void AccumulateSnr(const BeamformerFilterField &w, const SpatialEstimates &est, double *num,
                   double *den) {
  const bool tv = w.mode == TimeMode::kTimeVariant;
  if (w.bins != est.bins || (tv && (!est.has_time_variant() || w.frames != est.frames)))
    throw Error(ErrorKind::kInvalidInput, "filters do not match the spatial estimates");
  double n = 0.0, d = 0.0;
  for (std::size_t f = 0; f < w.bins; ++f)
    for (std::size_t t = 0; t < w.frames; ++t) {
      const std::size_t i = tv ? f * est.frames + t : f;
      const CVector &wi = w.w[i];
      const auto p = tv ? est.p_ft[i] : est.p_f[f];
      const auto q = tv ? est.q_ft[i] : est.q_f[f];
      n += wi.dot(p * wi).real();
      d += wi.dot(q * wi).real();
    }
  *num += n;
  *den += d;
}

int ArgmaxSnr(const std::vector<double> &num, const std::vector<double> &den) {
  if (num.empty() || num.size() != den.size())
    throw Error(ErrorKind::kInvalidInput, "no reference candidates");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int best = 0;
  double best_snr = -kInf;
  for (std::size_t m = 0; m < num.size(); ++m) {
    double snr;
    if (den[m] > 0.0)
      snr = num[m] / den[m];
    else
      snr = num[m] > 0.0 ? kInf : 0.0;  // a zero filter passes nothing
    // Ratios equal up to rounding count as ties.
    const bool better = best_snr == -kInf ||
                        (snr == kInf ? best_snr != kInf
                                     : best_snr != kInf && snr > best_snr * (1.0 + kSnrTieTolerance));
    if (better) {
      best_snr = snr;
      best = static_cast<int>(m);
    }
  }
  return best;
}

int SelectReference(const std::vector<BeamformerFilterField> &candidates,
                    const SpatialEstimates &est) {
  std::vector<double> num(candidates.size(), 0.0), den(candidates.size(), 0.0);
  for (std::size_t m = 0; m < candidates.size(); ++m)
    AccumulateSnr(candidates[m], est, &num[m], &den[m]);
  return ArgmaxSnr(num, den);
}

BeamformerFilterField BuildFilterAuto(const BeamformerSpec &spec, const SpatialEstimates &est,
                                      const SteeringEstimates *steering) {
  if (spec.reference) return BuildFilter(spec, *spec.reference, est, steering);
  const int m = static_cast<int>(est.p_f.dim());
  std::vector<BeamformerFilterField> candidates;
  for (int r = 0; r < m; ++r) candidates.push_back(BuildFilter(spec, r, est, steering));
  const int best = SelectReference(candidates, est);
  return std::move(candidates[best]);
}

Spectrogram ApplyFilter(const BeamformerFilterField &w, const Spectrogram &x) {
  const bool tv = w.mode == TimeMode::kTimeVariant;
  if (w.bins != x.bins() || (tv && w.frames != x.frames()) || w.w.empty() ||
      w.w[0].size() != static_cast<Eigen::Index>(x.channels()))
    throw Error(ErrorKind::kInvalidInput, "filter and spectrogram dimensions differ");
  Spectrogram out(x.bins(), x.frames(), 1, x.window_len(), x.hop(), x.sample_rate());
  for (std::size_t f = 0; f < x.bins(); ++f)
    for (std::size_t t = 0; t < x.frames(); ++t)
      out.at(f, t, 0) = w.at(f, t).dot(x.bin(f, t));
  return out;
}

}  // namespace mnmfbf
