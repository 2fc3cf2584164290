// src/spatial.cc

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

#include "mnmfbf/spatial.h"

#include <cmath>
#include <random>
#include <string>

#include "mnmfbf/error.h"
#include "mnmfbf/parallel.h"

namespace mnmfbf {

namespace {

// Offsets the factor stream from the ILRMA stream of the same seed.
constexpr std::uint64_t kFactorStream = 0x9e3779b97f4a7c15ULL;

}  // namespace

double EpsilonPolicy::Epsilon(const CVector &g) const {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw Error(ErrorKind::kConfiguration, "epsilon must be finite and nonnegative");
  if (mode == Mode::kAbsolute) return value;
  return value * g.squaredNorm() / static_cast<double>(g.size());
}

std::vector<CVector> SpeechAnchor(const Spectrogram &x) {
  if (x.frames() == 0 || x.bins() == 0)
    throw Error(ErrorKind::kInvalidInput, "empty spectrogram");
  const Eigen::Index m = static_cast<Eigen::Index>(x.channels());
  std::vector<CVector> anchor(x.bins());
  ParallelFor(x.bins(), [&](std::size_t f) {
    CMatrix s = CMatrix::Zero(m, m);
    for (std::size_t t = 0; t < x.frames(); ++t) {
      auto b = x.bin(f, t);
      s.noalias() += b * b.adjoint();
    }
    s /= static_cast<double>(x.frames());
    try {
      anchor[f] = PrincipalEigenvector(HermitianMatrix::Symmetrized(s), 0);
    } catch (const Error &) {
      // Silent bin: any direction will do.
      anchor[f] = CVector::Zero(m);
      anchor[f](0) = 1.0;
    }
  });
  return anchor;
}

SpatialInit InitSpatial(const Spectrogram &x, const IlrmaResult &ilrma, int sources,
                        const EpsilonPolicy &policy) {
  const std::size_t bins = x.bins();
  const Eigen::Index m = static_cast<Eigen::Index>(x.channels());
  if (ilrma.demixing.w.size() != bins)
    throw Error(ErrorKind::kInvalidInput, "ILRMA result does not match the spectrogram");
  if (sources < 1 || sources > m)
    throw Error(ErrorKind::kInvalidInput,
                "ILRMA initialization supports 1 <= sources <= channels");
  const std::vector<CMatrix> mixing = MixingFromDemixing(ilrma.demixing);
  const std::vector<CVector> anchor = SpeechAnchor(x);

  std::vector<double> similarity(m, 0.0);
  for (std::size_t f = 0; f < bins; ++f)
    for (Eigen::Index n = 0; n < m; ++n) {
      const double norm = mixing[f].col(n).norm();
      if (norm > 0.0) similarity[n] += std::abs(anchor[f].dot(mixing[f].col(n))) / norm;
    }
  int best = 0;
  for (Eigen::Index n = 1; n < m; ++n)
    if (similarity[n] > similarity[best]) best = static_cast<int>(n);

  std::vector<int> order{best};
  for (int n = 0; n < m; ++n)
    if (n != best) order.push_back(n);

  SpatialInit out;
  out.matched_ilrma_source = best;
  out.g = MatrixField(static_cast<std::size_t>(sources) * bins, m);
  for (std::size_t f = 0; f < bins; ++f)
    for (int n = 0; n < sources; ++n) {
      CVector g = mixing[f].col(order[n]);
      if (n == 0) g = anchor[f] * g.norm();
      CMatrix gg = g * g.adjoint();
      gg.diagonal().array() += policy.Epsilon(g);
      out.g[n * bins + f] = gg;
    }
  return out;
}

MnmfParams InitializeParams(const Spectrogram &x, const MnmfConfig &config,
                            const EpsilonPolicy &policy) {
  const int m = static_cast<int>(x.channels());
  const int sources = config.sources == 0 ? m : config.sources;
  if (config.bases < 1)
    throw Error(ErrorKind::kConfiguration, "MNMF needs at least one basis");
  IlrmaConfig il;
  il.bases = config.ilrma_bases;
  il.iterations = config.ilrma_iterations;
  il.seed = config.seed;
  const IlrmaResult ilrma = IlrmaRun(x, il);
  SpatialInit init = InitSpatial(x, ilrma, sources, policy);

  MnmfParams p = MakeParams(config.bases, sources, m, x.bins(), x.frames());
  p.g = std::move(init.g);
  std::mt19937_64 rng(config.seed ^ kFactorStream);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (Eigen::Index j = 0; j < p.v.cols(); ++j)
    for (Eigen::Index i = 0; i < p.v.rows(); ++i) p.v(i, j) = unif(rng);
  for (Eigen::Index j = 0; j < p.h.cols(); ++j)
    for (Eigen::Index i = 0; i < p.h.rows(); ++i) p.h(i, j) = unif(rng);
  for (Eigen::Index j = 0; j < p.z.cols(); ++j)
    for (Eigen::Index i = 0; i < p.z.rows(); ++i) p.z(i, j) = unif(rng);

  // sum_t tr Y_ft = sum_k v_kf (sum_t h_kt) (sum_n z_nk tr G_nf)
  const Eigen::VectorXd hsum = p.h.rowwise().sum();
  for (std::size_t f = 0; f < x.bins(); ++f) {
    double power = 0.0;
    for (std::size_t t = 0; t < x.frames(); ++t) power += x.bin(f, t).squaredNorm();
    double model = 0.0;
    for (int k = 0; k < p.bases(); ++k) {
      double c = 0.0;
      for (int n = 0; n < sources; ++n) c += p.z(n, k) * p.G(n, f).trace().real();
      model += p.v(k, f) * hsum(k) * c;
    }
    if (power > 0.0 && model > 0.0)
      for (int k = 0; k < p.bases(); ++k)
        p.v(k, f) = std::max(p.v(k, f) * power / model, kFactorFloor);
  }
  return p;
}

void InitBatchActivations(MnmfParams *p, const Spectrogram &x, std::size_t h_offset,
                          std::uint64_t seed) {
  if (h_offset + x.frames() > p->frames() || x.bins() != p->bins())
    throw Error(ErrorKind::kInvalidInput, "batch does not fit the activation matrix");
  std::mt19937_64 rng(seed ^ kFactorStream);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  // c_k = sum_f v_kf sum_n z_nk tr G_nf
  Eigen::VectorXd c = Eigen::VectorXd::Zero(p->bases());
  for (std::size_t f = 0; f < p->bins(); ++f)
    for (int k = 0; k < p->bases(); ++k) {
      double s = 0.0;
      for (int n = 0; n < p->sources(); ++n) s += p->z(n, k) * p->G(n, f).trace().real();
      c(k) += p->v(k, f) * s;
    }
  for (std::size_t t = 0; t < x.frames(); ++t) {
    auto col = p->h.col(h_offset + t);
    for (int k = 0; k < p->bases(); ++k) col(k) = unif(rng);
    double power = 0.0;
    for (std::size_t f = 0; f < x.bins(); ++f) power += x.bin(f, t).squaredNorm();
    const double model = col.dot(c);
    if (power > 0.0 && model > 0.0) col *= power / model;
    col = col.cwiseMax(kFactorFloor);
  }
}

SpatialEstimates ExtractScms(const MnmfParams &p, int speech_source, std::size_t first,
                             std::size_t count, bool time_variant) {
  p.Validate();
  if (speech_source < 0 || speech_source >= p.sources())
    throw Error(ErrorKind::kInvalidInput, "speech source index out of range");
  if (count == 0 || first + count > p.frames())
    throw Error(ErrorKind::kInvalidInput, "frame range exceeds activations");
  const std::size_t bins = p.bins();
  const Eigen::Index m = p.channels();
  SpatialEstimates est;
  est.bins = bins;
  est.frames = count;
  est.p_f = ScmField(bins, m);
  est.q_f = ScmField(bins, m);
  if (time_variant) {
    est.p_ft = ScmField(bins * count, m);
    est.q_ft = ScmField(bins * count, m);
  }
  const auto h = p.h.middleCols(first, count);
  const Eigen::VectorXd hmean = h.rowwise().mean();
  ParallelFor(bins, [&](std::size_t f) {
    // power(n, t) = sum_k z_nk v_kf h_kt
    const Eigen::MatrixXd power = p.z * (p.v.col(f).asDiagonal() * h);
    const Eigen::VectorXd mean = p.z * p.v.col(f).cwiseProduct(hmean);
    for (int n = 0; n < p.sources(); ++n) {
      auto &avg = n == speech_source ? est.p_f : est.q_f;
      avg[f] += mean(n) * p.G(n, f);
      if (!time_variant) continue;
      auto &field = n == speech_source ? est.p_ft : est.q_ft;
      for (std::size_t t = 0; t < count; ++t)
        field[f * count + t] += power(n, t) * p.G(n, f);
    }
  });
  return est;
}

SpatialEstimates ExtractScms(const MnmfParams &p, int speech_source, bool time_variant) {
  return ExtractScms(p, speech_source, 0, p.frames(), time_variant);
}

SteeringEstimates ExtractSteering(const SpatialEstimates &est, TimeMode mode) {
  const bool tv = mode == TimeMode::kTimeVariant;
  if (tv && !est.has_time_variant())
    throw Error(ErrorKind::kInvalidInput, "time-variant SCMs were not extracted");
  const ScmField &field = tv ? est.p_ft : est.p_f;
  SteeringEstimates out;
  out.p.resize(field.size());
  out.lambda.resize(static_cast<Eigen::Index>(field.size()));
  ParallelFor(field.size(), [&](std::size_t i) {
    const HermitianMatrix p = field.Get(i);
    try {
      out.p[i] = PrincipalEigenvector(p, 0);
    } catch (const Error &e) {
      const std::string where =
          tv ? "(f=" + std::to_string(i / est.frames) + ", t=" + std::to_string(i % est.frames) + ")"
             : "f=" + std::to_string(i);
      throw Error(ErrorKind::kDegenerateMatrix,
                  "speech SCM has no positive eigenvalue at bin " + where);
    }
    out.lambda(static_cast<Eigen::Index>(i)) = p.FrobeniusNorm();
  });
  return out;
}

}  // namespace mnmfbf
