// src/ilrma.cc

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

#include "mnmfbf/ilrma.h"

#include <cmath>
#include <random>
#include <string>

#include "mnmfbf/error.h"
#include "mnmfbf/parallel.h"
#include "packed.h"

namespace mnmfbf {

namespace {

constexpr double kFloor = 1e-12;

using Eigen::MatrixXd;

// Powers |w_nf^H x_ft|^2 of one source, F x T.
MatrixXd SourcePower(const Spectrogram &x, const DemixingMatrixField &w,
                     std::size_t n) {
  const std::size_t bins = x.bins(), frames = x.frames();
  MatrixXd p(bins, frames);
  for (std::size_t f = 0; f < bins; ++f) {
    const CVector wn = w.w[f].col(n);
    for (std::size_t t = 0; t < frames; ++t)
      p(f, t) = std::norm(wn.dot(x.bin(f, t)));  // dot() conjugates wn
  }
  return p;
}

MatrixXd Variance(const IlrmaSourceModel &s) {
  return (s.basis.transpose() * s.activation).cwiseMax(kFloor);
}

// x <- x * sqrt(num / den), entries with a non-positive denominator kept.
void MultiplicativeStep(MatrixXd *x, const MatrixXd &num, const MatrixXd &den) {
  for (Eigen::Index j = 0; j < x->cols(); ++j)
    for (Eigen::Index i = 0; i < x->rows(); ++i) {
      const double d = den(i, j);
      if (d > 0.0 && std::isfinite(d) && std::isfinite(num(i, j)))
        (*x)(i, j) = std::max((*x)(i, j) * std::sqrt(num(i, j) / d), kFloor);
    }
}

void UpdateSourceModel(const MatrixXd &power, IlrmaSourceModel *s) {
  MatrixXd r = Variance(*s);
  MatrixXd inv = r.cwiseInverse();
  MatrixXd weighted = power.cwiseProduct(inv).cwiseProduct(inv);
  MatrixXd num = s->activation * weighted.transpose();
  MatrixXd den = s->activation * inv.transpose();
  MultiplicativeStep(&s->basis, num, den);

  r = Variance(*s);
  inv = r.cwiseInverse();
  weighted = power.cwiseProduct(inv).cwiseProduct(inv);
  num = s->basis * weighted;
  den = s->basis * inv;
  MultiplicativeStep(&s->activation, num, den);
}

}  // namespace

double IlrmaObjective(const Spectrogram &x, const DemixingMatrixField &w,
                      const std::vector<IlrmaSourceModel> &sources) {
  double total = 0.0;
  for (std::size_t n = 0; n < sources.size(); ++n) {
    MatrixXd p = SourcePower(x, w, n);
    MatrixXd r = Variance(sources[n]);
    total += (p.array() / r.array() + r.array().log()).sum();
  }
  for (std::size_t f = 0; f < x.bins(); ++f) {
    Eigen::PartialPivLU<CMatrix> lu(w.w[f]);
    total -= 2.0 * static_cast<double>(x.frames()) * std::log(std::abs(lu.determinant()));
  }
  return total;
}

IlrmaResult IlrmaRun(const Spectrogram &x, const IlrmaConfig &config) {
  const std::size_t bins = x.bins(), frames = x.frames();
  const int m = static_cast<int>(x.channels());
  const std::size_t n_src = x.channels();
  if (m < 1 || bins == 0 || frames == 0)
    throw Error(ErrorKind::kInvalidInput, "ILRMA needs a non-empty spectrogram");
  if (frames < n_src)
    throw Error(ErrorKind::kInvalidInput,
                "ILRMA needs at least as many frames as channels (" +
                    std::to_string(frames) + " < " + std::to_string(n_src) + ")");
  if (m > packed::kMaxDim)
    throw Error(ErrorKind::kInvalidInput, "at most 16 channels are supported");
  if (config.bases < 1 || config.iterations < 0)
    throw Error(ErrorKind::kInvalidInput, "ILRMA needs bases >= 1 and iterations >= 0");

  IlrmaResult result;
  result.demixing.w.assign(bins, CMatrix::Identity(m, m));

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  result.sources.resize(n_src);
  for (auto &s : result.sources) {
    s.basis = MatrixXd::NullaryExpr(config.bases, bins, [&]() { return unif(rng); });
    s.activation = MatrixXd::NullaryExpr(config.bases, frames, [&]() { return unif(rng); });
  }

  // Observation outer products, packed per frequency: M*M x T.
  const int psize = packed::Size(m);
  std::vector<MatrixXd> xx(bins);
  ParallelFor(bins, [&](std::size_t f) {
    xx[f].resize(psize, frames);
    for (std::size_t t = 0; t < frames; ++t)
      packed::PackOuter(x.bin(f, t).data(), m, xx[f].col(t).data());
  });

  std::vector<MatrixXd> power(n_src);
  for (std::size_t n = 0; n < n_src; ++n) power[n] = SourcePower(x, result.demixing, n);

  if (config.track_objective)
    result.objective.push_back(IlrmaObjective(x, result.demixing, result.sources));

  std::vector<char> regularized(bins, 0);
  const double inv_frames = 1.0 / static_cast<double>(frames);
  for (int it = 0; it < config.iterations; ++it) {
    for (std::size_t n = 0; n < n_src; ++n) {
      UpdateSourceModel(power[n], &result.sources[n]);
      const MatrixXd r_inv = Variance(result.sources[n]).cwiseInverse();

      ParallelFor(bins, [&](std::size_t f) {
        Eigen::VectorXd up = xx[f] * r_inv.row(f).transpose() * inv_frames;
        CMatrix u = packed::UnpackMatrix(up.data(), m);
        const double tr = u.diagonal().real().sum();
        if (!(tr > 0.0)) {
          regularized[f] = 1;
          return;
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(u, Eigen::EigenvaluesOnly);
        const double delta = 1e-12 * tr / m;
        if (eig.eigenvalues()(0) < delta) {
          u.diagonal().array() += delta;
          regularized[f] = 1;
        }
        CMatrix &wf = result.demixing.w[f];
        CMatrix a = wf.adjoint() * u;
        Eigen::FullPivLU<CMatrix> lu(a);
        if (!lu.isInvertible())
          throw Error(ErrorKind::kEstimationFailure,
                      "ILRMA demixing update is singular at bin " + std::to_string(f));
        CVector e = CVector::Zero(m);
        e(static_cast<Eigen::Index>(n)) = 1.0;
        CVector wn = lu.solve(e);
        const double q = wn.dot(u * wn).real();
        if (!(q > 0.0) || !wn.allFinite())
          throw Error(ErrorKind::kEstimationFailure,
                      "ILRMA demixing normalization failed at bin " + std::to_string(f));
        wf.col(n) = wn / std::sqrt(q);
      });
      power[n] = SourcePower(x, result.demixing, n);
    }

    // Rescale each source to unit average power; the objective is invariant.
    for (std::size_t n = 0; n < n_src; ++n) {
      const double mean = power[n].mean();
      if (!(mean > 0.0) || !std::isfinite(mean)) continue;
      const double lam = std::sqrt(mean);
      for (std::size_t f = 0; f < bins; ++f) result.demixing.w[f].col(n) /= lam;
      power[n] /= mean;
      result.sources[n].basis /= mean;
      result.sources[n].basis = result.sources[n].basis.cwiseMax(kFloor);
    }

    if (config.track_objective)
      result.objective.push_back(IlrmaObjective(x, result.demixing, result.sources));
  }
  for (char r : regularized) result.regularized = result.regularized || r;

  if (config.project_back) {
    const Eigen::Index ref = config.reference;
    if (ref < 0 || ref >= m)
      throw Error(ErrorKind::kInvalidInput, "projection-back reference out of range");
    std::vector<CMatrix> mixing = MixingFromDemixing(result.demixing);
    for (std::size_t f = 0; f < bins; ++f) {
      for (std::size_t n = 0; n < n_src; ++n) {
        const cdouble c = mixing[f](ref, n);
        if (std::abs(c) < 1e-12 * mixing[f].col(n).norm()) continue;
        result.demixing.w[f].col(n) *= std::conj(c);
        for (int k = 0; k < config.bases; ++k)
          result.sources[n].basis(k, f) *= std::norm(c);
      }
    }
  }
  return result;
}

std::vector<CMatrix> MixingFromDemixing(const DemixingMatrixField &w) {
  std::vector<CMatrix> out(w.w.size());
  for (std::size_t f = 0; f < w.w.size(); ++f) {
    Eigen::FullPivLU<CMatrix> lu(w.w[f].adjoint());
    if (!lu.isInvertible() || w.w[f].rows() != w.w[f].cols())
      throw Error(ErrorKind::kSingularMatrix,
                  "demixing matrix is singular at bin " + std::to_string(f));
    out[f] = lu.inverse();
  }
  return out;
}

}  // namespace mnmfbf
