// src/online.cc

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

#include <string>

#include "mnmfbf/error.h"
#include "mnmfbf/mnmf.h"

namespace mnmfbf {

OnlineStats OnlineStats::Zero(const MnmfParams &p, double rho) {
  OnlineStats s;
  s.rho = rho;
  const Eigen::Index k = p.bases(), n = p.sources();
  const Eigen::Index f = static_cast<Eigen::Index>(p.bins());
  s.alpha_weighted = Eigen::MatrixXd::Zero(k, f);
  s.beta = Eigen::MatrixXd::Zero(k, f);
  s.gamma_weighted = Eigen::MatrixXd::Zero(n, k);
  s.delta = Eigen::MatrixXd::Zero(n, k);
  s.phi_weighted = MatrixField(n * f, p.channels());
  s.psi = MatrixField(n * f, p.channels());
  return s;
}

namespace {

void CheckStats(const OnlineStats &s, const MnmfParams &p) {
  if (!(s.rho >= 0.0 && s.rho <= 1.0))
    throw Error(ErrorKind::kConfiguration, "forgetting weight must lie in [0, 1]");
  const std::size_t nf = static_cast<std::size_t>(p.sources()) * p.bins();
  if (s.alpha_weighted.rows() != p.bases() ||
      s.alpha_weighted.cols() != static_cast<Eigen::Index>(p.bins()) ||
      s.beta.rows() != s.alpha_weighted.rows() || s.beta.cols() != s.alpha_weighted.cols() ||
      s.gamma_weighted.rows() != p.sources() || s.gamma_weighted.cols() != p.bases() ||
      s.delta.rows() != p.sources() || s.delta.cols() != p.bases() ||
      s.phi_weighted.size() != nf || s.psi.size() != nf ||
      s.phi_weighted.dim() != p.channels() || s.psi.dim() != p.channels())
    throw Error(ErrorKind::kInvalidInput, "online statistics do not match the parameters");
}

void Fold(const Eigen::MatrixXd &term, double rho, Eigen::MatrixXd *acc) {
  *acc = term + rho * *acc;
}

void Fold(const MatrixField &term, double rho, MatrixField *acc) {
  for (std::size_t i = 0; i < acc->size(); ++i) (*acc)[i] = term[i] + rho * (*acc)[i];
}

}  // namespace

void OnlineUpdate(OnlineStats *stats, MnmfParams *p, const Spectrogram &x_batch,
                  std::size_t h_offset, int inner_iterations,
                  double *max_riccati_residual) {
  if (x_batch.frames() == 0)
    throw Error(ErrorKind::kInvalidInput, "empty mini-batch");
  if (inner_iterations < 1)
    throw Error(ErrorKind::kInvalidInput, "online update needs at least one inner iteration");
  if (stats->batches == 0 && stats->beta.size() == 0) *stats = OnlineStats::Zero(*p, stats->rho);
  CheckStats(*stats, *p);

  BatchTerms terms;
  UpdateContext ctx;
  ctx.prior = stats;
  ctx.terms = &terms;
  ctx.max_riccati_residual = max_riccati_residual;
  for (int i = 0; i < inner_iterations; ++i) {
    UpdateV(p, x_batch, h_offset, ctx);
    UpdateH(p, x_batch, h_offset);
    UpdateZ(p, x_batch, h_offset, ctx);
    UpdateG(p, x_batch, h_offset, ctx);
  }
  const double rho = stats->rho;
  Fold(terms.alpha_weighted, rho, &stats->alpha_weighted);
  Fold(terms.beta, rho, &stats->beta);
  Fold(terms.gamma_weighted, rho, &stats->gamma_weighted);
  Fold(terms.delta, rho, &stats->delta);
  Fold(terms.phi_weighted, rho, &stats->phi_weighted);
  Fold(terms.psi, rho, &stats->psi);
  ++stats->batches;
}

}  // namespace mnmfbf
