// src/mnmf.cc

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

#include "mnmfbf/mnmf.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mnmf_engine.h"
#include "mnmfbf/error.h"
#include "mnmfbf/parallel.h"
#include "mnmfbf/spatial.h"
#include "packed.h"

namespace mnmfbf {

using Eigen::MatrixXd;

void MnmfParams::Validate() const {
  const Eigen::Index k = v.rows();
  if (k < 1 || h.rows() != k || z.cols() != k || z.rows() < 1)
    throw Error(ErrorKind::kInvalidInput, "MNMF factor shapes are inconsistent");
  if (g.size() != static_cast<std::size_t>(z.rows()) * bins() || g.dim() < 1)
    throw Error(ErrorKind::kInvalidInput, "MNMF spatial covariance count is inconsistent");
  if (g.dim() > packed::kMaxDim)
    throw Error(ErrorKind::kInvalidInput, "at most 16 channels are supported");
  auto check = [](const MatrixXd &a, const char *name) {
    if (!a.allFinite() || (a.size() > 0 && a.minCoeff() < 0.0))
      throw Error(ErrorKind::kInvalidInput,
                  std::string("MNMF factor ") + name + " must be finite and nonnegative");
  };
  check(v, "V");
  check(h, "H");
  check(z, "Z");
}

MnmfParams MakeParams(int bases, int sources, int channels, std::size_t bins,
                      std::size_t frames) {
  MnmfParams p;
  p.v = MatrixXd::Zero(bases, static_cast<Eigen::Index>(bins));
  p.h = MatrixXd::Zero(bases, static_cast<Eigen::Index>(frames));
  p.z = MatrixXd::Zero(sources, bases);
  p.g = MatrixField(static_cast<std::size_t>(sources) * bins, channels);
  return p;
}

MatrixField ComputeModel(const MnmfParams &p, std::size_t first, std::size_t count) {
  p.Validate();
  if (first + count > p.frames())
    throw Error(ErrorKind::kInvalidInput, "frame range exceeds activations");
  const std::size_t bins = p.bins();
  const int m = p.channels();
  MatrixField y(bins * count, m);
  ParallelFor(bins, [&](std::size_t f) {
    for (int k = 0; k < p.bases(); ++k) {
      CMatrix c = CMatrix::Zero(m, m);
      for (int n = 0; n < p.sources(); ++n) c += p.z(n, k) * p.G(n, f);
      for (std::size_t t = 0; t < count; ++t)
        y[f * count + t] += (p.v(k, f) * p.h(k, first + t)) * c;
    }
  });
  return y;
}

MatrixField ComputeModel(const MnmfParams &p) { return ComputeModel(p, 0, p.frames()); }

MatrixField ObservationField(const Spectrogram &x) {
  MatrixField out(x.bins() * x.frames(), static_cast<Eigen::Index>(x.channels()));
  for (std::size_t f = 0; f < x.bins(); ++f)
    for (std::size_t t = 0; t < x.frames(); ++t) {
      auto b = x.bin(f, t);
      out[f * x.frames() + t] = b * b.adjoint();
    }
  return out;
}

double LogDetDivergence(const HermitianMatrix &x, const HermitianMatrix &y) {
  if (x.dim() != y.dim())
    throw Error(ErrorKind::kInvalidInput, "divergence operands differ in dimension");
  Eigen::LLT<CMatrix> llt(y.matrix());
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::kSingularMatrix, "model covariance is not positive definite");
  CMatrix yinv_x = llt.solve(x.matrix());
  return yinv_x.trace().real() - LogDet(x) + LogDet(y) - static_cast<double>(x.dim());
}

double CostLogdet(const MatrixField &x_field, const MatrixField &y_field,
                  std::size_t frames, CostForm form) {
  if (x_field.size() != y_field.size() || x_field.dim() != y_field.dim() || frames == 0)
    throw Error(ErrorKind::kInvalidInput, "cost fields do not match");
  const double m = static_cast<double>(x_field.dim());
  double total = 0.0;
  for (std::size_t i = 0; i < x_field.size(); ++i) {
    double term = std::numeric_limits<double>::quiet_NaN();
    Eigen::LLT<CMatrix> ly(y_field[i]);
    if (ly.info() == Eigen::Success) {
      double logdet_y = 0.0;
      for (Eigen::Index j = 0; j < y_field.dim(); ++j)
        logdet_y += 2.0 * std::log(ly.matrixLLT()(j, j).real());
      term = ly.solve(CMatrix(x_field[i])).trace().real() + logdet_y;
      if (form == CostForm::kDivergence) {
        Eigen::LLT<CMatrix> lx(x_field[i]);
        if (lx.info() != Eigen::Success) {
          term = std::numeric_limits<double>::infinity();
        } else {
          double logdet_x = 0.0;
          for (Eigen::Index j = 0; j < x_field.dim(); ++j)
            logdet_x += 2.0 * std::log(lx.matrixLLT()(j, j).real());
          term -= logdet_x + m;
        }
      }
    }
    if (!std::isfinite(term))
      throw Error(ErrorKind::kNumericalFailure,
                  "non-finite cost at bin (f=" + std::to_string(i / frames) +
                      ", t=" + std::to_string(i % frames) + ")");
    total += term;
  }
  return total;
}

namespace engine {

void BinPass(const MnmfParams &p, const Spectrogram &x, std::size_t h_offset,
             std::size_t f, BinBuffers *out) {
  const int m = p.channels();
  const int n_src = p.sources();
  const int psize = packed::Size(m);
  const Eigen::Index frames = static_cast<Eigen::Index>(x.frames());

  out->gpack.resize(psize, n_src);
  for (int n = 0; n < n_src; ++n) packed::Pack(p.G(n, f), m, out->gpack.col(n).data());
  const MatrixXd c = out->gpack * p.z;  // psize x K
  const MatrixXd vh = p.v.col(f).asDiagonal() * p.h.middleCols(h_offset, frames);
  const MatrixXd ypack = c * vh;  // psize x T

  out->yinv.resize(psize, frames);
  out->bb.resize(psize, frames);
  double cost = 0.0;
  cdouble y[packed::kMaxDim * packed::kMaxDim];
  cdouble yinv[packed::kMaxDim * packed::kMaxDim];
  cdouble b[packed::kMaxDim];
  for (Eigen::Index t = 0; t < frames; ++t) {
    packed::Unpack(ypack.col(t).data(), m, y);
    double logdet = 0.0;
    if (!small_hpd::Invert(y, m, yinv, &logdet))
      throw Error(ErrorKind::kNumericalFailure,
                  "model covariance is not positive definite at bin (f=" +
                      std::to_string(f) + ", t=" + std::to_string(h_offset + t) + ")");
    const cdouble *xt = x.bin(f, t).data();
    double quad = 0.0;
    for (int i = 0; i < m; ++i) {
      cdouble s = 0.0;
      for (int j = 0; j < m; ++j) s += yinv[i + j * m] * xt[j];
      b[i] = s;
      quad += (std::conj(xt[i]) * s).real();
    }
    packed::Pack(Eigen::Map<const CMatrix>(yinv, m, m), m, out->yinv.col(t).data());
    packed::PackOuter(b, m, out->bb.col(t).data());
    cost += quad + logdet;
  }
  if (!std::isfinite(cost))
    throw Error(ErrorKind::kNumericalFailure,
                "non-finite cost at frequency bin " + std::to_string(f));
  out->cost = cost;
}

void FactorStats(const MnmfParams &p, const Spectrogram &x, std::size_t h_offset,
                 std::size_t f, BinBuffers *buf, MatrixXd *a, MatrixXd *c) {
  BinPass(p, x, h_offset, f, buf);
  *a = buf->gpack.transpose() * buf->bb;    // N x T: tr(Y^-1 X Y^-1 G_n)
  *c = buf->gpack.transpose() * buf->yinv;  // N x T: tr(Y^-1 G_n)
}

}  // namespace engine

namespace {

void CheckBatch(const MnmfParams &p, const Spectrogram &x, std::size_t h_offset) {
  p.Validate();
  if (x.frames() == 0)
    throw Error(ErrorKind::kInvalidInput, "empty mini-batch");
  if (x.bins() != p.bins() || static_cast<int>(x.channels()) != p.channels())
    throw Error(ErrorKind::kInvalidInput, "spectrogram shape does not match MNMF parameters");
  if (h_offset + x.frames() > p.frames())
    throw Error(ErrorKind::kInvalidInput, "batch frames exceed activation columns");
}

inline double MmStep(double x, double num, double den, const double *prior_num,
                     const double *prior_den, double rho) {
  double n = x * x * num;
  double d = den;
  if (prior_num) {
    n += rho * *prior_num;
    d += rho * *prior_den;
  }
  if (!(d > 0.0) || !std::isfinite(d) || !std::isfinite(n) || n < 0.0) return x;
  return std::max(std::sqrt(n / d), kFactorFloor);
}

}  // namespace

namespace engine {

void UpdateVImpl(MnmfParams *p, const Spectrogram &x, std::size_t h_offset,
                 const UpdateContext &ctx, double *cost_before) {
  CheckBatch(*p, x, h_offset);
  const std::size_t bins = p->bins();
  const int k_count = p->bases();
  const Eigen::Index frames = static_cast<Eigen::Index>(x.frames());
  std::vector<double> cost(bins, 0.0);
  if (ctx.terms) {
    ctx.terms->alpha_weighted.resize(k_count, bins);
    ctx.terms->beta.resize(k_count, bins);
  }
  const double rho = ctx.prior ? ctx.prior->rho : 0.0;
  ParallelFor(bins, [&](std::size_t f) {
    BinBuffers buf;
    MatrixXd a, c;
    FactorStats(*p, x, h_offset, f, &buf, &a, &c);
    cost[f] = buf.cost;
    const auto hb = p->h.middleCols(h_offset, frames);
    const Eigen::VectorXd num = (p->z.transpose() * a).cwiseProduct(hb).rowwise().sum();
    const Eigen::VectorXd den = (p->z.transpose() * c).cwiseProduct(hb).rowwise().sum();
    for (int k = 0; k < k_count; ++k) {
      const double v = p->v(k, f);
      if (ctx.terms) {
        ctx.terms->alpha_weighted(k, f) = v * v * num(k);
        ctx.terms->beta(k, f) = den(k);
      }
      const double *pn = ctx.prior ? &ctx.prior->alpha_weighted(k, f) : nullptr;
      const double *pd = ctx.prior ? &ctx.prior->beta(k, f) : nullptr;
      p->v(k, f) = MmStep(v, num(k), den(k), pn, pd, rho);
    }
  });
  if (cost_before) {
    double total = 0.0;
    for (double c : cost) total += c;
    *cost_before = total;
  }
}

}  // namespace engine

void UpdateV(MnmfParams *p, const Spectrogram &x, std::size_t h_offset,
             const UpdateContext &ctx) {
  engine::UpdateVImpl(p, x, h_offset, ctx, nullptr);
}

void UpdateH(MnmfParams *p, const Spectrogram &x, std::size_t h_offset) {
  CheckBatch(*p, x, h_offset);
  const std::size_t bins = p->bins();
  const Eigen::Index frames = static_cast<Eigen::Index>(x.frames());
  std::vector<MatrixXd> a(bins), c(bins);
  ParallelFor(bins, [&](std::size_t f) {
    engine::BinBuffers buf;
    engine::FactorStats(*p, x, h_offset, f, &buf, &a[f], &c[f]);
  });
  MatrixXd num = MatrixXd::Zero(p->bases(), frames);
  MatrixXd den = MatrixXd::Zero(p->bases(), frames);
  const MatrixXd zt = p->z.transpose();
  for (std::size_t f = 0; f < bins; ++f) {
    num.noalias() += p->v.col(f).asDiagonal() * (zt * a[f]);
    den.noalias() += p->v.col(f).asDiagonal() * (zt * c[f]);
  }
  for (Eigen::Index t = 0; t < frames; ++t)
    for (int k = 0; k < p->bases(); ++k) {
      double &h = p->h(k, h_offset + t);
      h = MmStep(h, num(k, t), den(k, t), nullptr, nullptr, 0.0);
    }
}

void UpdateZ(MnmfParams *p, const Spectrogram &x, std::size_t h_offset,
             const UpdateContext &ctx) {
  CheckBatch(*p, x, h_offset);
  const std::size_t bins = p->bins();
  const Eigen::Index frames = static_cast<Eigen::Index>(x.frames());
  std::vector<MatrixXd> num_f(bins), den_f(bins);
  ParallelFor(bins, [&](std::size_t f) {
    engine::BinBuffers buf;
    MatrixXd a, c;
    engine::FactorStats(*p, x, h_offset, f, &buf, &a, &c);
    const auto hbt = p->h.middleCols(h_offset, frames).transpose();
    num_f[f] = (a * hbt) * p->v.col(f).asDiagonal();  // N x K
    den_f[f] = (c * hbt) * p->v.col(f).asDiagonal();
  });
  MatrixXd num = MatrixXd::Zero(p->sources(), p->bases());
  MatrixXd den = MatrixXd::Zero(p->sources(), p->bases());
  for (std::size_t f = 0; f < bins; ++f) {
    num += num_f[f];
    den += den_f[f];
  }
  const double rho = ctx.prior ? ctx.prior->rho : 0.0;
  if (ctx.terms) {
    ctx.terms->gamma_weighted.resize(p->sources(), p->bases());
    ctx.terms->delta = den;
  }
  for (int n = 0; n < p->sources(); ++n)
    for (int k = 0; k < p->bases(); ++k) {
      const double z = p->z(n, k);
      if (ctx.terms) ctx.terms->gamma_weighted(n, k) = z * z * num(n, k);
      const double *pn = ctx.prior ? &ctx.prior->gamma_weighted(n, k) : nullptr;
      const double *pd = ctx.prior ? &ctx.prior->delta(n, k) : nullptr;
      p->z(n, k) = MmStep(z, num(n, k), den(n, k), pn, pd, rho);
    }
}

void UpdateG(MnmfParams *p, const Spectrogram &x, std::size_t h_offset,
             const UpdateContext &ctx) {
  CheckBatch(*p, x, h_offset);
  const std::size_t bins = p->bins();
  const int m = p->channels();
  const int n_src = p->sources();
  const Eigen::Index frames = static_cast<Eigen::Index>(x.frames());
  if (ctx.terms) {
    ctx.terms->phi_weighted = MatrixField(n_src * bins, m);
    ctx.terms->psi = MatrixField(n_src * bins, m);
  }
  std::vector<double> residual(bins, 0.0);
  ParallelFor(bins, [&](std::size_t f) {
    engine::BinBuffers buf;
    engine::BinPass(*p, x, h_offset, f, &buf);
    // lambda_nt = sum_k z_nk v_kf h_kt
    const MatrixXd lambda =
        p->z * (p->v.col(f).asDiagonal() * p->h.middleCols(h_offset, frames));
    const MatrixXd phi_pack = buf.bb * lambda.transpose();    // psize x N
    const MatrixXd psi_pack = buf.yinv * lambda.transpose();  // psize x N
    for (int n = 0; n < n_src; ++n) {
      const HermitianMatrix phi =
          HermitianMatrix::Symmetrized(packed::UnpackMatrix(phi_pack.col(n).data(), m));
      HermitianMatrix psi =
          HermitianMatrix::Symmetrized(packed::UnpackMatrix(psi_pack.col(n).data(), m));
      const CMatrix g_old = p->G(n, f);
      HermitianMatrix target = HermitianMatrix::Symmetrized(g_old * phi.matrix() * g_old);
      const std::size_t idx = n * bins + f;
      if (ctx.terms) {
        ctx.terms->phi_weighted.Set(idx, target);
        ctx.terms->psi.Set(idx, psi);
      }
      if (ctx.prior) {
        target = target + ctx.prior->phi_weighted.Get(idx) * ctx.prior->rho;
        psi = psi + ctx.prior->psi.Get(idx) * ctx.prior->rho;
      }
      HermitianMatrix g_new;
      try {
        g_new = RiccatiSolve(psi, target);
      } catch (const Error &e) {
        throw Error(ErrorKind::kNumericalFailure,
                    "G update failed at (n=" + std::to_string(n) + ", f=" +
                        std::to_string(f) + "): " + e.what());
      }
      if (!g_new.matrix().allFinite())
        throw Error(ErrorKind::kNumericalFailure,
                    "non-finite G at (n=" + std::to_string(n) + ", f=" + std::to_string(f) + ")");
      if (ctx.max_riccati_residual)
        residual[f] = std::max(residual[f], RiccatiResidual(g_new, psi, target));
      p->G(n, f) = g_new.matrix();
    }
  });
  if (ctx.max_riccati_residual)
    for (double r : residual)
      *ctx.max_riccati_residual = std::max(*ctx.max_riccati_residual, r);
}

double MnmfCost(const MnmfParams &p, const Spectrogram &x, std::size_t h_offset) {
  CheckBatch(p, x, h_offset);
  std::vector<double> cost(p.bins(), 0.0);
  ParallelFor(p.bins(), [&](std::size_t f) {
    engine::BinBuffers buf;
    engine::BinPass(p, x, h_offset, f, &buf);
    cost[f] = buf.cost;
  });
  double total = 0.0;
  for (double c : cost) total += c;
  return total;
}

void UpdateNmfFactors(MnmfParams *p, const Spectrogram &x) {
  UpdateV(p, x);
  UpdateH(p, x);
  UpdateZ(p, x);
}

void UpdateSpatial(MnmfParams *p, const Spectrogram &x, double *max_riccati_residual) {
  UpdateContext ctx;
  ctx.max_riccati_residual = max_riccati_residual;
  UpdateG(p, x, 0, ctx);
}

FitResult FitFrom(const Spectrogram &x, MnmfParams init, const MnmfConfig &config) {
  if (config.iterations < 0)
    throw Error(ErrorKind::kInvalidInput, "iterations must be nonnegative");
  FitResult r;
  r.params = std::move(init);
  CheckBatch(r.params, x, 0);
  UpdateContext ctx;
  if (config.track_riccati) ctx.max_riccati_residual = &r.max_riccati_residual;
  for (int it = 0; it < config.iterations; ++it) {
    double cost = 0.0;
    engine::UpdateVImpl(&r.params, x, 0, ctx, config.track_cost ? &cost : nullptr);
    if (config.track_cost) r.cost_trace.push_back(cost);
    UpdateH(&r.params, x, 0);
    UpdateZ(&r.params, x, 0, ctx);
    UpdateG(&r.params, x, 0, ctx);
  }
  if (config.track_cost) r.cost_trace.push_back(MnmfCost(r.params, x));
  return r;
}

FitResult OfflineFit(const Spectrogram &x, const MnmfConfig &config) {
  MnmfParams init = InitializeParams(x, config);
  return FitFrom(x, std::move(init), config);
}

}  // namespace mnmfbf
