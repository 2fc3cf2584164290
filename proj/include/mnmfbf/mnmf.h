// include/mnmfbf/mnmf.h

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

// Multichannel NMF. The mixture covariance at (f, t) is modelled as
//   Y_ft = sum_k v_kf h_kt sum_n z_nk G_nf
// and fitted to X_ft = x_ft x_ft^H with majorization-minimization updates
// of the log-determinant divergence. The G update is the closed-form
// solution of G Psi G = G_old Phi G_old.

#ifndef MNMFBF_MNMF_H_
#define MNMFBF_MNMF_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mnmfbf/hermitian.h"
#include "mnmfbf/stft.h"

namespace mnmfbf {

constexpr double kFactorFloor = 1e-12;

struct MnmfParams {
  Eigen::MatrixXd v;  // K x F basis spectra
  Eigen::MatrixXd h;  // K x T activations
  Eigen::MatrixXd z;  // N x K partitioning weights
  MatrixField g;      // N * F spatial covariances, index n * F + f

  int bases() const { return static_cast<int>(v.rows()); }
  int sources() const { return static_cast<int>(z.rows()); }
  int channels() const { return static_cast<int>(g.dim()); }
  std::size_t bins() const { return static_cast<std::size_t>(v.cols()); }
  std::size_t frames() const { return static_cast<std::size_t>(h.cols()); }

  Eigen::Map<CMatrix> G(int n, std::size_t f) { return g[n * bins() + f]; }
  Eigen::Map<const CMatrix> G(int n, std::size_t f) const { return g[n * bins() + f]; }

  // Throws kInvalidInput on inconsistent shapes, negative or non-finite
  // factors.
  void Validate() const;
};

// Allocates zero-filled parameters with the given shapes.
MnmfParams MakeParams(int bases, int sources, int channels, std::size_t bins,
                      std::size_t frames);

// Y_ft for t in [first, first + count) of the activation columns; indexed
// f * count + (t - first).
MatrixField ComputeModel(const MnmfParams &p, std::size_t first, std::size_t count);
MatrixField ComputeModel(const MnmfParams &p);

// X_ft = x_ft x_ft^H, indexed f * T + t.
MatrixField ObservationField(const Spectrogram &x);

// D_LD(X | Y) = tr(X Y^-1) - log det(X Y^-1) - M for positive definite X, Y.
double LogDetDivergence(const HermitianMatrix &x, const HermitianMatrix &y);

enum class CostForm {
  // Exact divergence; every X_ft must be positive definite.
  kDivergence,
  // tr(X Y^-1) + log det Y: drops the update-invariant terms that are
  // infinite for rank-1 X_ft.
  kSurrogate,
};

// Sum of the per-bin cost over fields indexed f * frames + t. Throws
// kNumericalFailure naming (f, t) when a term is not finite.
double CostLogdet(const MatrixField &x_field, const MatrixField &y_field,
                  std::size_t frames, CostForm form);

// Surrogate cost of `p` against the spectrogram, whose frames map to
// activation columns [h_offset, h_offset + x.frames()).
double MnmfCost(const MnmfParams &p, const Spectrogram &x, std::size_t h_offset = 0);

// Exponentially weighted statistics carried between mini-batches. The
// weighted entries hold a x a products (v^2 alpha, z^2 gamma, G Phi G).
struct OnlineStats {
  double rho = 0.9;
  int batches = 0;
  Eigen::MatrixXd alpha_weighted;  // K x F
  Eigen::MatrixXd beta;            // K x F
  Eigen::MatrixXd gamma_weighted;  // N x K
  Eigen::MatrixXd delta;           // N x K
  MatrixField phi_weighted;        // N * F
  MatrixField psi;                 // N * F

  static OnlineStats Zero(const MnmfParams &p, double rho);
};

// The current-batch terms that entered the most recent V, Z and G updates.
struct BatchTerms {
  Eigen::MatrixXd alpha_weighted, beta, gamma_weighted, delta;
  MatrixField phi_weighted, psi;
};

// Update options shared by the offline and online paths. With `prior`
// null (or all-zero statistics) every rule reduces to the offline one.
struct UpdateContext {
  const OnlineStats *prior = nullptr;
  BatchTerms *terms = nullptr;        // receives this batch's terms
  double *max_riccati_residual = nullptr;
};

// Each rule recomputes Y from the current parameters before updating.
// `x` covers activation columns [h_offset, h_offset + x.frames()).
void UpdateV(MnmfParams *p, const Spectrogram &x, std::size_t h_offset = 0,
             const UpdateContext &ctx = {});
void UpdateH(MnmfParams *p, const Spectrogram &x, std::size_t h_offset = 0);
void UpdateZ(MnmfParams *p, const Spectrogram &x, std::size_t h_offset = 0,
             const UpdateContext &ctx = {});
void UpdateG(MnmfParams *p, const Spectrogram &x, std::size_t h_offset = 0,
             const UpdateContext &ctx = {});

// V, then H, then Z.
void UpdateNmfFactors(MnmfParams *p, const Spectrogram &x);
// G only.
void UpdateSpatial(MnmfParams *p, const Spectrogram &x,
                   double *max_riccati_residual = nullptr);

struct MnmfConfig {
  int bases = 25;
  int sources = 0;  // 0 selects N = M
  int iterations = 100;
  std::uint64_t seed = 0;
  int ilrma_bases = 2;
  int ilrma_iterations = 50;
  // Record the surrogate cost before the first and after every iteration.
  bool track_cost = true;
  bool track_riccati = false;
};

struct FitResult {
  MnmfParams params;
  std::vector<double> cost_trace;
  double max_riccati_residual = 0.0;
};

// Runs `config.iterations` sweeps of {V, H, Z, G} from `init`.
FitResult FitFrom(const Spectrogram &x, MnmfParams init, const MnmfConfig &config);

// Initializes from ILRMA (see InitializeParams) and runs FitFrom.
FitResult OfflineFit(const Spectrogram &x, const MnmfConfig &config);

// One mini-batch of online MNMF. `x_batch` holds the batch frames, which map
// to activation columns [h_offset, h_offset + frames); those columns must be
// initialized. Runs `inner_iterations` sweeps of {V, H, Z, G} combining the
// current-batch statistics with rho times the prior ones, then folds the
// last sweep's terms into `stats`.
void OnlineUpdate(OnlineStats *stats, MnmfParams *p, const Spectrogram &x_batch,
                  std::size_t h_offset, int inner_iterations,
                  double *max_riccati_residual = nullptr);

}  // namespace mnmfbf

#endif  // MNMFBF_MNMF_H_
