// include/mnmfbf/hermitian.h

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

#ifndef MNMFBF_HERMITIAN_H_
#define MNMFBF_HERMITIAN_H_

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace mnmfbf {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Dense complex Hermitian matrix. The checked constructor rejects inputs
// whose asymmetry exceeds 1e-12 (scaled by the largest entry magnitude when
// that exceeds one) and stores the symmetrized (A + A^H) / 2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix &a);

  // Symmetrizes without validating; for matrices that are Hermitian up to
  // accumulated round-off by construction.
  static HermitianMatrix Symmetrized(const CMatrix &a);
  static HermitianMatrix Identity(Eigen::Index dim);
  static HermitianMatrix Zero(Eigen::Index dim);
  static HermitianMatrix Diagonal(const Eigen::VectorXd &diag);
  // v v^H
  static HermitianMatrix Outer(const CVector &v);

  Eigen::Index dim() const { return a_.rows(); }
  const CMatrix &matrix() const { return a_; }
  cdouble operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }
  double Trace() const { return a_.diagonal().real().sum(); }
  double FrobeniusNorm() const { return a_.norm(); }

  HermitianMatrix operator+(const HermitianMatrix &b) const;
  HermitianMatrix operator-(const HermitianMatrix &b) const;
  HermitianMatrix operator*(double s) const;

 private:
  CMatrix a_;
};

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;  // descending
  CMatrix eigenvectors;         // column j pairs with eigenvalues(j)
};

EigenDecomposition HermitianEig(const HermitianMatrix &a);

// Rotates `v` so that v(anchor) is real and nonnegative. When |v(anchor)| is
// below 1e-12 the largest-magnitude entry is used as the anchor instead.
void FixPhase(CVector *v, Eigen::Index anchor);

// Unit-norm eigenvector of the largest eigenvalue, phase fixed at `anchor`.
// Throws kDegenerateMatrix when the largest eigenvalue is not positive.
CVector PrincipalEigenvector(const HermitianMatrix &a, Eigen::Index anchor = 0);

// Eigenvalues are floored at max(1e-10 * lambda_max, 1e-300) before the
// inverse and inverse square root; a matrix with lambda_max <= 0 is singular.
double EigenvalueFloor(double lambda_max);

HermitianMatrix MatrixSqrt(const HermitianMatrix &a);
HermitianMatrix MatrixInvSqrt(const HermitianMatrix &a);
HermitianMatrix Inverse(const HermitianMatrix &a);

// Solves G psi G = target for Hermitian PSD G, i.e. the geometric mean of
// psi^-1 and target: psi^-1/2 (psi^1/2 target psi^1/2)^1/2 psi^-1/2.
HermitianMatrix RiccatiSolve(const HermitianMatrix &psi,
                             const HermitianMatrix &target);

// G_new = RiccatiSolve(psi, g_old phi g_old).
HermitianMatrix GeometricMeanUpdate(const HermitianMatrix &g_old,
                                    const HermitianMatrix &phi,
                                    const HermitianMatrix &psi);

// ||G psi G - target||_F / ||target||_F
double RiccatiResidual(const HermitianMatrix &g, const HermitianMatrix &psi,
                       const HermitianMatrix &target);

// Re tr(a b); throws on dimension mismatch or when the imaginary part of the
// trace exceeds 1e-10 relative to |a|_F |b|_F.
double TraceProduct(const HermitianMatrix &a, const HermitianMatrix &b);

// Real log-determinant of a Hermitian positive definite matrix.
double LogDet(const HermitianMatrix &a);

// A sequence of `count` M x M complex matrices in one contiguous buffer,
// column-major per matrix. Indexed by f, or by f * frames + t.
class MatrixField {
 public:
  MatrixField() = default;
  MatrixField(std::size_t count, Eigen::Index dim)
      : count_(count), dim_(dim),
        data_(count * static_cast<std::size_t>(dim * dim), cdouble(0.0)) {}

  std::size_t size() const { return count_; }
  Eigen::Index dim() const { return dim_; }
  bool empty() const { return count_ == 0; }

  Eigen::Map<CMatrix> operator[](std::size_t i) {
    return Eigen::Map<CMatrix>(data_.data() + i * dim_ * dim_, dim_, dim_);
  }
  Eigen::Map<const CMatrix> operator[](std::size_t i) const {
    return Eigen::Map<const CMatrix>(data_.data() + i * dim_ * dim_, dim_,
                                     dim_);
  }
  HermitianMatrix Get(std::size_t i) const {
    return HermitianMatrix::Symmetrized((*this)[i]);
  }
  void Set(std::size_t i, const HermitianMatrix &a) { (*this)[i] = a.matrix(); }

 private:
  std::size_t count_ = 0;
  Eigen::Index dim_ = 0;
  std::vector<cdouble> data_;
};

using ScmField = MatrixField;

}  // namespace mnmfbf

#endif  // MNMFBF_HERMITIAN_H_
