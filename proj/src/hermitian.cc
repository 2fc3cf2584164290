// src/hermitian.cc

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

#include "mnmfbf/hermitian.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mnmfbf/error.h"

namespace mnmfbf {

const char *ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kDegenerateMatrix: return "degenerate-matrix";
    case ErrorKind::kSingularMatrix: return "singular-matrix";
    case ErrorKind::kEstimationFailure: return "estimation-failure";
    case ErrorKind::kNumericalFailure: return "numerical-failure";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

void RethrowInStage(const Error &e, const std::string &stage) {
  throw Error(e.kind(), "stage '" + stage + "': " + e.what());
}

namespace {

constexpr double kHermitianTol = 1e-12;

CMatrix Symmetrize(const CMatrix &a) {
  return (a + a.adjoint()) * 0.5;
}

void CheckSquare(const CMatrix &a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorKind::kInvalidInput, "matrix must be square and non-empty");
}

// Reassembles U f(lambda) U^H.
HermitianMatrix Reassemble(const EigenDecomposition &d,
                           const Eigen::VectorXd &values) {
  const CMatrix &u = d.eigenvectors;
  CMatrix out = u * values.cast<cdouble>().asDiagonal() * u.adjoint();
  return HermitianMatrix::Symmetrized(out);
}

Eigen::VectorXd FlooredEigenvalues(const EigenDecomposition &d) {
  double lmax = d.eigenvalues(0);
  if (!(lmax > 0.0))
    throw Error(ErrorKind::kSingularMatrix,
                "matrix has no positive eigenvalue (lambda_max = " +
                    std::to_string(lmax) + ")");
  double floor = EigenvalueFloor(lmax);
  return d.eigenvalues.cwiseMax(floor);
}

}  // namespace

HermitianMatrix::HermitianMatrix(const CMatrix &a) {
  CheckSquare(a);
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (!std::isfinite(asym) || asym > kHermitianTol * scale)
    throw Error(ErrorKind::kInvalidInput,
                "matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
  a_ = Symmetrize(a);
}

HermitianMatrix HermitianMatrix::Symmetrized(const CMatrix &a) {
  CheckSquare(a);
  HermitianMatrix h;
  h.a_ = Symmetrize(a);
  return h;
}

HermitianMatrix HermitianMatrix::Identity(Eigen::Index dim) {
  HermitianMatrix h;
  h.a_ = CMatrix::Identity(dim, dim);
  return h;
}

HermitianMatrix HermitianMatrix::Zero(Eigen::Index dim) {
  HermitianMatrix h;
  h.a_ = CMatrix::Zero(dim, dim);
  return h;
}

HermitianMatrix HermitianMatrix::Diagonal(const Eigen::VectorXd &diag) {
  HermitianMatrix h;
  h.a_ = diag.cast<cdouble>().asDiagonal();
  return h;
}

HermitianMatrix HermitianMatrix::Outer(const CVector &v) {
  return Symmetrized(v * v.adjoint());
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix &b) const {
  HermitianMatrix h;
  h.a_ = a_ + b.a_;
  return h;
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix &b) const {
  HermitianMatrix h;
  h.a_ = a_ - b.a_;
  return h;
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
  HermitianMatrix h;
  h.a_ = a_ * s;
  return h;
}

EigenDecomposition HermitianEig(const HermitianMatrix &a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::kNumericalFailure, "Hermitian eigensolver failed");
  EigenDecomposition d;
  d.eigenvalues = solver.eigenvalues().reverse();
  d.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return d;
}

void FixPhase(CVector *v, Eigen::Index anchor) {
  Eigen::Index idx = anchor;
  if (idx < 0 || idx >= v->size() || std::abs((*v)(idx)) < 1e-12)
    v->cwiseAbs().maxCoeff(&idx);
  double mag = std::abs((*v)(idx));
  if (mag == 0.0) return;
  cdouble rot = std::conj((*v)(idx)) / mag;
  *v *= rot;
  (*v)(idx) = cdouble(std::abs((*v)(idx)), 0.0);
}

CVector PrincipalEigenvector(const HermitianMatrix &a, Eigen::Index anchor) {
  EigenDecomposition d = HermitianEig(a);
  double lmax = d.eigenvalues(0);
  if (!(lmax > 0.0))
    throw Error(ErrorKind::kDegenerateMatrix,
                "largest eigenvalue is not positive (" + std::to_string(lmax) + ")");
  CVector v = d.eigenvectors.col(0);
  v /= v.norm();
  FixPhase(&v, anchor);
  return v;
}

double EigenvalueFloor(double lambda_max) {
  return std::max(1e-10 * lambda_max, 1e-300);
}

HermitianMatrix MatrixSqrt(const HermitianMatrix &a) {
  EigenDecomposition d = HermitianEig(a);
  Eigen::VectorXd s = d.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return Reassemble(d, s);
}

HermitianMatrix MatrixInvSqrt(const HermitianMatrix &a) {
  EigenDecomposition d = HermitianEig(a);
  Eigen::VectorXd s = FlooredEigenvalues(d).cwiseSqrt().cwiseInverse();
  return Reassemble(d, s);
}

HermitianMatrix Inverse(const HermitianMatrix &a) {
  EigenDecomposition d = HermitianEig(a);
  Eigen::VectorXd s = FlooredEigenvalues(d).cwiseInverse();
  return Reassemble(d, s);
}

HermitianMatrix RiccatiSolve(const HermitianMatrix &psi,
                             const HermitianMatrix &target) {
  if (psi.dim() != target.dim())
    throw Error(ErrorKind::kInvalidInput, "Riccati operands differ in dimension");
  EigenDecomposition d = HermitianEig(psi);
  Eigen::VectorXd s = FlooredEigenvalues(d);
  const CMatrix &u = d.eigenvectors;
  CMatrix psi_half = u * s.cwiseSqrt().cast<cdouble>().asDiagonal() * u.adjoint();
  CMatrix psi_inv_half =
      u * s.cwiseSqrt().cwiseInverse().cast<cdouble>().asDiagonal() * u.adjoint();
  HermitianMatrix inner =
      HermitianMatrix::Symmetrized(psi_half * target.matrix() * psi_half);
  HermitianMatrix root = MatrixSqrt(inner);
  return HermitianMatrix::Symmetrized(psi_inv_half * root.matrix() * psi_inv_half);
}

HermitianMatrix GeometricMeanUpdate(const HermitianMatrix &g_old,
                                    const HermitianMatrix &phi,
                                    const HermitianMatrix &psi) {
  if (g_old.dim() != phi.dim() || g_old.dim() != psi.dim())
    throw Error(ErrorKind::kInvalidInput, "geometric mean operands differ in dimension");
  HermitianMatrix target =
      HermitianMatrix::Symmetrized(g_old.matrix() * phi.matrix() * g_old.matrix());
  return RiccatiSolve(psi, target);
}

double RiccatiResidual(const HermitianMatrix &g, const HermitianMatrix &psi,
                       const HermitianMatrix &target) {
  double denom = target.matrix().norm();
  CMatrix diff = g.matrix() * psi.matrix() * g.matrix() - target.matrix();
  if (denom == 0.0) return diff.norm();
  return diff.norm() / denom;
}

double TraceProduct(const HermitianMatrix &a, const HermitianMatrix &b) {
  if (a.dim() != b.dim())
    throw Error(ErrorKind::kInvalidInput, "trace product dimension mismatch");
  // tr(AB) = sum_ij A_ij B_ji
  cdouble tr = (a.matrix().array() * b.matrix().transpose().array()).sum();
  double scale = a.matrix().norm() * b.matrix().norm();
  if (std::abs(tr.imag()) > 1e-10 * std::max(scale, 1e-300) && scale > 0.0)
    throw Error(ErrorKind::kInvalidInput, "trace product has non-negligible imaginary part");
  return tr.real();
}

double LogDet(const HermitianMatrix &a) {
  Eigen::LLT<CMatrix> llt(a.matrix());
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::kSingularMatrix, "log-determinant of a non-positive-definite matrix");
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    s += std::log(llt.matrixLLT()(i, i).real());
  return 2.0 * s;
}

}  // namespace mnmfbf
