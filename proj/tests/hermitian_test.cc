// tests/hermitian_test.cc

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

#include <cmath>

#include "doctest.h"
#include "mnmfbf/error.h"
#include "test_util.h"

using namespace mnmfbf;
using mnmfbf::testing::RandomPd;
using mnmfbf::testing::RandomVector;
using mnmfbf::testing::RelDiff;

namespace {

const cdouble kI(0.0, 1.0);

CMatrix Reconstruct(const EigenDecomposition &e) {
  return e.eigenvectors * e.eigenvalues.cast<cdouble>().asDiagonal() * e.eigenvectors.adjoint();
}

HermitianMatrix Diag(std::initializer_list<double> d) {
  Eigen::VectorXd v(d.size());
  int i = 0;
  for (double x : d) v(i++) = x;
  return HermitianMatrix::Diagonal(v);
}

}  // namespace

TEST_CASE("checked constructor rejects non-Hermitian input") {
  CMatrix a(2, 2);
  a << 1.0, 2.0, 3.0, 1.0;
  CHECK_THROWS_AS(HermitianMatrix{a}, Error);
  CMatrix b(2, 2);
  b << cdouble(1.0, 1e-3), 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(HermitianMatrix{b}, Error);
  CMatrix c(2, 2);
  c << 2.0, cdouble(0, 1), cdouble(0, -1), 2.0;
  CHECK_NOTHROW(HermitianMatrix{c});
}

TEST_CASE("eig of diag(2,1)") {
  EigenDecomposition e = HermitianEig(Diag({2, 1}));
  CHECK(e.eigenvalues(0) == doctest::Approx(2.0));
  CHECK(e.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(std::abs(e.eigenvectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.eigenvectors(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("eig of [[2, i], [-i, 2]]") {
  CMatrix a(2, 2);
  a << 2.0, kI, -kI, 2.0;
  HermitianMatrix h(a);
  EigenDecomposition e = HermitianEig(h);
  CHECK(e.eigenvalues(0) == doctest::Approx(3.0));
  CHECK(e.eigenvalues(1) == doctest::Approx(1.0));
  const CVector v = e.eigenvectors.col(0);
  CHECK((a * v - 3.0 * v).norm() < 1e-12);
  CVector expected(2);
  expected << kI / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(expected.dot(v)) - 1.0) < 1e-12);
}

TEST_CASE("eig of the 3x3 identity") {
  EigenDecomposition e = HermitianEig(HermitianMatrix::Identity(3));
  for (int j = 0; j < 3; ++j) CHECK(e.eigenvalues(j) == doctest::Approx(1.0));
  CHECK((e.eigenvectors.adjoint() * e.eigenvectors - CMatrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("eig reconstruction, ordering and orthonormality on random PSD") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + trial % 6;
    HermitianMatrix a = RandomPd(&rng, m, 0.0);
    EigenDecomposition e = HermitianEig(a);
    CHECK(RelDiff(Reconstruct(e), a.matrix()) <= 1e-9);
    for (int j = 1; j < m; ++j) CHECK(e.eigenvalues(j - 1) >= e.eigenvalues(j));
    CHECK((e.eigenvectors.adjoint() * e.eigenvectors - CMatrix::Identity(m, m)).norm() <= 1e-9);
    for (int j = 0; j < m; ++j) {
      const CVector v = e.eigenvectors.col(j);
      CHECK((a.matrix() * v - e.eigenvalues(j) * v).norm() <=
            1e-9 * a.FrobeniusNorm());
    }
  }
}

TEST_CASE("principal eigenvector examples") {
  CVector p = PrincipalEigenvector(Diag({2, 1}), 0);
  CHECK(std::abs(p(0) - 1.0) < 1e-12);
  CHECK(std::abs(p(1)) < 1e-12);

  CVector q(2);
  q << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);
  CVector r = PrincipalEigenvector(HermitianMatrix::Outer(q) * 4.0, 0);
  CHECK((r - q).norm() < 1e-12);

  CVector s = PrincipalEigenvector(HermitianMatrix::Identity(2), 0);
  CHECK(s.norm() == doctest::Approx(1.0));
  CHECK(std::abs(s(0).imag()) < 1e-15);
  CHECK(s(0).real() >= 0.0);
  CHECK(PrincipalEigenvector(HermitianMatrix::Identity(2), 0) == s);
}

TEST_CASE("principal eigenvector phase falls back to the largest entry") {
  CVector q(3);
  q << 0.0, cdouble(0.3, 0.4), cdouble(0.0, -0.8);
  CVector r = PrincipalEigenvector(HermitianMatrix::Outer(q), 0);
  CHECK(std::abs(r(2).imag()) < 1e-12);
  CHECK(r(2).real() > 0.0);
  CHECK(std::abs(std::abs(r.dot(q.normalized())) - 1.0) < 1e-12);
}

TEST_CASE("principal eigenvector of a zero matrix is degenerate") {
  try {
    PrincipalEigenvector(HermitianMatrix::Zero(2));
    FAIL("expected an exception");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kDegenerateMatrix);
  }
}

TEST_CASE("square root, inverse square root and inverse") {
  CHECK(RelDiff(MatrixSqrt(Diag({4, 9})).matrix(), Diag({2, 3}).matrix()) < 1e-14);
  CHECK(RelDiff(Inverse(HermitianMatrix::Identity(3)).matrix(), CMatrix::Identity(3, 3)) < 1e-14);
  CHECK(RelDiff(MatrixInvSqrt(Diag({4, 16})).matrix(), Diag({0.5, 0.25}).matrix()) < 1e-14);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 5;
    HermitianMatrix a = RandomPd(&rng, m);
    const CMatrix s = MatrixSqrt(a).matrix();
    const CMatrix id = CMatrix::Identity(m, m);
    CHECK(RelDiff(s * s, a.matrix()) <= 1e-9);
    CHECK((MatrixInvSqrt(a).matrix() * s - id).norm() <= 1e-8);
    CHECK((Inverse(a).matrix() * a.matrix() - id).norm() <= 1e-8);
  }
}

TEST_CASE("inverse of a zero matrix is singular") {
  try {
    Inverse(HermitianMatrix::Zero(2));
    FAIL("expected an exception");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kSingularMatrix);
  }
  CHECK_THROWS_AS(MatrixInvSqrt(HermitianMatrix::Zero(3)), Error);
}

TEST_CASE("eigenvalue floor") {
  CHECK(EigenvalueFloor(1.0) == doctest::Approx(1e-10));
  CHECK(EigenvalueFloor(1e-300) == 1e-300);
}

TEST_CASE("geometric mean update: scalar cases") {
  auto s = [](double x) { return Diag({x}); };
  CHECK(GeometricMeanUpdate(s(1), s(4), s(1))(0, 0).real() == doctest::Approx(2.0));
  CHECK(GeometricMeanUpdate(s(1), s(9), s(4))(0, 0).real() == doctest::Approx(1.5));
  CHECK(GeometricMeanUpdate(s(0.7), s(3), s(3))(0, 0).real() == doctest::Approx(0.7));
}

TEST_CASE("geometric mean update: Riccati residual on random PSD triples") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 6;
    HermitianMatrix g = RandomPd(&rng, m), phi = RandomPd(&rng, m), psi = RandomPd(&rng, m);
    HermitianMatrix target =
        HermitianMatrix::Symmetrized(g.matrix() * phi.matrix() * g.matrix());
    HermitianMatrix gn = GeometricMeanUpdate(g, phi, psi);
    CHECK(RiccatiResidual(gn, psi, target) <= 1e-8);
  }
}

TEST_CASE("geometric mean update: phi = psi keeps the residual relation") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 3;
    HermitianMatrix g = RandomPd(&rng, m), phi = RandomPd(&rng, m);
    HermitianMatrix target =
        HermitianMatrix::Symmetrized(g.matrix() * phi.matrix() * g.matrix());
    CHECK(RiccatiResidual(GeometricMeanUpdate(g, phi, phi), phi, target) <= 1e-8);
  }
}

TEST_CASE("geometric mean update: commuting inputs with identity g") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 5;
    Eigen::VectorXd a(m), b(m);
    for (int i = 0; i < m; ++i) a(i) = u(rng), b(i) = u(rng);
    // Rotate both into a common random unitary basis.
    Eigen::HouseholderQR<CMatrix> qr(testing::RandomMatrix(&rng, m, m));
    CMatrix q = qr.householderQ();
    auto rot = [&](const Eigen::VectorXd &d) {
      return HermitianMatrix::Symmetrized(q * d.cast<cdouble>().asDiagonal() * q.adjoint());
    };
    HermitianMatrix gn = GeometricMeanUpdate(HermitianMatrix::Identity(m), rot(a), rot(b));
    Eigen::VectorXd expected = (a.array() / b.array()).sqrt();
    CHECK(RelDiff(gn.matrix(), rot(expected).matrix()) <= 1e-9);
  }
}

TEST_CASE("trace product") {
  CHECK(TraceProduct(HermitianMatrix::Identity(2), HermitianMatrix::Identity(2)) == 2.0);
  CHECK(TraceProduct(Diag({1, 2}), Diag({3, 4})) == doctest::Approx(11.0));
  CVector p(2), q(2);
  p << 1.0, 0.0;
  q << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(TraceProduct(HermitianMatrix::Outer(p), HermitianMatrix::Outer(q)) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(TraceProduct(HermitianMatrix::Identity(2), HermitianMatrix::Identity(3)), Error);
}

TEST_CASE("log determinant") {
  CHECK(LogDet(Diag({2, 3})) == doctest::Approx(std::log(6.0)));
  std::mt19937_64 rng(4);
  HermitianMatrix a = RandomPd(&rng, 4);
  CHECK(LogDet(a) == doctest::Approx(std::log(a.matrix().determinant().real())));
}

TEST_CASE("operations are pure") {
  std::mt19937_64 rng(21);
  HermitianMatrix a = RandomPd(&rng, 4), b = RandomPd(&rng, 4), c = RandomPd(&rng, 4);
  CHECK(HermitianEig(a).eigenvectors == HermitianEig(a).eigenvectors);
  CHECK(MatrixSqrt(a).matrix() == MatrixSqrt(a).matrix());
  CHECK(GeometricMeanUpdate(a, b, c).matrix() == GeometricMeanUpdate(a, b, c).matrix());
  CHECK(PrincipalEigenvector(a, 1) == PrincipalEigenvector(a, 1));
}

TEST_CASE("matrix field stores column-major blocks") {
  MatrixField field(3, 2);
  CHECK(field.size() == 3);
  field.Set(1, HermitianMatrix::Identity(2) * 2.0);
  CHECK(field[1](0, 0) == cdouble(2.0));
  CHECK(field[0].norm() == 0.0);
  CHECK(field.Get(1).Trace() == doctest::Approx(4.0));
}
