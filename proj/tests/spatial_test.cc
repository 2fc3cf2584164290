// tests/spatial_test.cc

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

#include "doctest.h"
#include "mnmfbf/error.h"
#include "mnmfbf/ilrma.h"
#include "test_util.h"

using namespace mnmfbf;

namespace {

IlrmaResult DemixingOf(std::vector<CMatrix> w) {
  IlrmaResult r;
  r.demixing.w = std::move(w);
  return r;
}

// x_ft = p_f s_ft plus optional small white noise.
Spectrogram PlantedSpeech(std::mt19937_64 *rng, const std::vector<CVector> &p,
                          std::size_t frames, double noise) {
  const std::size_t bins = p.size();
  const std::size_t m = static_cast<std::size_t>(p[0].size());
  Spectrogram x(bins, frames, m, 2 * (static_cast<int>(bins) - 1), 1, kDefaultSampleRate);
  std::normal_distribution<double> g;
  for (std::size_t f = 0; f < bins; ++f)
    for (std::size_t t = 0; t < frames; ++t) {
      const cdouble s(g(*rng), g(*rng));
      x.bin(f, t) = p[f] * s;
      for (std::size_t i = 0; i < m; ++i) x.at(f, t, i) += noise * cdouble(g(*rng), g(*rng));
    }
  return x;
}

MnmfParams Random(std::mt19937_64 *rng, int k, int n, int m, std::size_t f, std::size_t t) {
  MnmfParams p = MakeParams(k, n, m, f, t);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (Eigen::Index i = 0; i < p.v.size(); ++i) p.v.data()[i] = u(*rng);
  for (Eigen::Index i = 0; i < p.h.size(); ++i) p.h.data()[i] = u(*rng);
  for (Eigen::Index i = 0; i < p.z.size(); ++i) p.z.data()[i] = u(*rng);
  for (std::size_t i = 0; i < p.g.size(); ++i) p.g.Set(i, testing::RandomPd(rng, m));
  return p;
}

}  // namespace

TEST_CASE("epsilon policy arithmetic") {
  CVector g = CVector::Zero(3);
  g(1) = 1.0;
  EpsilonPolicy rel;
  CHECK(rel.Epsilon(g) == doctest::Approx(0.01 / 3.0));
  EpsilonPolicy abs{EpsilonPolicy::Mode::kAbsolute, 0.01};
  CHECK(abs.Epsilon(g) == doctest::Approx(0.01));
  EpsilonPolicy bad{EpsilonPolicy::Mode::kAbsolute, -1.0};
  CHECK_THROWS_AS(bad.Epsilon(g), Error);

  // With |g| = 1 and absolute epsilon 0.01, tr G = 1 + 0.01 M.
  std::mt19937_64 rng(1);
  Spectrogram x = testing::RandomSpectrogram(&rng, 4, 10, 3);
  SpatialInit init = InitSpatial(x, DemixingOf(std::vector<CMatrix>(4, CMatrix::Identity(3, 3))),
                                 3, abs);
  for (std::size_t i = 0; i < init.g.size(); ++i)
    CHECK(init.g[i].trace().real() == doctest::Approx(1.0 + 0.01 * 3));
  SpatialInit relative = InitSpatial(
      x, DemixingOf(std::vector<CMatrix>(4, CMatrix::Identity(3, 3))), 3, rel);
  for (std::size_t i = 0; i < relative.g.size(); ++i)
    CHECK(relative.g[i].trace().real() == doctest::Approx(1.01));
}

TEST_CASE("single channel initialization is |g|^2 + epsilon") {
  std::mt19937_64 rng(2);
  Spectrogram x = testing::RandomSpectrogram(&rng, 5, 8, 1);
  std::vector<CMatrix> w(5, CMatrix::Constant(1, 1, cdouble(0.5, 0.0)));
  SpatialInit init = InitSpatial(x, DemixingOf(w), 1);
  for (std::size_t f = 0; f < 5; ++f) CHECK(init.g[f](0, 0).real() == doctest::Approx(4.0 * 1.01));
}

TEST_CASE("the speech anchor recovers a planted steering vector") {
  std::mt19937_64 rng(3);
  const std::size_t bins = 17;
  std::vector<CVector> p;
  for (std::size_t f = 0; f < bins; ++f) p.push_back(testing::RandomVector(&rng, 3).normalized());
  Spectrogram x = PlantedSpeech(&rng, p, 200, 0.01);
  std::vector<CVector> anchor = SpeechAnchor(x);
  for (std::size_t f = 0; f < bins; ++f) CHECK(std::abs(anchor[f].dot(p[f])) >= 0.99);

  // Through InitSpatial the source-0 covariance is rank-1 plus loading along p.
  std::vector<CMatrix> w;
  for (std::size_t f = 0; f < bins; ++f) w.push_back(testing::RandomMatrix(&rng, 3, 3));
  SpatialInit init = InitSpatial(x, DemixingOf(w), 3);
  for (std::size_t f = 0; f < bins; ++f) {
    CVector g0 = PrincipalEigenvector(init.g.Get(f), 0);
    CHECK(std::abs(g0.dot(p[f])) >= 0.99);
  }
}

TEST_CASE("the most anchor-like ILRMA column moves to index 0") {
  std::mt19937_64 rng(4);
  const std::size_t bins = 9;
  std::vector<CVector> p;
  for (std::size_t f = 0; f < bins; ++f) p.push_back(testing::RandomVector(&rng, 3).normalized());
  Spectrogram x = PlantedSpeech(&rng, p, 100, 0.0);
  // Mixing matrices whose column 2 is the planted direction scaled by 3.
  std::vector<CMatrix> w(bins);
  std::vector<CMatrix> mixing(bins);
  for (std::size_t f = 0; f < bins; ++f) {
    mixing[f] = testing::RandomMatrix(&rng, 3, 3);
    mixing[f].col(2) = 3.0 * p[f];
    w[f] = mixing[f].inverse().adjoint();
  }
  SpatialInit init = InitSpatial(x, DemixingOf(w), 3);
  CHECK(init.matched_ilrma_source == 2);
  for (std::size_t f = 0; f < bins; ++f) {
    // Source 0 carries the anchor with the column norm; sources 1 and 2 are
    // ILRMA columns 0 and 1.
    CHECK(init.g[f].trace().real() == doctest::Approx(9.0 * 1.01));
    CMatrix g1 = mixing[f].col(0) * mixing[f].col(0).adjoint();
    g1.diagonal().array() += 0.01 * mixing[f].col(0).squaredNorm() / 3.0;
    CHECK(testing::RelDiff(init.g[bins + f], g1) < 1e-10);
  }
  CHECK_THROWS_AS(InitSpatial(x, DemixingOf(w), 4), Error);
}

TEST_CASE("initial factors match the observed power per bin") {
  std::mt19937_64 rng(5);
  Spectrogram x = testing::RandomSpectrogram(&rng, 9, 30, 2);
  MnmfConfig cfg;
  cfg.bases = 4;
  cfg.ilrma_iterations = 5;
  MnmfParams p = InitializeParams(x, cfg);
  CHECK(p.sources() == 2);
  CHECK(p.bases() == 4);
  MatrixField y = ComputeModel(p);
  for (std::size_t f = 0; f < x.bins(); ++f) {
    double model = 0.0, power = 0.0;
    for (std::size_t t = 0; t < x.frames(); ++t) {
      model += y[f * x.frames() + t].trace().real();
      power += x.bin(f, t).squaredNorm();
    }
    CHECK(model == doctest::Approx(power).epsilon(1e-10));
  }
  MnmfParams again = InitializeParams(x, cfg);
  CHECK(again.v == p.v);
  CHECK(again.h == p.h);
}

TEST_CASE("batch activations match the observed power per frame") {
  std::mt19937_64 rng(6);
  MnmfParams p = Random(&rng, 3, 2, 2, 7, 20);
  Spectrogram x = testing::RandomSpectrogram(&rng, 7, 5, 2);
  InitBatchActivations(&p, x, 10, 42);
  MatrixField y = ComputeModel(p, 10, 5);
  for (std::size_t t = 0; t < 5; ++t) {
    double model = 0.0, power = 0.0;
    for (std::size_t f = 0; f < 7; ++f) {
      model += y[f * 5 + t].trace().real();
      power += x.bin(f, t).squaredNorm();
    }
    CHECK(model == doctest::Approx(power).epsilon(1e-10));
  }
  CHECK_THROWS_AS(InitBatchActivations(&p, x, 16, 42), Error);
}

TEST_CASE("extracted SCMs decompose the model") {
  std::mt19937_64 rng(7);
  MnmfParams p = Random(&rng, 3, 3, 2, 5, 8);
  SpatialEstimates est = ExtractScms(p, 1);
  MatrixField y = ComputeModel(p);
  for (std::size_t i = 0; i < y.size(); ++i)
    CHECK(testing::RelDiff(est.p_ft[i] + est.q_ft[i], y[i]) <= 1e-10);
  for (std::size_t f = 0; f < 5; ++f) {
    CMatrix mean = CMatrix::Zero(2, 2);
    for (std::size_t t = 0; t < 8; ++t) mean += est.p_ft[f * 8 + t];
    CHECK(testing::RelDiff(est.p_f[f], mean / 8.0) <= 1e-12);
  }
  SpatialEstimates part = ExtractScms(p, 1, 3, 4, true);
  CHECK(part.frames == 4);
  CHECK(testing::RelDiff(part.p_ft[2 * 4 + 1], est.p_ft[2 * 8 + 4]) <= 1e-14);
  CHECK_FALSE(ExtractScms(p, 0, false).has_time_variant());
  CHECK_THROWS_AS(ExtractScms(p, 3), Error);
}

TEST_CASE("extracted SCMs: scalar arithmetic and a single source") {
  MnmfParams p = MakeParams(1, 2, 1, 1, 1);
  p.v(0, 0) = 2.0;
  p.h(0, 0) = 3.0;
  p.z(0, 0) = 0.5;
  p.z(1, 0) = 0.25;
  p.G(0, 0)(0, 0) = 4.0;
  p.G(1, 0)(0, 0) = 8.0;
  SpatialEstimates est = ExtractScms(p, 0);
  CHECK(est.p_ft[0](0, 0).real() == doctest::Approx(2.0 * 3.0 * 0.5 * 4.0));
  CHECK(est.q_ft[0](0, 0).real() == doctest::Approx(2.0 * 3.0 * 0.25 * 8.0));

  std::mt19937_64 rng(8);
  MnmfParams one = Random(&rng, 2, 1, 3, 4, 5);
  SpatialEstimates e1 = ExtractScms(one, 0);
  for (std::size_t i = 0; i < e1.q_ft.size(); ++i) CHECK(e1.q_ft[i].norm() == 0.0);
}

TEST_CASE("steering extraction") {
  SpatialEstimates est;
  est.bins = 3;
  est.frames = 1;
  est.p_f = ScmField(3, 2);
  est.q_f = ScmField(3, 2);
  CVector p(2);
  p << cdouble(0.6, 0.0), cdouble(0.0, 0.8);
  est.p_f.Set(0, HermitianMatrix::Outer(p) * 4.0);
  Eigen::VectorXd d(2);
  d << 2.0, 1.0;
  est.p_f.Set(1, HermitianMatrix::Diagonal(d));
  est.p_f.Set(2, HermitianMatrix::Identity(2));
  SteeringEstimates s = ExtractSteering(est, TimeMode::kTimeInvariant);
  CHECK((s.p[0] - p).norm() < 1e-12);
  CHECK(s.lambda(0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(std::abs(s.p[1](0) - 1.0) < 1e-12);
  CHECK(s.lambda(1) == doctest::Approx(std::sqrt(5.0)));
  CHECK_THROWS_AS(ExtractSteering(est, TimeMode::kTimeVariant), Error);

  est.p_f.Set(1, HermitianMatrix::Zero(2));
  try {
    ExtractSteering(est, TimeMode::kTimeInvariant);
    FAIL("expected an exception");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kDegenerateMatrix);
    CHECK(std::string(e.what()).find("f=1") != std::string::npos);
  }
}

TEST_CASE("rank-1 SCMs give lambda equal to the eigenvalue") {
  std::mt19937_64 rng(9);
  SpatialEstimates est;
  est.bins = 20;
  est.p_f = ScmField(20, 4);
  est.q_f = ScmField(20, 4);
  std::vector<double> lam;
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (std::size_t f = 0; f < 20; ++f) {
    lam.push_back(u(rng));
    est.p_f.Set(f, HermitianMatrix::Outer(testing::RandomVector(&rng, 4).normalized()) * lam[f]);
  }
  SteeringEstimates s = ExtractSteering(est, TimeMode::kTimeInvariant);
  for (std::size_t f = 0; f < 20; ++f) {
    CHECK(std::abs(s.lambda(f) - lam[f]) <= 1e-9 * lam[f]);
    CHECK(s.p[f].norm() == doctest::Approx(1.0));
    CHECK(s.p[f](0).imag() == doctest::Approx(0.0));
  }
}
