// tests/ilrma_test.cc

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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mnmfbf/error.h"
#include "test_util.h"

using namespace mnmfbf;

namespace {

// Two independent sources with low-rank, strongly time-varying variances,
// mixed by mixing[f] at every bin.
Spectrogram MixTwoSources(std::uint64_t seed, std::size_t bins, std::size_t frames,
                          const std::vector<CMatrix> &mixing) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  Spectrogram x(bins, frames, 2, 2 * (static_cast<int>(bins) - 1), 1, kDefaultSampleRate);
  Eigen::MatrixXd var[2];
  for (auto &v : var) {
    Eigen::MatrixXd w(bins, 2), h(2, frames);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = std::pow(u(rng), 3.0);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = std::pow(u(rng), 4.0);
    v = w * h;
  }
  for (std::size_t f = 0; f < bins; ++f)
    for (std::size_t t = 0; t < frames; ++t) {
      CVector s(2);
      for (int n = 0; n < 2; ++n)
        s(n) = std::sqrt(var[n](f, t) / 2.0) * cdouble(g(rng), g(rng));
      x.bin(f, t) = mixing[f] * s;
    }
  return x;
}

// Mean over f of the off-diagonal to diagonal magnitude ratio of W_f^H A_f,
// after choosing the better of the two permutations per bin.
double CrossTalk(const DemixingMatrixField &w, const std::vector<CMatrix> &mixing) {
  double total = 0.0;
  for (std::size_t f = 0; f < mixing.size(); ++f) {
    const CMatrix c = w.w[f].adjoint() * mixing[f];
    const double d = std::abs(c(0, 0)) + std::abs(c(1, 1));
    const double o = std::abs(c(0, 1)) + std::abs(c(1, 0));
    total += std::min(o, d) / std::max(o, d);
  }
  return total / static_cast<double>(mixing.size());
}

}  // namespace

TEST_CASE("identity mixing is left nearly diagonal") {
  const std::size_t bins = 33;
  std::vector<CMatrix> a(bins, CMatrix::Identity(2, 2));
  Spectrogram x = MixTwoSources(1, bins, 400, a);
  IlrmaConfig cfg;
  IlrmaResult r = IlrmaRun(x, cfg);
  CHECK(CrossTalk(r.demixing, a) <= 0.1);
}

TEST_CASE("anechoic mixing is inverted up to permutation") {
  const std::size_t bins = 33;
  std::mt19937_64 rng(2);
  std::vector<CMatrix> a(bins);
  const double delay[2] = {0.0, 0.6}, gain[2] = {0.8, 1.1};
  for (std::size_t f = 0; f < bins; ++f) {
    a[f].resize(2, 2);
    const double omega = std::numbers::pi * static_cast<double>(f) / (bins - 1);
    for (int n = 0; n < 2; ++n) {
      a[f](0, n) = 1.0;
      a[f](1, n) = gain[n] * std::polar(1.0, -omega * (n == 0 ? delay[0] - 0.5 : delay[1]));
    }
  }
  Spectrogram x = MixTwoSources(3, bins, 400, a);
  IlrmaResult r = IlrmaRun(x, IlrmaConfig{});
  CHECK(CrossTalk(r.demixing, a) <= 0.1);
}

TEST_CASE("objective is non-increasing") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t m = 2 + trial % 2;
    Spectrogram x = testing::RandomSpectrogram(&rng, 9, 40, m);
    IlrmaConfig cfg;
    cfg.seed = trial;
    cfg.iterations = 30;
    cfg.track_objective = true;
    cfg.project_back = false;
    IlrmaResult r = IlrmaRun(x, cfg);
    REQUIRE(r.objective.size() == 31);
    for (std::size_t i = 1; i < r.objective.size(); ++i)
      CHECK(r.objective[i] <= r.objective[i - 1] + 1e-8 * std::abs(r.objective[i - 1]));
  }
}

TEST_CASE("a zero-variance channel engages regularization") {
  std::mt19937_64 rng(5);
  Spectrogram x = testing::RandomSpectrogram(&rng, 9, 40, 2);
  for (std::size_t f = 0; f < x.bins(); ++f)
    for (std::size_t t = 0; t < x.frames(); ++t) x.at(f, t, 1) = 0.0;
  IlrmaConfig cfg;
  cfg.project_back = false;
  IlrmaResult r;
  CHECK_NOTHROW(r = IlrmaRun(x, cfg));
  CHECK(r.regularized);
  for (const auto &s : r.sources) CHECK(s.basis.allFinite());
}

TEST_CASE("input validation") {
  std::mt19937_64 rng(6);
  Spectrogram few = testing::RandomSpectrogram(&rng, 5, 2, 3);
  CHECK_THROWS_AS(IlrmaRun(few, IlrmaConfig{}), Error);
  Spectrogram ok = testing::RandomSpectrogram(&rng, 5, 10, 2);
  IlrmaConfig bad;
  bad.bases = 0;
  CHECK_THROWS_AS(IlrmaRun(ok, bad), Error);
  bad = IlrmaConfig{};
  bad.reference = 5;
  CHECK_THROWS_AS(IlrmaRun(ok, bad), Error);
}

TEST_CASE("runs are deterministic") {
  std::mt19937_64 rng(7);
  Spectrogram x = testing::RandomSpectrogram(&rng, 9, 30, 2);
  IlrmaConfig cfg;
  cfg.iterations = 10;
  IlrmaResult a = IlrmaRun(x, cfg), b = IlrmaRun(x, cfg);
  for (std::size_t f = 0; f < x.bins(); ++f) CHECK(a.demixing.w[f] == b.demixing.w[f]);
}

TEST_CASE("mixing from demixing") {
  DemixingMatrixField w;
  w.w.assign(1, CMatrix::Identity(2, 2));
  CHECK(MixingFromDemixing(w)[0] == CMatrix::Identity(2, 2));

  w.w[0] = CMatrix::Zero(2, 2);
  w.w[0](0, 0) = 2.0;
  w.w[0](1, 1) = 4.0;
  CMatrix g = MixingFromDemixing(w)[0];
  CHECK(std::abs(g(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(g(1, 1) - 0.25) < 1e-15);
  CHECK(std::abs(g(0, 1)) == 0.0);

  std::mt19937_64 rng(8);
  w.w.clear();
  for (int i = 0; i < 20; ++i) w.w.push_back(testing::RandomMatrix(&rng, 3, 3));
  std::vector<CMatrix> mix = MixingFromDemixing(w);
  for (int i = 0; i < 20; ++i)
    CHECK((w.w[i].adjoint() * mix[i] - CMatrix::Identity(3, 3)).norm() <= 1e-8);

  w.w.assign(1, CMatrix::Zero(2, 2));
  try {
    MixingFromDemixing(w);
    FAIL("expected an exception");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kSingularMatrix);
  }
}
