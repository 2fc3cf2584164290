// tests/stft_test.cc

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

#include "mnmfbf/stft.h"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mnmfbf/error.h"
#include "test_util.h"

using namespace mnmfbf;

namespace {

WaveformBlock Tone(double hz, std::size_t samples, double amplitude = 0.5) {
  WaveformBlock w;
  w.channels.assign(1, std::vector<double>(samples));
  for (std::size_t n = 0; n < samples; ++n)
    w.channels[0][n] = amplitude * std::sin(2.0 * std::numbers::pi * hz * n / kDefaultSampleRate);
  return w;
}

double InteriorRelRms(const WaveformBlock &ref, const WaveformBlock &out, int window) {
  double num = 0, den = 0;
  for (std::size_t m = 0; m < ref.num_channels(); ++m)
    for (std::size_t n = window; n + window <= out.num_samples(); ++n) {
      const double d = out.channels[m][n] - ref.channels[m][n];
      num += d * d;
      den += ref.channels[m][n] * ref.channels[m][n];
    }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("periodic Hamming window") {
  std::vector<double> w = HammingWindow(1024);
  CHECK(w.size() == 1024);
  CHECK(w[0] == doctest::Approx(0.08));
  CHECK(w[512] == doctest::Approx(1.0));
  CHECK(w[256] == doctest::Approx(0.54));
  CHECK(w[1] == doctest::Approx(w[1023]));
}

TEST_CASE("frame counting drops the partial tail") {
  CHECK(NumFrames(1024, 1024, 160) == 1);
  CHECK(NumFrames(1183, 1024, 160) == 1);
  CHECK(NumFrames(1184, 1024, 160) == 2);
  CHECK(NumFrames(1000, 1024, 160) == 0);
  CHECK(CoveredSamples(2, 1024, 160) == 1184);
}

TEST_CASE("forward transform shape and zero input") {
  WaveformBlock w;
  w.channels.assign(2, std::vector<double>(16000, 0.0));
  Spectrogram s = StftForward(w);
  CHECK(s.bins() == 513);
  CHECK(s.channels() == 2);
  CHECK(s.frames() == NumFrames(16000, 1024, 160));
  for (cdouble v : s.data()) CHECK(v == cdouble(0.0));
  WaveformBlock back = StftInverse(s);
  for (double v : back.channels[1]) CHECK(v == 0.0);
}

TEST_CASE("impulse at sample 0 gives a flat frame-0 spectrum of window[0]") {
  WaveformBlock w;
  w.channels.assign(1, std::vector<double>(2048, 0.0));
  w.channels[0][0] = 1.0;
  Spectrogram s = StftForward(w);
  const double w0 = HammingWindow(1024)[0];
  for (std::size_t f = 0; f < s.bins(); ++f) CHECK(std::abs(s.at(f, 0, 0)) == doctest::Approx(w0));
  for (std::size_t f = 0; f < s.bins(); ++f) CHECK(std::abs(s.at(f, 1, 0)) == 0.0);
}

TEST_CASE("a bin-16 sinusoid peaks at bin 16") {
  const double hz = 16.0 * kDefaultSampleRate / 1024.0;
  Spectrogram s = StftForward(Tone(hz, 16000));
  for (std::size_t t = 5; t + 5 < s.frames(); t += 17) {
    std::size_t best = 0;
    for (std::size_t f = 1; f < s.bins(); ++f)
      if (std::abs(s.at(f, t, 0)) > std::abs(s.at(best, t, 0))) best = f;
    CHECK(best == 16);
  }
}

TEST_CASE("round trip on seeded noise and a 440 Hz tone") {
  WaveformBlock noise = testing::Noise(1, 2, 16000);
  CHECK(InteriorRelRms(noise, StftInverse(StftForward(noise)), 1024) <= 1e-6);
  WaveformBlock tone = Tone(440.0, 16000);
  CHECK(InteriorRelRms(tone, StftInverse(StftForward(tone)), 1024) <= 1e-6);
}

TEST_CASE("inverse covers exactly the framed samples") {
  WaveformBlock noise = testing::Noise(2, 1, 5000);
  WaveformBlock back = StftInverse(StftForward(noise));
  CHECK(back.num_samples() == CoveredSamples(NumFrames(5000, 1024, 160), 1024, 160));
}

TEST_CASE("linearity") {
  WaveformBlock x = testing::Noise(3, 2, 4000), y = testing::Noise(4, 2, 4000), z = x;
  const double a = 0.7, b = -1.3;
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t n = 0; n < 4000; ++n) z.channels[m][n] = a * x.channels[m][n] + b * y.channels[m][n];
  Spectrogram sx = StftForward(x), sy = StftForward(y), sz = StftForward(z);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < sz.data().size(); ++i) {
    num += std::norm(sz.data()[i] - (a * sx.data()[i] + b * sy.data()[i]));
    den += std::norm(sz.data()[i]);
  }
  CHECK(std::sqrt(num / den) <= 1e-10);
}

TEST_CASE("channels are transformed independently") {
  WaveformBlock x = testing::Noise(5, 3, 3000), y = x;
  y.channels[1] = testing::Noise(6, 1, 3000).channels[0];
  Spectrogram sx = StftForward(x), sy = StftForward(y);
  for (std::size_t f = 0; f < sx.bins(); f += 7)
    for (std::size_t t = 0; t < sx.frames(); ++t) {
      CHECK(sx.at(f, t, 0) == sy.at(f, t, 0));
      CHECK(sx.at(f, t, 2) == sy.at(f, t, 2));
    }
}

TEST_CASE("forward transform errors") {
  WaveformBlock shortw;
  shortw.channels.assign(1, std::vector<double>(1000, 0.0));
  CHECK_THROWS_AS(StftForward(shortw), Error);
  WaveformBlock ok = testing::Noise(1, 1, 4000);
  CHECK_THROWS_AS(StftForward(ok, 1023, 160), Error);
  CHECK_THROWS_AS(StftForward(ok, 1024, 2048), Error);
  ok.channels[0][10] = std::nan("");
  CHECK_THROWS_AS(StftForward(ok), Error);
}

TEST_CASE("frame slicing keeps metadata") {
  Spectrogram s = StftForward(testing::Noise(7, 2, 8000));
  Spectrogram part = s.Frames(3, 5);
  CHECK(part.frames() == 5);
  CHECK(part.hop() == s.hop());
  CHECK(part.at(10, 0, 1) == s.at(10, 3, 1));
}

TEST_CASE("incremental overlap-add matches the batch inverse") {
  WaveformBlock x = testing::Noise(8, 2, 12000);
  Spectrogram s = StftForward(x);
  WaveformBlock whole = StftInverse(s);
  OverlapAdd ola(2, 1024, 160, kDefaultSampleRate);
  WaveformBlock acc;
  acc.channels.resize(2);
  auto append = [&](const WaveformBlock &b) {
    for (std::size_t m = 0; m < 2; ++m)
      acc.channels[m].insert(acc.channels[m].end(), b.channels[m].begin(), b.channels[m].end());
  };
  std::size_t first = 0;
  for (std::size_t count : {7u, 1u, 20u, 13u}) {
    count = std::min<std::size_t>(count, s.frames() - first);
    append(ola.Push(s.Frames(first, count)));
    first += count;
  }
  append(ola.Push(s.Frames(first, s.frames() - first)));
  append(ola.Flush());
  REQUIRE(acc.num_samples() == whole.num_samples());
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t n = 0; n < whole.num_samples(); ++n)
      CHECK(acc.channels[m][n] == doctest::Approx(whole.channels[m][n]).epsilon(1e-12));
}
