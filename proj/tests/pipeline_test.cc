// tests/pipeline_test.cc

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

#include "mnmfbf/pipeline.h"

#include <cmath>
#include <random>

#include "doctest.h"
#include "mnmfbf/error.h"
#include "mnmfbf/harness.h"
#include "test_util.h"

using namespace mnmfbf;

namespace {

EnhanceConfig SmallConfig() {
  EnhanceConfig c;
  c.bases = 4;
  c.offline_iterations = 5;
  c.first_inner_iterations = 5;
  c.next_inner_iterations = 2;
  c.ilrma_iterations = 5;
  return c;
}

WaveformBlock Scene(std::uint64_t seed, double seconds, int mics = 2, double snr = 0.0) {
  SceneSpec spec;
  spec.mics = mics;
  spec.seed = seed;
  spec.duration_seconds = seconds;
  spec.snr_db = snr;
  return SynthScene(spec).mixture;
}

std::vector<double> Head(const std::vector<double> &v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

TEST_CASE("seconds to frames") {
  CHECK(SecondsToFrames(0.5, 16000, 160) == 50);
  CHECK(SecondsToFrames(10.0, 16000, 160) == 1000);
}

TEST_CASE("mini-batch plan for a 30 s signal") {
  const std::size_t frames = NumFrames(30 * 16000, 1024, 160);
  MiniBatchPlan plan = PlanMiniBatches(frames, EnhanceConfig{}, 16000);
  CHECK(plan.first_batch_frames == 1000);
  CHECK(plan.batch_frames == 50);
  CHECK(plan.batches.size() == 41);
  CHECK(plan.batches[0].count == 1000);
}

TEST_CASE("mini-batch plans are contiguous and cover every frame") {
  for (std::size_t frames : {1u, 7u, 100u, 101u, 124u, 125u, 126u, 1000u, 2994u}) {
    MiniBatchPlan plan = PlanMiniBatches(frames, 100, 50);
    std::size_t pos = 0;
    for (const FrameRange &r : plan.batches) {
      CHECK(r.first == pos);
      CHECK(r.count > 0);
      pos += r.count;
    }
    CHECK(pos == frames);
    for (std::size_t j = 1; j + 1 < plan.batches.size(); ++j) CHECK(plan.batches[j].count == 50);
  }
  // A remainder under half a batch joins the last batch.
  CHECK(PlanMiniBatches(124, 100, 50).batches.size() == 1);
  CHECK(PlanMiniBatches(124, 100, 50).batches[0].count == 124);
  CHECK(PlanMiniBatches(125, 100, 50).batches.size() == 2);
  CHECK(PlanMiniBatches(170, 100, 50).batches.back().count == 70);
  CHECK_THROWS_AS(PlanMiniBatches(10, 0, 5), Error);
}

TEST_CASE("configuration validation") {
  auto bad = [](auto mutate) {
    EnhanceConfig c;
    mutate(c);
    try {
      c.Validate();
    } catch (const Error &e) {
      return e.kind() == ErrorKind::kConfiguration;
    }
    return false;
  };
  CHECK_NOTHROW(EnhanceConfig{}.Validate());
  CHECK(bad([](EnhanceConfig &c) { c.bases = 0; }));
  CHECK(bad([](EnhanceConfig &c) { c.rho = 0.0; }));
  CHECK(bad([](EnhanceConfig &c) { c.rho = 1.5; }));
  CHECK(bad([](EnhanceConfig &c) { c.batch_seconds = 0.0; }));
  CHECK(bad([](EnhanceConfig &c) { c.first_batch_seconds = 0.2; }));
  CHECK(bad([](EnhanceConfig &c) { c.hop = 2000; }));
  CHECK(bad([](EnhanceConfig &c) { c.first_inner_iterations = 0; }));
}

TEST_CASE("offline enhancement: output, report and determinism") {
  WaveformBlock x = Scene(1, 2.0);
  EnhanceConfig cfg = SmallConfig();
  cfg.beamformer.family = BeamformerFamily::kMvdr;
  EnhanceResult a = EnhanceOffline(x, cfg);
  CHECK(a.output.num_channels() == 1);
  CHECK(a.output.num_samples() ==
        CoveredSamples(NumFrames(x.num_samples(), 1024, 160), 1024, 160));
  CHECK(a.report.cost_trace.size() == 6);
  CHECK(a.report.reference >= 0);
  CHECK(a.report.reference < 2);
  std::vector<std::string> stages;
  for (const auto &t : a.report.timings) stages.push_back(t.stage);
  CHECK(stages == std::vector<std::string>{"stft", "init", "mnmf", "beamform", "istft"});

  EnhanceResult b = EnhanceOffline(x, cfg);
  CHECK(a.output.channels == b.output.channels);
}

TEST_CASE("offline enhancement: every family and time mode runs") {
  WaveformBlock x = Scene(2, 1.5);
  for (auto family : {BeamformerFamily::kFullRankWf, BeamformerFamily::kRank1Wf,
                      BeamformerFamily::kMvdr})
    for (auto mode : {TimeMode::kTimeInvariant, TimeMode::kTimeVariant}) {
      EnhanceConfig cfg = SmallConfig();
      cfg.offline_iterations = 2;
      cfg.beamformer.family = family;
      cfg.beamformer.time_mode = mode;
      EnhanceResult r = EnhanceOffline(x, cfg);
      for (double v : r.output.channels[0]) REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("speech-only input stays close to the reference image") {
  SceneSpec spec;
  spec.mics = 2;
  spec.seed = 3;
  spec.duration_seconds = 3.0;
  spec.snr_db = kNoNoise;
  // Frequency-flat real gains keep every speech snapshot exactly rank 1.
  spec.steering = SteeringModel::kFixed;
  CVector a(2), b(2);
  a << 1.0, 0.7;
  b << 0.4, -1.0;
  spec.fixed_steering = {a, b};
  SceneTruth truth = SynthScene(spec);
  // White sensor noise at -30 dB keeps the input SI-SDR finite.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, std::sqrt(1e-3));
  for (auto &ch : truth.mixture.channels)
    for (double &v : ch) v += g(rng);
  EnhanceConfig cfg;
  cfg.sources = 2;
  cfg.beamformer.reference = 0;
  for (auto family : {BeamformerFamily::kMvdr, BeamformerFamily::kFullRankWf}) {
    cfg.beamformer.family = family;
    EnhanceResult r = EnhanceOffline(truth.mixture, cfg);
    const std::size_t n = r.output.num_samples();
    const std::vector<double> target = Head(truth.images[0].channels[0], n);
    const double in = SiSdr(target, Head(truth.mixture.channels[0], n));
    const double out = SiSdr(target, r.output.channels[0]);
    MESSAGE(FamilyName(family) << ": input " << in << " dB, output " << out << " dB");
    CHECK(out >= in - 3.0);
  }
}

TEST_CASE("stage errors name the stage") {
  WaveformBlock mono = Scene(4, 1.0);
  mono.channels.resize(1);
  CHECK_THROWS_AS(EnhanceOffline(mono, SmallConfig()), Error);

  WaveformBlock x = Scene(4, 1.0);
  EnhanceConfig cfg = SmallConfig();
  cfg.beamformer.reference = 5;
  try {
    EnhanceOffline(x, cfg);
    FAIL("expected an exception");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("stage 'beamform'") != std::string::npos);
  }
}

TEST_CASE("online with a single batch matches the offline path") {
  WaveformBlock x = Scene(5, 2.0);
  EnhanceConfig cfg = SmallConfig();
  cfg.first_batch_seconds = 5.0;
  cfg.batch_seconds = 0.5;
  cfg.first_inner_iterations = cfg.offline_iterations;
  for (auto mode : {TimeMode::kTimeInvariant, TimeMode::kTimeVariant}) {
    cfg.beamformer.time_mode = mode;
    EnhanceResult off = EnhanceOffline(x, cfg);
    EnhanceResult on = EnhanceOnline(x, cfg);
    REQUIRE(on.output.num_samples() == off.output.num_samples());
    CHECK(on.report.batches.size() == 1);
    double d = 0.0;
    for (std::size_t i = 0; i < off.output.num_samples(); ++i) {
      const double e = on.output.channels[0][i] - off.output.channels[0][i];
      d += e * e;
    }
    CHECK(std::sqrt(d / off.output.num_samples()) <= 1e-6);
  }
}

TEST_CASE("online emits one segment per batch covering the signal once") {
  WaveformBlock x = Scene(6, 3.0);
  EnhanceConfig cfg = SmallConfig();
  cfg.first_batch_seconds = 1.0;
  cfg.batch_seconds = 0.5;
  const std::size_t frames = NumFrames(x.num_samples(), 1024, 160);
  MiniBatchPlan plan = PlanMiniBatches(frames, cfg, 16000);
  OnlineEnhancer enh(2, cfg, 16000, x.num_samples());
  enh.Append(x);
  enh.Finish();
  WaveformBlock seg;
  std::size_t total = 0;
  int count = 0;
  while (enh.ProcessNext(&seg)) {
    total += seg.num_samples();
    ++count;
  }
  CHECK(enh.Done());
  CHECK(count == static_cast<int>(plan.batches.size()));
  CHECK(total == CoveredSamples(frames, 1024, 160));
  const auto &batches = enh.report().batches;
  REQUIRE(batches.size() == plan.batches.size());
  for (std::size_t j = 0; j < batches.size(); ++j) {
    CHECK(batches[j].first_frame == plan.batches[j].first);
    CHECK(batches[j].frames == plan.batches[j].count);
    CHECK(batches[j].inner_iterations == (j == 0 ? 5 : 2));
  }
}

TEST_CASE("online output is causal: a prefix gives the same leading segments") {
  WaveformBlock x = Scene(7, 3.0);
  EnhanceConfig cfg = SmallConfig();
  cfg.first_batch_seconds = 1.0;
  cfg.batch_seconds = 0.5;
  auto run = [&](std::size_t samples, std::size_t block) {
    OnlineEnhancer enh(2, cfg, 16000);
    std::vector<std::vector<double>> segments;
    WaveformBlock seg;
    for (std::size_t pos = 0; pos < samples; pos += block) {
      WaveformBlock piece;
      for (const auto &ch : x.channels)
        piece.channels.emplace_back(ch.begin() + pos, ch.begin() + std::min(samples, pos + block));
      enh.Append(piece);
      while (enh.ProcessNext(&seg)) segments.push_back(seg.channels[0]);
    }
    enh.Finish();
    while (enh.ProcessNext(&seg)) segments.push_back(seg.channels[0]);
    return segments;
  };
  auto full = run(x.num_samples(), 3000);
  auto prefix = run(2 * 16000, 7000);
  REQUIRE(prefix.size() >= 2);
  REQUIRE(full.size() > prefix.size());
  for (std::size_t j = 0; j + 1 < prefix.size(); ++j) CHECK(prefix[j] == full[j]);
}

TEST_CASE("online waits for data and rejects bad input") {
  EnhanceConfig cfg = SmallConfig();
  cfg.first_batch_seconds = 1.0;
  OnlineEnhancer enh(2, cfg, 16000);
  WaveformBlock seg;
  CHECK_FALSE(enh.ProcessNext(&seg));
  WaveformBlock part = Scene(8, 1.0);
  part.channels[0].resize(8000);
  part.channels[1].resize(8000);
  enh.Append(part);
  CHECK_FALSE(enh.ProcessNext(&seg));
  WaveformBlock wrong = part;
  wrong.channels.resize(3, part.channels[0]);
  CHECK_THROWS_AS(enh.Append(wrong), Error);
  CHECK_THROWS_AS(OnlineEnhancer(1, cfg, 16000), Error);
  EnhanceConfig zero = cfg;
  zero.batch_seconds = 0.0;
  CHECK_THROWS_AS(OnlineEnhancer(2, zero, 16000), Error);
}
