// src/pipeline.cc

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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "mnmfbf/error.h"

namespace mnmfbf {

namespace {

// Frames per chunk when building time-variant filters.
constexpr std::size_t kChunkFrames = 256;

// Seed offset of the activation initialization for later mini-batches.
constexpr std::uint64_t kBatchSeedStride = 0x2545f4914f6cdd1dULL;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

template <typename Fn>
auto Stage(const char *name, EnhanceReport *report, Fn &&fn) {
  const auto start = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      report->timings.push_back({name, Seconds(start)});
    } else {
      auto r = fn();
      report->timings.push_back({name, Seconds(start)});
      return r;
    }
  } catch (const Error &e) {
    RethrowInStage(e, name);
  }
}

void AddTiming(EnhanceReport *report, const StageTiming &t) {
  for (auto &x : report->timings)
    if (x.stage == t.stage) {
      x.seconds += t.seconds;
      return;
    }
  report->timings.push_back(t);
}

void AppendSegment(const WaveformBlock &segment, WaveformBlock *out) {
  if (out->channels.empty()) out->channels.resize(segment.channels.size());
  for (std::size_t m = 0; m < segment.channels.size(); ++m)
    out->channels[m].insert(out->channels[m].end(), segment.channels[m].begin(),
                            segment.channels[m].end());
}

}  // namespace

void EnhanceConfig::Validate() const {
  auto fail = [](const std::string &msg) { throw Error(ErrorKind::kConfiguration, msg); };
  if (bases < 1) fail("bases must be >= 1");
  if (sources < 0) fail("sources must be >= 1 (or 0 for one per channel)");
  if (offline_iterations < 0) fail("iterations must be >= 0");
  if (first_inner_iterations < 1 || next_inner_iterations < 1)
    fail("online inner iterations must be >= 1");
  if (!(rho > 0.0 && rho <= 1.0)) fail("rho must lie in (0, 1]");
  if (window_len < 2 || window_len % 2 != 0) fail("window length must be even");
  if (hop < 1 || hop > window_len) fail("hop must lie in [1, window length]");
  if (!(batch_seconds > 0.0) || !std::isfinite(batch_seconds)) fail("batch seconds must be > 0");
  if (!(first_batch_seconds >= batch_seconds) || !std::isfinite(first_batch_seconds))
    fail("first batch seconds must be >= batch seconds");
  if (ilrma_bases < 1 || ilrma_iterations < 0) fail("invalid ILRMA settings");
  if (beamformer.reference && *beamformer.reference < 0) fail("reference must be >= 0");
}

MnmfConfig EnhanceConfig::Mnmf(int iterations) const {
  MnmfConfig c;
  c.bases = bases;
  c.sources = sources;
  c.iterations = iterations;
  c.seed = seed;
  c.ilrma_bases = ilrma_bases;
  c.ilrma_iterations = ilrma_iterations;
  c.track_cost = track_cost;
  return c;
}

std::size_t SecondsToFrames(double seconds, int sample_rate, int hop) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate / hop));
}

MiniBatchPlan PlanMiniBatches(std::size_t frames, std::size_t first_batch_frames,
                              std::size_t batch_frames) {
  if (frames == 0 || first_batch_frames == 0 || batch_frames == 0)
    throw Error(ErrorKind::kConfiguration, "mini-batches need a positive length");
  MiniBatchPlan plan;
  plan.first_batch_frames = first_batch_frames;
  plan.batch_frames = batch_frames;
  std::size_t pos = std::min(frames, first_batch_frames);
  plan.batches.push_back({0, pos});
  while (frames - pos >= batch_frames) {
    plan.batches.push_back({pos, batch_frames});
    pos += batch_frames;
  }
  const std::size_t rest = frames - pos;
  if (rest > 0) {
    if (2 * rest < batch_frames)
      plan.batches.back().count += rest;
    else
      plan.batches.push_back({pos, rest});
  }
  return plan;
}

MiniBatchPlan PlanMiniBatches(std::size_t frames, const EnhanceConfig &config,
                              int sample_rate) {
  return PlanMiniBatches(frames,
                         SecondsToFrames(config.first_batch_seconds, sample_rate, config.hop),
                         SecondsToFrames(config.batch_seconds, sample_rate, config.hop));
}

Spectrogram BeamformFromParams(const MnmfParams &params, const Spectrogram &x,
                               std::size_t h_offset, const BeamformerSpec &spec,
                               const SpatialEstimates *steering_scms, int *reference) {
  const std::size_t frames = x.frames();
  const int m = static_cast<int>(x.channels());
  SpatialEstimates own;
  if (!steering_scms) {
    own = ExtractScms(params, 0, h_offset, frames, false);
    steering_scms = &own;
  }
  SteeringEstimates steering;
  if (spec.family != BeamformerFamily::kFullRankWf)
    steering = ExtractSteering(*steering_scms, TimeMode::kTimeInvariant);

  int ref = spec.reference ? *spec.reference : *reference;
  if (ref >= m)
    throw Error(ErrorKind::kInvalidInput,
                "reference channel " + std::to_string(ref) + " out of range");

  if (spec.time_mode == TimeMode::kTimeInvariant) {
    BeamformerSpec s = spec;
    if (ref >= 0) s.reference = ref;
    BeamformerFilterField w = BuildFilterAuto(s, *steering_scms, &steering);
    *reference = w.reference;
    return ApplyFilter(w, x);
  }

  if (ref < 0) {
    std::vector<double> num(m, 0.0), den(m, 0.0);
    for (std::size_t c = 0; c < frames; c += kChunkFrames) {
      const std::size_t n = std::min(kChunkFrames, frames - c);
      const SpatialEstimates est = ExtractScms(params, 0, h_offset + c, n, true);
      for (int r = 0; r < m; ++r)
        AccumulateSnr(BuildFilter(spec, r, est, &steering), est, &num[r], &den[r]);
    }
    ref = ArgmaxSnr(num, den);
  }
  Spectrogram out(x.bins(), frames, 1, x.window_len(), x.hop(), x.sample_rate());
  for (std::size_t c = 0; c < frames; c += kChunkFrames) {
    const std::size_t n = std::min(kChunkFrames, frames - c);
    const SpatialEstimates est = ExtractScms(params, 0, h_offset + c, n, true);
    const BeamformerFilterField w = BuildFilter(spec, ref, est, &steering);
    const Spectrogram part = ApplyFilter(w, x.Frames(c, n));
    for (std::size_t f = 0; f < x.bins(); ++f)
      for (std::size_t t = 0; t < n; ++t) out.at(f, c + t, 0) = part.at(f, t, 0);
  }
  *reference = ref;
  return out;
}

EnhanceResult EnhanceOffline(const WaveformBlock &input, const EnhanceConfig &config) {
  config.Validate();
  input.Validate();
  if (input.num_channels() < 2)
    throw Error(ErrorKind::kInvalidInput,
                "enhancement needs at least 2 channels, got " +
                    std::to_string(input.num_channels()));
  EnhanceResult result;
  EnhanceReport &report = result.report;
  const Spectrogram x = Stage("stft", &report, [&] {
    return StftForward(input, config.window_len, config.hop);
  });
  const MnmfConfig mc = config.Mnmf(config.offline_iterations);
  MnmfParams init = Stage("init", &report, [&] {
    return InitializeParams(x, mc, config.epsilon);
  });
  FitResult fit = Stage("mnmf", &report, [&] { return FitFrom(x, std::move(init), mc); });
  report.cost_trace = fit.cost_trace;
  int reference = -1;
  const Spectrogram s = Stage("beamform", &report, [&] {
    return BeamformFromParams(fit.params, x, 0, config.beamformer, nullptr, &reference);
  });
  report.reference = reference;
  result.output = Stage("istft", &report, [&] { return StftInverse(s); });
  return result;
}

OnlineEnhancer::OnlineEnhancer(std::size_t channels, const EnhanceConfig &config,
                               int sample_rate, std::optional<std::size_t> total_samples)
    : channels_(channels), config_(config), sample_rate_(sample_rate),
      ola_(1, config.window_len, config.hop, sample_rate) {
  config_.Validate();
  if (channels < 2)
    throw Error(ErrorKind::kInvalidInput,
                "enhancement needs at least 2 channels, got " + std::to_string(channels));
  first_frames_ = SecondsToFrames(config.first_batch_seconds, sample_rate, config.hop);
  batch_frames_ = SecondsToFrames(config.batch_seconds, sample_rate, config.hop);
  if (first_frames_ == 0 || batch_frames_ == 0)
    throw Error(ErrorKind::kConfiguration, "mini-batch shorter than one frame");
  if (total_samples) {
    const std::size_t frames = NumFrames(*total_samples, config.window_len, config.hop);
    if (frames == 0)
      throw Error(ErrorKind::kInvalidInput, "signal is shorter than one analysis window");
    plan_ = PlanMiniBatches(frames, first_frames_, batch_frames_);
  }
  buffer_.resize(channels);
  stats_.rho = config.rho;
}

void OnlineEnhancer::Append(const WaveformBlock &block) {
  if (finished_) throw Error(ErrorKind::kInvalidInput, "append after end of stream");
  block.Validate();
  if (block.num_channels() != channels_)
    throw Error(ErrorKind::kInvalidInput, "channel count changed mid-stream");
  if (block.sample_rate != sample_rate_)
    throw Error(ErrorKind::kInvalidInput, "sample rate changed mid-stream");
  for (std::size_t m = 0; m < channels_; ++m)
    buffer_[m].insert(buffer_[m].end(), block.channels[m].begin(), block.channels[m].end());
  samples_seen_ += block.num_samples();
}

void OnlineEnhancer::Finish() { finished_ = true; }

std::size_t OnlineEnhancer::AvailableFrames() const {
  return NumFrames(samples_seen_, config_.window_len, config_.hop);
}

std::optional<FrameRange> OnlineEnhancer::NextBatch() const {
  const std::size_t avail = AvailableFrames();
  if (plan_) {
    if (batch_index_ >= static_cast<int>(plan_->batches.size())) return std::nullopt;
    const FrameRange r = plan_->batches[batch_index_];
    if (r.first + r.count <= avail) return r;
    if (finished_)
      throw Error(ErrorKind::kInvalidInput, "stream ended before the announced length");
    return std::nullopt;
  }
  const std::size_t want = batch_index_ == 0 ? first_frames_ : batch_frames_;
  if (avail >= next_frame_ + want) return FrameRange{next_frame_, want};
  if (finished_ && avail > next_frame_) return FrameRange{next_frame_, avail - next_frame_};
  return std::nullopt;
}

bool OnlineEnhancer::Done() const {
  if (plan_) return batch_index_ >= static_cast<int>(plan_->batches.size());
  return finished_ && AvailableFrames() <= next_frame_;
}

Spectrogram OnlineEnhancer::BatchSpectrogram(const FrameRange &r) const {
  const std::size_t start = r.first * config_.hop;
  const std::size_t len = CoveredSamples(r.count, config_.window_len, config_.hop);
  WaveformBlock w;
  w.sample_rate = sample_rate_;
  w.channels.resize(channels_);
  for (std::size_t m = 0; m < channels_; ++m) {
    auto begin = buffer_[m].begin() + static_cast<std::ptrdiff_t>(start - buffer_origin_);
    w.channels[m].assign(begin, begin + static_cast<std::ptrdiff_t>(len));
  }
  return StftForward(w, config_.window_len, config_.hop);
}

bool OnlineEnhancer::ProcessNext(WaveformBlock *segment) {
  const std::optional<FrameRange> range = NextBatch();
  if (!range) return false;
  const auto start = Clock::now();
  const bool first = batch_index_ == 0;
  const int inner = first ? config_.first_inner_iterations : config_.next_inner_iterations;
  EnhanceReport stage_times;

  const Spectrogram x = Stage("stft", &stage_times, [&] { return BatchSpectrogram(*range); });
  Stage("init", &stage_times, [&] {
    if (first) {
      params_ = InitializeParams(x, config_.Mnmf(inner), config_.epsilon);
      stats_ = OnlineStats::Zero(params_, config_.rho);
    } else {
      params_.h.resize(params_.bases(), static_cast<Eigen::Index>(x.frames()));
      InitBatchActivations(&params_, x, 0,
                           config_.seed + kBatchSeedStride * static_cast<std::uint64_t>(batch_index_));
    }
  });
  Stage("mnmf", &stage_times, [&] { OnlineUpdate(&stats_, &params_, x, 0, inner); });

  const Spectrogram s = Stage("beamform", &stage_times, [&] {
    // Time-invariant SCMs accumulate over batches with the forgetting weight.
    SpatialEstimates current = ExtractScms(params_, 0, 0, x.frames(), false);
    const double n = static_cast<double>(x.frames());
    if (first) {
      p_sum_ = ScmField(current.bins, current.p_f.dim());
      q_sum_ = ScmField(current.bins, current.q_f.dim());
      for (std::size_t f = 0; f < current.bins; ++f) {
        p_sum_[f] = n * current.p_f[f];
        q_sum_[f] = n * current.q_f[f];
      }
      frame_weight_ = n;
    } else {
      frame_weight_ = n + config_.rho * frame_weight_;
      for (std::size_t f = 0; f < current.bins; ++f) {
        p_sum_[f] = n * current.p_f[f] + config_.rho * p_sum_[f];
        q_sum_[f] = n * current.q_f[f] + config_.rho * q_sum_[f];
        current.p_f[f] = p_sum_[f] / frame_weight_;
        current.q_f[f] = q_sum_[f] / frame_weight_;
      }
    }
    return BeamformFromParams(params_, x, 0, config_.beamformer, &current, &reference_);
  });
  report_.reference = reference_;

  WaveformBlock out = Stage("istft", &stage_times, [&] {
    WaveformBlock seg = ola_.Push(s);
    next_frame_ = range->first + range->count;
    ++batch_index_;
    if (Done()) {
      AppendSegment(ola_.Flush(), &seg);
      flushed_ = true;
    }
    return seg;
  });
  if (out.channels.empty()) out.channels.resize(1);
  out.sample_rate = sample_rate_;

  // Drop samples no later frame needs.
  const std::size_t keep_from = next_frame_ * config_.hop;
  if (keep_from > buffer_origin_) {
    const std::size_t drop = std::min(keep_from, samples_seen_) - buffer_origin_;
    for (auto &ch : buffer_) ch.erase(ch.begin(), ch.begin() + static_cast<std::ptrdiff_t>(drop));
    buffer_origin_ += drop;
  }

  for (const auto &t : stage_times.timings) AddTiming(&report_, t);
  BatchReport b;
  b.index = batch_index_ - 1;
  b.first_frame = range->first;
  b.frames = range->count;
  b.inner_iterations = inner;
  b.output_samples = out.num_samples();
  b.seconds = Seconds(start);
  report_.batches.push_back(b);
  *segment = std::move(out);
  return true;
}

EnhanceResult EnhanceOnline(const WaveformBlock &input, const EnhanceConfig &config) {
  input.Validate();
  OnlineEnhancer enhancer(input.num_channels(), config, input.sample_rate, input.num_samples());
  enhancer.Append(input);
  enhancer.Finish();
  EnhanceResult result;
  result.output.sample_rate = input.sample_rate;
  result.output.channels.resize(1);
  WaveformBlock segment;
  while (enhancer.ProcessNext(&segment)) AppendSegment(segment, &result.output);
  result.report = enhancer.report();
  return result;
}

}  // namespace mnmfbf
